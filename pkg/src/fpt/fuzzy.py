"""Membership functions and linguistic variables.

A linguistic variable names a vague clinical concept (e.g. "large nodule")
over a raw measured feature. Each of its terms is backed by a membership
function mapping the raw value to a degree in [0, 1]. Two-term variables are
usually complementary: the degrees of the two terms sum to one everywhere,
which is guaranteed exactly when the second term is synthesised as the
complement of the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConfigError, DomainError

SHAPES = ("rect-trapezoid", "triangular", "trapezoid", "gaussian", "sigmoid")

_PARAM_COUNTS = {
    "rect-trapezoid": 2,
    "triangular": 3,
    "trapezoid": 4,
    "gaussian": 2,
    "sigmoid": 2,
}

# Shapes whose parameter list is a breakpoint sequence on the x axis.
_PIECEWISE = frozenset({"rect-trapezoid", "triangular", "trapezoid"})


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"membership evaluation requires a finite input, got {x!r}")
    return x


@dataclass(frozen=True)
class MembershipFunction:
    """One fuzzy set: a shape name plus its parameters in raw-feature units.

    ``rect-trapezoid [a, b]``  rising shoulder: 0 below a, linear to 1 at b.
    ``triangular [a, b, c]``   peak 1 at b, 0 outside [a, c].
    ``trapezoid [a, b, c, d]`` plateau 1 on [b, c], 0 outside [a, d].
    ``gaussian [m, s]``        exp(-(x-m)^2 / (2 s^2)), s > 0.
    ``sigmoid [c, s]``         1 / (1 + exp(-s (x - c))); s < 0 gives a
                               falling curve.
    """

    shape: str
    parameters: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown membership shape {self.shape!r}; expected one of {SHAPES}")
        params = tuple(float(p) for p in self.parameters)
        object.__setattr__(self, "parameters", params)
        expected = _PARAM_COUNTS[self.shape]
        if len(params) != expected:
            raise ConfigError(
                f"shape {self.shape!r} takes {expected} parameters, got {len(params)}"
            )
        if any(not math.isfinite(p) for p in params):
            raise ConfigError(f"shape {self.shape!r} has non-finite parameters {params}")
        if self.shape in _PIECEWISE and any(a > b for a, b in zip(params, params[1:])):
            raise ConfigError(
                f"breakpoints for {self.shape!r} must be non-decreasing, got {list(params)}"
            )
        if self.shape == "gaussian" and params[1] <= 0:
            raise ConfigError(f"gaussian width must be positive, got {params[1]}")
        if self.shape == "sigmoid" and params[1] == 0:
            raise ConfigError("sigmoid slope must be nonzero")

    def __call__(self, x: float) -> float:
        x = _check_finite(x)
        p = self.parameters
        if self.shape == "rect-trapezoid":
            a, b = p
            if x <= a:
                mu = 0.0
            elif x >= b:
                mu = 1.0
            else:
                mu = (x - a) / (b - a)
        elif self.shape == "triangular":
            a, b, c = p
            if x <= a or x >= c:
                mu = 1.0 if x == b else 0.0
            elif x <= b:
                mu = 1.0 if a == b else (x - a) / (b - a)
            else:
                mu = 1.0 if b == c else (c - x) / (c - b)
        elif self.shape == "trapezoid":
            a, b, c, d = p
            if b <= x <= c:
                mu = 1.0
            elif x <= a or x >= d:
                mu = 0.0
            elif x < b:
                mu = 1.0 if a == b else (x - a) / (b - a)
            else:
                mu = 1.0 if c == d else (d - x) / (d - c)
        elif self.shape == "gaussian":
            m, s = p
            mu = math.exp(-((x - m) ** 2) / (2.0 * s * s))
        else:  # sigmoid
            c, s = p
            t = -s * (x - c)
            if t > 700.0:
                mu = 0.0
            elif t < -700.0:
                mu = 1.0
            else:
                mu = 1.0 / (1.0 + math.exp(t))
        return min(1.0, max(0.0, mu))

    def span(self) -> tuple[float, float]:
        """Finite x-interval outside of which the curve sits on a plateau."""
        p = self.parameters
        if self.shape in _PIECEWISE:
            return p[0], p[-1]
        if self.shape == "gaussian":
            m, s = p
            return m - 4.0 * s, m + 4.0 * s
        c, s = p
        w = 8.0 / abs(s)
        return c - w, c + w


def evaluate(mf: MembershipFunction, x: float) -> float:
    """Degree of membership of ``x`` in the fuzzy set, in [0, 1]."""
    return mf(x)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named concept over one raw feature, modelled by >= 2 fuzzy terms.

    ``terms`` maps term labels to declared membership functions. When
    ``complement_term`` is set, exactly one term is declared and the other is
    synthesised as 1 - mu(x), which makes the pair complementary by
    construction. ``crisp_cut`` carries the hard threshold used when the
    variable is projected onto a single term (tree induction, plain-tree
    emulation); ``positive_term`` is the term asserted at and above the cut.
    """

    name: str
    raw_feature: str
    terms: Mapping[str, MembershipFunction]
    complement_term: str | None = None
    complementary: bool = True
    crisp_cut: float | None = None
    positive_term: str = "1"
    support: tuple[float, float] | None = None

    def __post_init__(self):
        declared = dict(self.terms)
        object.__setattr__(self, "terms", declared)
        if not declared:
            raise ConfigError(f"linguistic variable {self.name!r} declares no terms")
        if self.complement_term is not None:
            if len(declared) != 1:
                raise ConfigError(
                    f"{self.name!r}: a synthesised complement requires exactly one "
                    f"declared term, got {sorted(declared)}"
                )
            if self.complement_term in declared:
                raise ConfigError(
                    f"{self.name!r}: complement term {self.complement_term!r} clashes "
                    "with the declared term"
                )
        elif len(declared) < 2:
            raise ConfigError(f"linguistic variable {self.name!r} needs at least two terms")
        if self.positive_term not in self.term_labels():
            raise ConfigError(
                f"{self.name!r}: positive term {self.positive_term!r} is not a term "
                f"(have {self.term_labels()})"
            )
        if self.complementary and self.complement_term is None:
            self._verify_complementary()

    def term_labels(self) -> tuple[str, ...]:
        labels = list(self.terms)
        if self.complement_term is not None:
            labels.append(self.complement_term)
        return tuple(labels)

    def resolved_support(self) -> tuple[float, float]:
        if self.support is not None:
            return self.support
        spans = [mf.span() for mf in self.terms.values()]
        lo = min(s[0] for s in spans)
        hi = max(s[1] for s in spans)
        pad = max(0.25 * (hi - lo), 1.0)
        return lo - pad, hi + pad

    def _verify_complementary(self, samples: int = 512) -> None:
        lo, hi = self.resolved_support()
        step = (hi - lo) / (samples - 1)
        for i in range(samples):
            x = lo + i * step
            total = sum(mf(x) for mf in self.terms.values())
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(
                    f"{self.name!r} is declared complementary but its term degrees "
                    f"sum to {total:.12f} at x={x:g}"
                )

    def degree(self, term: str, x: float) -> float:
        if term in self.terms:
            return self.terms[term](x)
        if term == self.complement_term:
            (mf,) = self.terms.values()
            return 1.0 - mf(x)
        raise ConfigError(f"{self.name!r} has no term {term!r}")


def term_degrees(lv: LinguisticVariable, x: float) -> dict[str, float]:
    """Degree of ``x`` in every term of the variable."""
    x = _check_finite(x)
    return {term: lv.degree(term, x) for term in lv.term_labels()}


def crisp_project(lv: LinguisticVariable, x: float) -> str:
    """Collapse the variable to a single term, emulating a hard threshold.

    With a declared ``crisp_cut`` the positive term is returned iff
    ``x >= cut``. Without one, the positive term is returned iff its degree
    reaches 0.5, so the projection depends only on where the curve crosses
    0.5, not on its exact parameterisation. Exact ties go to the positive
    term.
    """
    x = _check_finite(x)
    labels = lv.term_labels()
    if len(labels) != 2 or not lv.complementary:
        raise ConfigError(
            f"crisp projection needs a complementary two-term variable; "
            f"{lv.name!r} has terms {labels}"
        )
    if lv.crisp_cut is not None:
        positive = x >= lv.crisp_cut
    else:
        positive = lv.degree(lv.positive_term, x) >= 0.5
    if positive:
        return lv.positive_term
    (other,) = [t for t in labels if t != lv.positive_term]
    return other


@dataclass(frozen=True)
class ConditionalBinding:
    """A linguistic binding whose fuzzy sets depend on another column.

    Used when the same concept has different reference ranges per subgroup
    (e.g. anemia thresholds differ between sexes). ``selector`` names the raw
    column consulted on each record; ``cases`` maps its values to the variant
    to apply.
    """

    variable: str
    selector: str
    cases: Mapping[str, LinguisticVariable]

    def __post_init__(self):
        cases = dict(self.cases)
        object.__setattr__(self, "cases", cases)
        if not cases:
            raise ConfigError(f"conditional binding for {self.variable!r} has no cases")
        features = {lv.raw_feature for lv in cases.values()}
        if len(features) != 1:
            raise ConfigError(
                f"conditional binding for {self.variable!r} mixes raw features {sorted(features)}"
            )
        labels = {lv.term_labels() for lv in cases.values()}
        if len(labels) != 1:
            raise ConfigError(
                f"conditional binding for {self.variable!r} mixes term labels across cases"
            )

    @property
    def raw_feature(self) -> str:
        return next(iter(self.cases.values())).raw_feature

    def term_labels(self) -> tuple[str, ...]:
        return next(iter(self.cases.values())).term_labels()

    def resolve(self, selector_value: object) -> LinguisticVariable:
        key = str(selector_value)
        if key not in self.cases:
            raise ConfigError(
                f"binding for {self.variable!r}: no case for {self.selector}={key!r} "
                f"(have {sorted(self.cases)})"
            )
        return self.cases[key]


Binding = LinguisticVariable | ConditionalBinding


def _lv_to_json(lv: LinguisticVariable) -> dict:
    out: dict = {
        "raw_feature": lv.raw_feature,
        "terms": {
            label: {"shape": mf.shape, "parameters": list(mf.parameters)}
            for label, mf in lv.terms.items()
        },
        "complementary": lv.complementary,
        "positive_term": lv.positive_term,
    }
    if lv.complement_term is not None:
        out["complement_term"] = lv.complement_term
    if lv.crisp_cut is not None:
        out["crisp_cut"] = lv.crisp_cut
    if lv.support is not None:
        out["support"] = list(lv.support)
    return out


def _lv_from_json(name: str, doc: Mapping) -> LinguisticVariable:
    try:
        terms = {
            str(label): MembershipFunction(spec["shape"], tuple(spec["parameters"]))
            for label, spec in doc["terms"].items()
        }
    except KeyError as missing:
        raise ConfigError(f"fuzzy binding {name!r}: missing key {missing}") from None
    support = doc.get("support")
    return LinguisticVariable(
        name=name,
        raw_feature=doc["raw_feature"],
        terms=terms,
        complement_term=doc.get("complement_term"),
        complementary=bool(doc.get("complementary", True)),
        crisp_cut=doc.get("crisp_cut"),
        positive_term=str(doc.get("positive_term", "1")),
        support=tuple(float(v) for v in support) if support else None,
    )


def binding_to_json(binding: Binding) -> dict:
    """Declarative form of a binding, as written in model-spec files."""
    if isinstance(binding, ConditionalBinding):
        return {
            "selector": binding.selector,
            "cases": {key: _lv_to_json(lv) for key, lv in binding.cases.items()},
        }
    return _lv_to_json(binding)


def binding_from_json(name: str, doc: Mapping) -> Binding:
    if not isinstance(doc, Mapping):
        raise ConfigError(f"fuzzy binding {name!r} must be an object, got {type(doc).__name__}")
    if "cases" in doc:
        selector = doc.get("selector")
        if not selector:
            raise ConfigError(f"fuzzy binding {name!r}: cases require a selector column")
        cases = {
            str(key): _lv_from_json(name, case_doc) for key, case_doc in doc["cases"].items()
        }
        return ConditionalBinding(variable=name, selector=str(selector), cases=cases)
    return _lv_from_json(name, doc)


def resolve_binding(binding: Binding, record: Mapping[str, object]) -> LinguisticVariable:
    """The effective linguistic variable for one record (selects the case
    variant when the binding is conditional)."""
    if isinstance(binding, ConditionalBinding):
        if binding.selector not in record or record[binding.selector] in (None, ""):
            raise ConfigError(
                f"binding for {binding.variable!r} needs column {binding.selector!r} "
                "to pick its fuzzy sets"
            )
        return binding.resolve(record[binding.selector])
    return binding
