"""Thresholded classification and what-if (counterfactual) comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigError, DomainError, QueryError
from .fuzzy import crisp_project, resolve_binding
from .inference import PatientQuery, Prediction, predict_detailed
from .tree import ProbabilityTree, Statement

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Decision:
    """A probability turned into a 0/1 call at a given threshold."""

    probability: float
    threshold: float
    label: int
    statements: tuple[Statement, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))


def classify(p: float, threshold: float = DEFAULT_THRESHOLD) -> Decision:
    """Label 1 iff the probability reaches the threshold."""
    if not (0.0 < threshold < 1.0):
        raise ConfigError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    if not (0.0 <= p <= 1.0) or not math.isfinite(p):
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return Decision(probability=p, threshold=threshold, label=1 if p >= threshold else 0)


@dataclass(frozen=True)
class Substitution:
    """One what-if edit: set a categorical value, set a raw measurement, or
    (with both left empty) drop the variable from the query entirely."""

    variable: str
    value: str | None = None
    raw: float | None = None

    def __post_init__(self):
        if self.value is not None and self.raw is not None:
            raise QueryError(
                f"substitution for {self.variable!r} sets both a value and a raw number"
            )
        if self.raw is not None and not math.isfinite(float(self.raw)):
            raise QueryError(f"substituted raw value for {self.variable!r} must be finite")

    @property
    def removes(self) -> bool:
        return self.value is None and self.raw is None


@dataclass(frozen=True)
class AppliedSubstitution:
    variable: str
    old_value: str | None
    new_value: str | None
    old_raw: float | None
    new_raw: float | None


@dataclass(frozen=True)
class CounterfactualResult:
    factual: Decision
    counterfactual: Decision
    substitutions: tuple[AppliedSubstitution, ...]
    delta: float
    target_class: int


def apply_substitutions(
    tree: ProbabilityTree, query: PatientQuery, substitutions: Sequence[Substitution]
) -> tuple[PatientQuery, tuple[AppliedSubstitution, ...]]:
    """The edited query plus a record of what changed. Raw substitutions on
    fuzzy-bound variables re-derive the statement through the hard cut, so the
    edited query is exactly what a fresh query at those measurements would be."""
    statements = {s.variable: s for s in query.statements}
    raws = dict(query.raw_values)
    applied: list[AppliedSubstitution] = []
    for sub in substitutions:
        spec = tree.spec_for(sub.variable)
        if spec is None:
            raise QueryError(f"unknown variable {sub.variable!r} in substitution")
        old_stmt = statements.get(sub.variable)
        old_value = old_stmt.value if old_stmt else None
        old_raw = raws.get(sub.variable)
        binding = tree.bindings.get(sub.variable)
        if sub.removes:
            statements.pop(sub.variable, None)
            raws.pop(sub.variable, None)
            applied.append(AppliedSubstitution(sub.variable, old_value, None, old_raw, None))
            continue
        if sub.raw is not None:
            if binding is None:
                raise QueryError(
                    f"{sub.variable!r} is not fuzzy-bound; substitute a value, not a raw number"
                )
            raw = float(sub.raw)
            view = {v: s.value for v, s in statements.items()}
            lv = resolve_binding(binding, {**view, sub.variable: raw})
            new_value = crisp_project(lv, raw)
            statements[sub.variable] = Statement(sub.variable, new_value)
            raws[sub.variable] = raw
            applied.append(
                AppliedSubstitution(sub.variable, old_value, new_value, old_raw, raw)
            )
            continue
        value = str(sub.value)
        if value not in spec.values:
            raise QueryError(
                f"value {value!r} is not declared for {sub.variable!r} "
                f"(range {list(spec.values)})"
            )
        if binding is not None:
            raise QueryError(
                f"{sub.variable!r} is fuzzy-bound; substitute its raw measurement instead"
            )
        statements[sub.variable] = Statement(sub.variable, value)
        applied.append(AppliedSubstitution(sub.variable, old_value, value, None, None))

    order = {name: i for i, name in enumerate(tree.variable_names())}
    new_statements = tuple(
        sorted(statements.values(), key=lambda s: order.get(s.variable, len(order)))
    )
    edited = PatientQuery(new_statements, raws, query.target_class)
    return edited, tuple(applied)


def counterfactual(
    tree: ProbabilityTree,
    query: PatientQuery,
    substitutions: Sequence[Substitution],
    *,
    threshold: float = DEFAULT_THRESHOLD,
    fuzzy: bool = True,
) -> CounterfactualResult:
    """Predict, apply the edits, predict again, and report both calls."""
    factual_pred: Prediction = predict_detailed(tree, query, fuzzy=fuzzy)
    edited, applied = apply_substitutions(tree, query, substitutions)
    cf_pred = predict_detailed(tree, edited, fuzzy=fuzzy)
    factual = replace(
        classify(factual_pred.probability, threshold), statements=query.statements
    )
    counter = replace(
        classify(cf_pred.probability, threshold), statements=edited.statements
    )
    return CounterfactualResult(
        factual=factual,
        counterfactual=counter,
        substitutions=applied,
        delta=cf_pred.probability - factual_pred.probability,
        target_class=query.target_class,
    )
