"""Prediction over probability trees, with fuzzy branch weighting.

The recursive predictor descends the tree consuming the query's statements in
schema order. At a branching on a fuzzy-bound variable it does not pick one
branch: it descends every observed sibling term, weighting each descent by the
membership degree of the patient's raw measurement in that term. Degrees of a
complementary variable sum to one, so the weighted average stays a
probability. Crisp variables descend a single branch with weight 1; variables
the query never mentions are averaged uniformly over the observed branches;
and when the query runs out of statements the answer is the conditional
probability of the class given the branch prefix realised so far.

Only membership degrees and leaf class ratios enter the weighted average;
transition probabilities contribute solely through the conditional-probability
fallbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import QueryError, UndefinedConditionalError
from .fuzzy import crisp_project, resolve_binding, term_degrees
from .tree import ProbabilityTree, Statement, TreeNode, existing_children


# ---------------------------------------------------------------------------
# Events: boolean propositions over statements, resolved against realisations.


@dataclass(frozen=True)
class Event:
    """Base proposition; combine with &, | and ~."""

    def __and__(self, other: "Event") -> "Event":
        return And((self, other))

    def __or__(self, other: "Event") -> "Event":
        return Or((self, other))

    def __invert__(self) -> "Event":
        return Not(self)

    def holds(self, assignment: Mapping[str, str]) -> bool:
        raise NotImplementedError

    def atoms(self) -> Iterable[tuple[str, str]]:
        raise NotImplementedError


@dataclass(frozen=True)
class StatementEvent(Event):
    variable: str
    value: str

    def holds(self, assignment):
        return assignment.get(self.variable) == self.value

    def atoms(self):
        yield (self.variable, self.value)


@dataclass(frozen=True)
class Not(Event):
    inner: Event

    def holds(self, assignment):
        return not self.inner.holds(assignment)

    def atoms(self):
        yield from self.inner.atoms()


@dataclass(frozen=True)
class And(Event):
    parts: tuple[Event, ...] = ()

    def holds(self, assignment):
        return all(p.holds(assignment) for p in self.parts)

    def atoms(self):
        for p in self.parts:
            yield from p.atoms()


@dataclass(frozen=True)
class Or(Event):
    parts: tuple[Event, ...] = ()

    def holds(self, assignment):
        return any(p.holds(assignment) for p in self.parts)

    def atoms(self):
        for p in self.parts:
            yield from p.atoms()


def stmt(variable: str, value: str) -> StatementEvent:
    """Atomic event: the variable takes the value."""
    return StatementEvent(variable, str(value))


ALWAYS = And(())


def _check_atoms(tree: ProbabilityTree, atoms: Iterable[tuple[str, str]]) -> None:
    for variable, value in atoms:
        spec = tree.spec_for(variable)
        if spec is None:
            raise QueryError(f"unknown variable {variable!r}")
        if value not in spec.values:
            raise QueryError(
                f"value {value!r} is not declared for {variable!r} (range {list(spec.values)})"
            )


def event_probability(tree: ProbabilityTree, event: Event) -> float:
    """Total probability of the realisations satisfying the proposition."""
    _check_atoms(tree, event.atoms())
    return sum(r.probability for r in tree.realisations() if event.holds(r.assignment()))


# ---------------------------------------------------------------------------
# Conditioning.


def conditional_probability(
    tree: ProbabilityTree, conditions: Sequence[Statement], target_class: int
) -> float:
    """P(class and conditions) / P(conditions) over realisation mass.

    Conditions form a conjunction and need not be a path prefix. Zero mass on
    the conditions leaves the quotient undefined and raises.
    """
    conditions = list(conditions)
    _check_target(target_class)
    _check_atoms(tree, ((s.variable, s.value) for s in conditions))
    wanted = {s.variable: s.value for s in conditions}
    numerator = 0.0
    denominator = 0.0
    for r in tree.realisations():
        if r.probability <= 0.0:
            continue
        assignment = r.assignment()
        if any(assignment.get(v) != value for v, value in wanted.items()):
            continue
        denominator += r.probability
        numerator += r.probability * _leaf_ratio(r.leaf, target_class)
    if denominator == 0.0:
        raise UndefinedConditionalError(conditions)
    return numerator / denominator


def _leaf_ratio(leaf: TreeNode, target_class: int) -> float:
    total = leaf.leaf_total()
    if total == 0:
        # Reachable only via smoothed (alpha > 0) transition mass; with no
        # evidence at the leaf, split it evenly.
        return 0.5
    return leaf.class_counts[target_class] / total


def _check_target(target_class: int) -> None:
    if target_class not in (0, 1):
        raise QueryError(f"target class must be 0 or 1, got {target_class!r}")


# ---------------------------------------------------------------------------
# Algorithm: longest statement prefix that exists in the tree.


def find_existing_conditions(
    tree: ProbabilityTree, statements: Sequence[Statement]
) -> list[Statement]:
    """Longest prefix of the statements walkable from the root along branches
    with training support. Stops at the first variable mismatch or unseen
    value; never raises, and the empty list is a valid answer."""
    ordered = _schema_order(tree, statements, strict=False)
    node = tree.root
    out: list[Statement] = []
    for statement in ordered:
        if node.is_leaf:
            break
        branch_variable = node.children[0].variable
        if statement.variable != branch_variable:
            break
        match = next(
            (c for c in existing_children(node) if c.value == statement.value), None
        )
        if match is None:
            break
        out.append(statement)
        node = match
    return out


def _schema_order(
    tree: ProbabilityTree, statements: Sequence[Statement], *, strict: bool
) -> list[Statement]:
    """Statements sorted into schema order; unknown variables either raise
    (strict) or sort to the end where the walk will stop at them."""
    order = {name: i for i, name in enumerate(tree.variable_names())}
    seen: dict[str, Statement] = {}
    for s in statements:
        if strict and s.variable not in order:
            raise QueryError(f"unknown variable {s.variable!r}")
        if s.variable in seen and seen[s.variable].value != s.value:
            raise QueryError(f"conflicting statements for {s.variable!r}")
        seen.setdefault(s.variable, s)
    return sorted(seen.values(), key=lambda s: order.get(s.variable, len(order)))


# ---------------------------------------------------------------------------
# Queries and the recursive fuzzy predictor.


@dataclass(frozen=True)
class PatientQuery:
    """What is known about one patient: categorical statements, raw
    measurements for fuzzy-bound variables, and the class being asked about."""

    statements: tuple[Statement, ...]
    raw_values: Mapping[str, float] = field(default_factory=dict)
    target_class: int = 1

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))
        raws = {k: float(v) for k, v in dict(self.raw_values).items()}
        for k, v in raws.items():
            if not math.isfinite(v):
                raise QueryError(f"raw value for {k!r} must be finite, got {v!r}")
        object.__setattr__(self, "raw_values", raws)
        _check_target(self.target_class)

    def complement(self) -> "PatientQuery":
        return PatientQuery(self.statements, self.raw_values, 1 - self.target_class)


@dataclass(frozen=True)
class BranchUse:
    """One branch taken during prediction and the weight it received."""

    parent_id: int
    variable: str
    value: str
    weight: float
    mode: str  # "match" | "membership" | "uniform" | "fallback"


@dataclass(frozen=True)
class Prediction:
    probability: float
    target_class: int
    branches: tuple[BranchUse, ...]


def predict(tree: ProbabilityTree, query: PatientQuery, *, fuzzy: bool = True) -> float:
    """Probability of the query's target class; ``fuzzy=False`` ignores the
    bindings and treats every statement as a hard single-branch condition."""
    return predict_detailed(tree, query, fuzzy=fuzzy).probability


def predict_detailed(
    tree: ProbabilityTree, query: PatientQuery, *, fuzzy: bool = True
) -> Prediction:
    ordered = _schema_order(tree, query.statements, strict=True)
    for s in ordered:
        spec = tree.spec_for(s.variable)
        if s.value not in spec.values:
            raise QueryError(
                f"value {s.value!r} is not declared for {s.variable!r} "
                f"(range {list(spec.values)})"
            )
    if fuzzy:
        for s in ordered:
            if s.variable in tree.bindings and s.variable not in query.raw_values:
                raise QueryError(
                    f"{s.variable!r} is fuzzy-bound; its raw measurement is required"
                )
    view = {s.variable: s.value for s in ordered}
    trace: list[BranchUse] = []
    p = _predict(tree, tree.root, ordered, [], view, query, fuzzy, trace)
    return Prediction(probability=p, target_class=query.target_class, branches=tuple(trace))


def _predict(
    tree: ProbabilityTree,
    node: TreeNode,
    remaining: Sequence[Statement],
    confirmed: list[Statement],
    view: dict[str, str],
    query: PatientQuery,
    fuzzy: bool,
    trace: list[BranchUse],
) -> float:
    cls = query.target_class
    if node.is_leaf:
        if node.leaf_total() == 0:
            return _fallback(tree, confirmed, cls)
        return _leaf_ratio(node, cls)
    if not remaining:
        return _fallback(tree, confirmed, cls)

    branch_variable = node.children[0].variable
    first = remaining[0]
    observed = existing_children(node)

    if first.variable == branch_variable:
        binding = tree.bindings.get(branch_variable) if fuzzy else None
        if binding is not None:
            # Fuzzy branching: split mass over every sibling term by degree.
            lv = resolve_binding(binding, {**view, **{s.variable: s.value for s in confirmed}})
            degrees = term_degrees(lv, query.raw_values[branch_variable])
            by_value = {c.value: c for c in observed}
            total = 0.0
            for term, degree in degrees.items():
                child = by_value.get(term)
                if child is None:
                    # Term never observed in training: weighted fallback keeps
                    # the degree mass instead of renormalising it away.
                    total += degree * _fallback(tree, confirmed, cls)
                    trace.append(BranchUse(node.id, branch_variable, term, degree, "fallback"))
                    continue
                trace.append(BranchUse(node.id, branch_variable, term, degree, "membership"))
                total += degree * _predict(
                    tree, child, remaining[1:],
                    confirmed + [Statement(branch_variable, term)],
                    view, query, fuzzy, trace,
                )
            return total
        match = next((c for c in observed if c.value == first.value), None)
        if match is None:
            # Unseen value: condition on whatever prefix of the known
            # statements does exist and stop descending.
            return conditional_probability(
                tree, find_existing_conditions(tree, confirmed + list(remaining)), cls
            )
        trace.append(BranchUse(node.id, branch_variable, match.value, 1.0, "match"))
        return _predict(
            tree, match, remaining[1:], confirmed + [first], view, query, fuzzy, trace
        )

    # The query says nothing about this level: average the observed branches.
    weight = 1.0 / len(observed)
    total = 0.0
    for child in observed:
        trace.append(BranchUse(node.id, branch_variable, child.value, weight, "uniform"))
        total += weight * _predict(
            tree, child, remaining,
            confirmed + [Statement(branch_variable, child.value)],
            view, query, fuzzy, trace,
        )
    return total


def _fallback(tree: ProbabilityTree, confirmed: Sequence[Statement], cls: int) -> float:
    return conditional_probability(tree, find_existing_conditions(tree, confirmed), cls)


def query_from_record(
    schema,
    bindings: Mapping,
    record: Mapping[str, object],
    *,
    target_class: int = 1,
) -> PatientQuery:
    """Build a query from a data record: categorical values become statements
    directly; fuzzy-bound variables contribute both a raw measurement and the
    statement given by their hard cut. Missing entries are simply omitted, as
    is a fuzzy variable whose case selector is unavailable."""
    statements: list[Statement] = []
    raws: dict[str, float] = {}
    for var in schema:
        value = record.get(var.name)
        if value is None or value == "":
            continue
        binding = bindings.get(var.name)
        if binding is None:
            statements.append(Statement(var.name, str(value)))
            continue
        try:
            lv = resolve_binding(binding, record)
        except Exception:
            continue
        raw = float(value)
        statements.append(Statement(var.name, crisp_project(lv, raw)))
        raws[var.name] = raw
    return PatientQuery(tuple(statements), raws, target_class)
