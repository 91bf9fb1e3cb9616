"""Probability-tree structure and induction from tabular records.

Every declared value combination is materialised, so the tree below any node
is the full cross-product of the remaining variable ranges. Branches never
seen in training carry probability 0 into the branch and uniform transition
probabilities below it; their leaves hold zero counts. Traversal code that
wants only the observed part of the tree filters on per-node support.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import ConstructionError, SchemaViolation
from .fuzzy import Binding, binding_from_json, binding_to_json, crisp_project, resolve_binding


@dataclass(frozen=True)
class Statement:
    """One asserted condition: the named variable takes the given value."""

    variable: str
    value: str

    def __post_init__(self):
        if not self.variable or not str(self.value):
            raise SchemaViolation(f"empty statement component: ({self.variable!r}, {self.value!r})")
        object.__setattr__(self, "value", str(self.value))


@dataclass(frozen=True)
class VariableSpec:
    """A schema entry: variable name plus its declared values in branch order."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        values = tuple(str(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not self.name:
            raise SchemaViolation("variable name must be non-empty")
        if len(values) < 2:
            raise SchemaViolation(f"variable {self.name!r} needs at least two values, got {values}")
        if len(set(values)) != len(values):
            raise SchemaViolation(f"variable {self.name!r} repeats values: {values}")


@dataclass
class TreeNode:
    """One node: the statement on its incoming edge, the edge probability,
    and either ordered children (internal) or per-class counts (leaf).

    ``support`` is the number of training rows that reached the node; it is
    derived data, recomputed on parse rather than serialised.
    """

    id: int
    variable: str | None
    value: str | None
    probability: float
    children: list["TreeNode"] = field(default_factory=list)
    class_counts: tuple[int, int] | None = None
    support: int = field(default=0, compare=False, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaf_total(self) -> int:
        c0, c1 = self.class_counts
        return c0 + c1


@dataclass(frozen=True)
class ProbabilityTree:
    """An induced tree plus the schema and fuzzy bindings it was built from."""

    root: TreeNode
    schema: tuple[VariableSpec, ...]
    bindings: Mapping[str, Binding]
    n_rows: int
    _realisations: "tuple[Realisation, ...] | None" = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "bindings", dict(self.bindings))

    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.schema)

    def spec_for(self, name: str) -> VariableSpec | None:
        for v in self.schema:
            if v.name == name:
                return v
        return None

    def realisations(self) -> "tuple[Realisation, ...]":
        if self._realisations is None:
            object.__setattr__(self, "_realisations", tuple(_walk_realisations(self.root)))
        return self._realisations


@dataclass(frozen=True)
class Realisation:
    """A root-to-leaf path, its statements with edge probabilities, and the
    product of those probabilities."""

    path: tuple[tuple[Statement, float], ...]
    probability: float
    leaf: TreeNode

    def assignment(self) -> dict[str, str]:
        return {s.variable: s.value for s, _ in self.path}


@dataclass(frozen=True)
class TreeStats:
    rows: int
    realisations: int
    mean_rows_per_realisation: float
    nonzero_leaves: int


RowResolver = Callable[[Mapping[str, object]], object]


def _resolver_for(var: VariableSpec, bindings: Mapping[str, Binding]) -> RowResolver:
    """Maps a record to this variable's branch value (term or category)."""
    binding = bindings.get(var.name)
    if binding is None:
        return lambda record: record.get(var.name)

    def resolve(record: Mapping[str, object]):
        raw = record.get(var.name)
        if raw is None or raw == "":
            return None
        lv = resolve_binding(binding, record)
        return crisp_project(lv, float(raw))

    return resolve


def build_tree(
    rows: Sequence[Mapping[str, object]],
    schema: Sequence[VariableSpec],
    bindings: Mapping[str, Binding] | None = None,
    *,
    class_key: str = "class",
    alpha: float = 0.0,
) -> ProbabilityTree:
    """Induce the tree: transition probabilities are branch frequencies among
    the rows reaching each node, leaves tally class labels.

    Rows must be complete: a value for every schema variable (raw numerics for
    fuzzy-bound ones, projected here through each binding's hard cut) and a
    0/1 label under ``class_key``. ``alpha`` adds optional additive smoothing
    to the transition frequencies; 0 keeps them exact.
    """
    schema = tuple(schema)
    bindings = dict(bindings or {})
    if not rows:
        raise ConstructionError("cannot build a tree from an empty dataset")
    if alpha < 0:
        raise ConstructionError(f"smoothing must be non-negative, got {alpha}")

    resolvers = [_resolver_for(var, bindings) for var in schema]
    resolved: list[tuple[tuple[str, ...], int]] = []
    for i, record in enumerate(rows):
        values = []
        for var, resolver in zip(schema, resolvers):
            value = resolver(record)
            if value is None or value == "":
                raise SchemaViolation(
                    f"row {i} is missing a value for {var.name!r}", row=i, variable=var.name
                )
            value = str(value)
            if value not in var.values:
                raise SchemaViolation(
                    f"row {i}: value {value!r} of {var.name!r} is outside the declared "
                    f"range {list(var.values)}",
                    row=i,
                    variable=var.name,
                )
            values.append(value)
        label = record.get(class_key)
        if label not in (0, 1):
            raise SchemaViolation(
                f"row {i}: class label must be 0 or 1, got {label!r}", row=i, variable=class_key
            )
        resolved.append((tuple(values), int(label)))

    def grow(depth: int, members: list[tuple[tuple[str, ...], int]]) -> TreeNode:
        if depth == len(schema):
            c0 = sum(1 for _, label in members if label == 0)
            c1 = len(members) - c0
            return TreeNode(
                id=-1, variable=None, value=None, probability=0.0,
                class_counts=(c0, c1), support=len(members),
            )
        var = schema[depth]
        k = len(var.values)
        node = TreeNode(id=-1, variable=None, value=None, probability=0.0, support=len(members))
        for value in var.values:
            subset = [m for m in members if m[0][depth] == value]
            if members:
                p = (len(subset) + alpha) / (len(members) + alpha * k)
            else:
                p = 1.0 / k
            child = grow(depth + 1, subset)
            child.variable = var.name
            child.value = value
            child.probability = p
            node.children.append(child)
        return node

    root = grow(0, resolved)
    root.probability = 1.0
    _assign_ids(root)
    return ProbabilityTree(root=root, schema=schema, bindings=bindings, n_rows=len(rows))


def _assign_ids(root: TreeNode) -> None:
    queue = [root]
    next_id = 0
    while queue:
        node = queue.pop(0)
        node.id = next_id
        next_id += 1
        queue.extend(node.children)


def _walk_realisations(root: TreeNode) -> list[Realisation]:
    out: list[Realisation] = []

    def walk(node: TreeNode, path: tuple, prob: float):
        if node.is_leaf:
            out.append(Realisation(path=path, probability=prob, leaf=node))
            return
        for child in node.children:
            stmt = Statement(child.variable, child.value)
            walk(child, path + ((stmt, child.probability),), prob * child.probability)

    walk(root, (), 1.0)
    return out


def enumerate_realisations(tree: ProbabilityTree) -> list[Realisation]:
    """All root-to-leaf paths; their probabilities sum to 1."""
    return list(tree.realisations())


def tree_stats(tree: ProbabilityTree) -> TreeStats:
    realisations = tree.realisations()
    count = len(realisations)
    nonzero = sum(1 for r in realisations if r.leaf.support > 0)
    return TreeStats(
        rows=tree.n_rows,
        realisations=count,
        mean_rows_per_realisation=tree.n_rows / count,
        nonzero_leaves=nonzero,
    )


def existing_children(node: TreeNode) -> list[TreeNode]:
    """Children reached by at least one training row: the part of the tree
    that exists in the frequency sense, as opposed to the materialised shape."""
    return [c for c in node.children if c.support > 0]


def _node_to_dict(node: TreeNode) -> dict:
    out: dict = {
        "id": node.id,
        "variable": node.variable,
        "value": node.value,
        "probability": node.probability,
    }
    if node.is_leaf:
        out["class_counts"] = list(node.class_counts)
    else:
        out["children"] = [_node_to_dict(c) for c in node.children]
    return out


def _node_from_dict(doc: Mapping) -> TreeNode:
    if "class_counts" in doc:
        c0, c1 = doc["class_counts"]
        return TreeNode(
            id=int(doc["id"]),
            variable=doc["variable"],
            value=doc["value"],
            probability=float(doc["probability"]),
            class_counts=(int(c0), int(c1)),
            support=int(c0) + int(c1),
        )
    node = TreeNode(
        id=int(doc["id"]),
        variable=doc["variable"],
        value=doc["value"],
        probability=float(doc["probability"]),
        children=[_node_from_dict(c) for c in doc["children"]],
    )
    node.support = sum(c.support for c in node.children)
    return node


def tree_to_document(tree: ProbabilityTree) -> dict:
    return {
        "format": "probability-tree",
        "version": 1,
        "rows": tree.n_rows,
        "schema": [{"name": v.name, "values": list(v.values)} for v in tree.schema],
        "bindings": {name: binding_to_json(b) for name, b in tree.bindings.items()},
        "root": _node_to_dict(tree.root),
    }


def tree_from_document(doc: Mapping) -> ProbabilityTree:
    schema = tuple(VariableSpec(v["name"], tuple(v["values"])) for v in doc["schema"])
    bindings = {name: binding_from_json(name, b) for name, b in doc.get("bindings", {}).items()}
    return ProbabilityTree(
        root=_node_from_dict(doc["root"]),
        schema=schema,
        bindings=bindings,
        n_rows=int(doc["rows"]),
    )


def tree_to_json(tree: ProbabilityTree, *, indent: int | None = 2) -> str:
    return json.dumps(tree_to_document(tree), indent=indent, sort_keys=True)


def tree_from_json(text: str) -> ProbabilityTree:
    return tree_from_document(json.loads(text))
