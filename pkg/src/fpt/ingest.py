"""Model-spec files and CSV ingestion with exclusion accounting.

A model spec is a JSON document declaring the variable order, value ranges,
fuzzy bindings, class labels, exclusion rules, and an optional column-mapping
block translating spec names to file headers:

    {
      "variables": [{"name": "sex", "values": ["F", "M"]}, ...],
      "fuzzy": {"age50": {"raw_feature": "age", "terms": {...}, ...}},
      "class": {"column": "outcome", "positive": "malignant",
                "negative": "benign"},
      "threshold": 0.5,
      "exclusions": [{"name": "duplicate", "type": "unique",
                      "columns": ["patient_id"]}],
      "mapping": {"age": "Age (years)"}
    }

Exclusion rule types: "require" (listed columns must be non-empty), "unique"
(first occurrence of the listed column tuple wins), "in-range" (numeric column
within [min, max]), "allowed" (column value among the listed ones). Rules are
applied in declared order after a built-in malformed check, with a built-in
out-of-range check last; each excluded row is counted under exactly one rule.
Rows with missing optional values are retained but counted as flagged; a
flagged row cannot enter tree induction, only partial-query prediction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, SchemaViolation
from .fuzzy import Binding, ConditionalBinding, binding_from_json
from .tree import VariableSpec

RULE_TYPES = ("require", "unique", "in-range", "allowed")


@dataclass(frozen=True)
class ExclusionRule:
    name: str
    type: str
    columns: tuple[str, ...] = ()
    minimum: float | None = None
    maximum: float | None = None
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.type not in RULE_TYPES:
            raise ConfigError(f"exclusion rule {self.name!r}: unknown type {self.type!r}")
        if not self.columns:
            raise ConfigError(f"exclusion rule {self.name!r} names no columns")
        if self.type == "in-range" and self.minimum is None and self.maximum is None:
            raise ConfigError(f"exclusion rule {self.name!r} needs min and/or max")
        if self.type == "allowed" and not self.values:
            raise ConfigError(f"exclusion rule {self.name!r} lists no allowed values")


@dataclass(frozen=True)
class ModelSpec:
    variables: tuple[VariableSpec, ...]
    bindings: Mapping[str, Binding]
    class_column: str
    positive_label: str
    negative_label: str
    threshold: float = 0.5
    exclusions: tuple[ExclusionRule, ...] = ()
    mapping: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "bindings", dict(self.bindings))
        object.__setattr__(self, "exclusions", tuple(self.exclusions))
        object.__setattr__(self, "mapping", dict(self.mapping))

    def header_for(self, name: str) -> str:
        """CSV header carrying the named spec-level column."""
        return self.mapping.get(name, name)

    def source_columns(self) -> list[str]:
        """Spec-level column names the data file must provide."""
        out: list[str] = []
        for var in self.variables:
            binding = self.bindings.get(var.name)
            out.append(binding.raw_feature if binding else var.name)
        for binding in self.bindings.values():
            if isinstance(binding, ConditionalBinding) and binding.selector not in out:
                out.append(binding.selector)
        return out


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    retained: int
    exclusions: tuple[tuple[str, int], ...]
    flagged: int = 0

    def excluded_total(self) -> int:
        return sum(count for _, count in self.exclusions)


def _fail(path: str, message: str) -> None:
    raise ConfigError(f"{path}: {message}")


def load_spec(path: str | Path) -> ModelSpec:
    """Parse and validate a model-spec file; every error names the offending
    JSON path."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: not valid JSON ({err})") from None
    return parse_spec(doc)


def parse_spec(doc: Mapping) -> ModelSpec:
    if not isinstance(doc, Mapping):
        _fail("$", "spec must be a JSON object")

    raw_vars = doc.get("variables")
    if not isinstance(raw_vars, list) or not raw_vars:
        _fail("variables", "a non-empty list of variables is required")
    variables: list[VariableSpec] = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_vars):
        where = f"variables[{i}]"
        if not isinstance(entry, Mapping) or "name" not in entry or "values" not in entry:
            _fail(where, "each variable needs a name and a values list")
        name = str(entry["name"])
        values = entry["values"]
        if not isinstance(values, list) or len(values) < 2:
            _fail(f"{where}.values", f"{name!r} needs at least two values")
        if name in seen:
            _fail(f"{where}.name", f"duplicate variable {name!r}")
        seen.add(name)
        values = [str(v) for v in values]
        if len(set(values)) != len(values):
            _fail(f"{where}.values", f"{name!r} repeats values: {values}")
        variables.append(VariableSpec(name, tuple(values)))

    bindings: dict[str, Binding] = {}
    for name, binding_doc in dict(doc.get("fuzzy", {})).items():
        where = f"fuzzy.{name}"
        if name not in seen:
            _fail(where, f"fuzzy binding targets undeclared variable {name!r}")
        try:
            binding = binding_from_json(name, binding_doc)
        except ConfigError as err:
            _fail(where, str(err))
        declared = next(v for v in variables if v.name == name)
        if set(binding.term_labels()) != set(declared.values):
            _fail(
                where,
                f"term labels {sorted(binding.term_labels())} do not match the "
                f"declared range {sorted(declared.values)}",
            )
        if binding.raw_feature in seen:
            _fail(where, f"raw feature {binding.raw_feature!r} collides with a variable")
        bindings[name] = binding

    cls = doc.get("class")
    if not isinstance(cls, Mapping) or not cls.get("column"):
        _fail("class", "a class block with a column name is required")
    positive = str(cls.get("positive", ""))
    negative = str(cls.get("negative", ""))
    if not positive or not negative or positive == negative:
        _fail("class", "distinct positive and negative labels are required")

    threshold = float(doc.get("threshold", 0.5))
    if not (0.0 < threshold < 1.0):
        _fail("threshold", f"must lie strictly between 0 and 1, got {threshold}")

    rules: list[ExclusionRule] = []
    rule_names: set[str] = set()
    for i, entry in enumerate(doc.get("exclusions", [])):
        where = f"exclusions[{i}]"
        if not isinstance(entry, Mapping) or "type" not in entry:
            _fail(where, "each exclusion rule needs a type")
        name = str(entry.get("name") or entry["type"])
        if name in ("malformed", "unknown-class", "out-of-range"):
            _fail(where, f"rule name {name!r} is reserved for a built-in rule")
        if name in rule_names:
            _fail(where, f"duplicate rule name {name!r}")
        rule_names.add(name)
        columns = entry.get("columns") or ([entry["column"]] if entry.get("column") else [])
        try:
            rules.append(
                ExclusionRule(
                    name=name,
                    type=str(entry["type"]),
                    columns=tuple(str(c) for c in columns),
                    minimum=entry.get("min"),
                    maximum=entry.get("max"),
                    values=tuple(str(v) for v in entry.get("values", [])),
                )
            )
        except ConfigError as err:
            _fail(where, str(err))

    mapping = {str(k): str(v) for k, v in dict(doc.get("mapping", {})).items()}

    return ModelSpec(
        variables=tuple(variables),
        bindings=bindings,
        class_column=str(cls["column"]),
        positive_label=positive,
        negative_label=negative,
        threshold=threshold,
        exclusions=tuple(rules),
        mapping=mapping,
    )


def load_dataset(
    path: str | Path,
    spec: ModelSpec,
    *,
    require_class: bool = True,
    class_key: str = "class",
) -> tuple[list[dict], IngestReport]:
    """Read, type, and filter a CSV against the spec.

    Returns the retained rows (spec-level names as keys, fuzzy raw features
    parsed to floats, the class mapped to 0/1 under ``class_key``) and the
    accounting report. Retained + excluded always equals rows read.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise SchemaViolation(f"{path}: empty file, expected a header row")
        headers = set(reader.fieldnames)
        raw_rows = list(reader)
    _check_columns(spec, headers, require_class)
    return _filter_rows(spec, raw_rows, require_class=require_class, class_key=class_key)


def _check_columns(spec: ModelSpec, headers: set[str], require_class: bool) -> None:
    needed = list(spec.source_columns())
    if require_class:
        needed.append(spec.class_column)
    for rule in spec.exclusions:
        needed.extend(rule.columns)
    for name in needed:
        header = spec.header_for(name)
        if header not in headers:
            raise SchemaViolation(f"required column {header!r} is missing from the file")


def _filter_rows(
    spec: ModelSpec,
    raw_rows: Sequence[Mapping],
    *,
    require_class: bool,
    class_key: str,
) -> tuple[list[dict], IngestReport]:
    counts: dict[str, int] = {}
    order: list[str] = []

    def exclude(rule: str) -> None:
        if rule not in counts:
            counts[rule] = 0
            order.append(rule)
        counts[rule] += 1

    for rule in spec.exclusions:
        counts[rule.name] = 0
        order.append(rule.name)

    numeric_columns = {b.raw_feature for b in spec.bindings.values()}
    for rule in spec.exclusions:
        if rule.type == "in-range":
            numeric_columns.update(rule.columns)

    seen_keys: dict[str, set] = {r.name: set() for r in spec.exclusions if r.type == "unique"}
    retained: list[dict] = []
    flagged = 0

    for raw in raw_rows:
        if None in raw or any(k is None for k in raw):
            exclude("malformed")
            continue
        get = lambda name: (raw.get(spec.header_for(name)) or "").strip()

        parsed: dict[str, float] = {}
        malformed = False
        for column in sorted(numeric_columns):
            text = get(column)
            if not text:
                continue
            try:
                parsed[column] = float(text)
            except ValueError:
                malformed = True
                break
        if malformed:
            exclude("malformed")
            continue

        excluded = False
        for rule in spec.exclusions:
            if rule.type == "require":
                if any(not get(c) for c in rule.columns):
                    exclude(rule.name)
                    excluded = True
            elif rule.type == "unique":
                key = tuple(get(c) for c in rule.columns)
                if key in seen_keys[rule.name]:
                    exclude(rule.name)
                    excluded = True
                else:
                    seen_keys[rule.name].add(key)
            elif rule.type == "in-range":
                for c in rule.columns:
                    if c not in parsed:
                        continue
                    low_ok = rule.minimum is None or parsed[c] >= rule.minimum
                    high_ok = rule.maximum is None or parsed[c] <= rule.maximum
                    if not (low_ok and high_ok):
                        exclude(rule.name)
                        excluded = True
                        break
            else:  # allowed
                for c in rule.columns:
                    value = get(c)
                    if value and value not in rule.values:
                        exclude(rule.name)
                        excluded = True
                        break
            if excluded:
                break
        if excluded:
            continue

        label: int | None = None
        if require_class:
            value = get(spec.class_column)
            if value == spec.positive_label:
                label = 1
            elif value == spec.negative_label:
                label = 0
            else:
                exclude("unknown-class")
                continue

        record: dict = {}
        missing = False
        out_of_range = False
        for var in spec.variables:
            binding = spec.bindings.get(var.name)
            if binding is not None:
                source = binding.raw_feature
                if source in parsed:
                    record[var.name] = parsed[source]
                else:
                    missing = True
                continue
            value = get(var.name)
            if not value:
                missing = True
                continue
            if value not in var.values:
                out_of_range = True
                break
            record[var.name] = value
        if out_of_range:
            exclude("out-of-range")
            continue

        for binding in spec.bindings.values():
            if isinstance(binding, ConditionalBinding):
                selector_value = get(binding.selector)
                if selector_value:
                    record.setdefault(binding.selector, selector_value)

        if label is not None:
            record[class_key] = label
        if missing:
            flagged += 1
        retained.append(record)

    report = IngestReport(
        rows_read=len(raw_rows),
        retained=len(retained),
        exclusions=tuple((name, counts[name]) for name in order),
        flagged=flagged,
    )
    return retained, report


def complete_rows(rows: Sequence[Mapping], spec: ModelSpec) -> list[dict]:
    """Rows carrying a value for every schema variable (induction input)."""
    names = [v.name for v in spec.variables]
    return [dict(r) for r in rows if all(name in r for name in names)]
