"""Shared fixtures: the bundled demo model and small hand-built trees."""

from __future__ import annotations

import json
from importlib import resources

import pytest

from fpt import (
    PatientQuery,
    Statement,
    VariableSpec,
    build_tree,
    load_dataset,
    load_spec,
)
from fpt.cli import query_from_parts

DATA = resources.files("fpt") / "data"

THYROID_SPEC = str(DATA / "thyroid_demo.spec.json")
THYROID_CSV = str(DATA / "thyroid_demo.csv")
CKD_SPEC = str(DATA / "ckd_demo.spec.json")
DEMO_PATIENT = str(DATA / "demo_patient.json")


@pytest.fixture(scope="session")
def thyroid_spec():
    return load_spec(THYROID_SPEC)


@pytest.fixture(scope="session")
def thyroid_rows(thyroid_spec):
    rows, _ = load_dataset(THYROID_CSV, thyroid_spec)
    return rows


@pytest.fixture(scope="session")
def thyroid_tree(thyroid_spec, thyroid_rows):
    return build_tree(thyroid_rows, thyroid_spec.variables, thyroid_spec.bindings)


@pytest.fixture(scope="session")
def demo_query(thyroid_spec):
    # Built the same way the CLI and service build it: fuzzy variables get a
    # statement (projected value) alongside their raw measurement.
    doc = json.loads((DATA / "demo_patient.json").read_text())
    return query_from_parts(
        thyroid_spec,
        doc["statements"],
        doc["raw_values"],
        int(doc.get("target_class", 1)),
    )


# ---------------------------------------------------------------------------
# Tiny hand datasets.  HAND_ROWS_2/3 are small enough to count on paper; the
# expected transition frequencies appear next to each test that uses them.

BINARY_2 = (VariableSpec("x", ("0", "1")), VariableSpec("y", ("0", "1")))

HAND_ROWS_2 = [
    {"x": "0", "y": "0", "class": 0},
    {"x": "0", "y": "1", "class": 1},
    {"x": "0", "y": "1", "class": 1},
    {"x": "1", "y": "0", "class": 1},
    {"x": "1", "y": "0", "class": 0},
    {"x": "1", "y": "1", "class": 0},
]

TERNARY_3 = (
    VariableSpec("a", ("p", "q")),
    VariableSpec("b", ("u", "v")),
    VariableSpec("c", ("s", "t")),
)

HAND_ROWS_3 = [
    {"a": "p", "b": "u", "c": "s", "class": 1},
    {"a": "p", "b": "u", "c": "s", "class": 0},
    {"a": "p", "b": "u", "c": "t", "class": 1},
    {"a": "p", "b": "v", "c": "s", "class": 0},
    {"a": "q", "b": "u", "c": "t", "class": 1},
    {"a": "q", "b": "v", "c": "s", "class": 0},
    {"a": "q", "b": "v", "c": "t", "class": 1},
    {"a": "q", "b": "v", "c": "t", "class": 0},
]


@pytest.fixture
def hand_tree_2():
    return build_tree(HAND_ROWS_2, BINARY_2)


@pytest.fixture
def hand_tree_3():
    return build_tree(HAND_ROWS_3, TERNARY_3)
