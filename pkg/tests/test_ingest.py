"""Model-spec parsing and CSV ingestion with exclusion accounting."""

import csv
import json

import numpy as np
import pytest

from fpt import (
    ConditionalBinding,
    ConfigError,
    SchemaViolation,
    complete_rows,
    load_dataset,
    load_spec,
    parse_spec,
)

from conftest import CKD_SPEC, THYROID_CSV, THYROID_SPEC


def spec_doc(**overrides) -> dict:
    doc = {
        "variables": [
            {"name": "site", "values": ["L", "R"]},
            {"name": "big", "values": ["0", "1"]},
        ],
        "fuzzy": {
            "big": {
                "raw_feature": "size",
                "terms": {"1": {"shape": "rect-trapezoid", "parameters": [10, 20]}},
                "complement_term": "0",
                "crisp_cut": 20,
            }
        },
        "class": {"column": "outcome", "positive": "yes", "negative": "no"},
    }
    doc.update(overrides)
    return doc


def write_csv(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)


class TestSpecParsing:
    def test_bundled_thyroid_spec_has_six_variables_two_fuzzy(self):
        spec = load_spec(THYROID_SPEC)
        assert len(spec.variables) == 6
        assert sorted(spec.bindings) == ["age50", "large_nodule"]
        sizes = [len(v.values) for v in spec.variables]
        assert sorted(sizes) == [2, 2, 2, 2, 2, 5]

    def test_bundled_kidney_spec_has_eight_variables_six_fuzzy(self):
        spec = load_spec(CKD_SPEC)
        assert len(spec.variables) == 8
        assert len(spec.bindings) == 6
        assert isinstance(spec.bindings["anemia"], ConditionalBinding)

    def test_decreasing_breakpoints_name_the_offending_variable(self):
        doc = spec_doc()
        doc["fuzzy"]["big"]["terms"]["1"]["parameters"] = [5, 3]
        with pytest.raises(ConfigError, match="big"):
            parse_spec(doc)

    def test_binding_term_labels_must_cover_the_declared_range(self):
        doc = spec_doc()
        doc["fuzzy"]["big"]["complement_term"] = "2"
        with pytest.raises(ConfigError, match="term labels"):
            parse_spec(doc)

    def test_binding_for_an_undeclared_variable_is_rejected(self):
        doc = spec_doc()
        doc["fuzzy"]["other"] = doc["fuzzy"]["big"]
        with pytest.raises(ConfigError, match="undeclared"):
            parse_spec(doc)

    def test_raw_feature_may_not_collide_with_a_variable_name(self):
        doc = spec_doc()
        doc["fuzzy"]["big"]["raw_feature"] = "site"
        with pytest.raises(ConfigError, match="collides"):
            parse_spec(doc)

    def test_class_labels_must_be_distinct(self):
        doc = spec_doc()
        doc["class"]["negative"] = doc["class"]["positive"]
        with pytest.raises(ConfigError, match="class"):
            parse_spec(doc)

    def test_threshold_must_sit_inside_the_open_unit_interval(self):
        with pytest.raises(ConfigError, match="threshold"):
            parse_spec(spec_doc(threshold=1.0))

    def test_reserved_and_duplicate_rule_names_are_rejected(self):
        with pytest.raises(ConfigError, match="reserved"):
            parse_spec(
                spec_doc(
                    exclusions=[{"name": "malformed", "type": "require", "columns": ["site"]}]
                )
            )
        with pytest.raises(ConfigError, match="duplicate"):
            parse_spec(
                spec_doc(
                    exclusions=[
                        {"name": "r", "type": "require", "columns": ["site"]},
                        {"name": "r", "type": "require", "columns": ["size"]},
                    ]
                )
            )

    def test_duplicate_variables_and_short_ranges_are_rejected(self):
        with pytest.raises(ConfigError, match="duplicate variable"):
            parse_spec(
                spec_doc(
                    variables=[
                        {"name": "site", "values": ["L", "R"]},
                        {"name": "site", "values": ["0", "1"]},
                    ]
                )
            )
        with pytest.raises(ConfigError, match="at least two"):
            parse_spec(spec_doc(variables=[{"name": "site", "values": ["L"]}]))

    def test_errors_carry_the_json_path_of_the_offender(self):
        try:
            parse_spec(spec_doc(variables=[{"name": "site", "values": ["L"]}]))
        except ConfigError as err:
            assert "variables[0]" in str(err)


HEADER = ["pid", "site", "size", "outcome"]


class TestIngestion:
    def spec(self, **overrides):
        return parse_spec(spec_doc(**overrides))

    def test_clean_file_is_fully_retained_and_typed(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "25", "yes"], ["2", "R", "12.5", "no"]],
        )
        rows, report = load_dataset(path, self.spec())
        assert report.rows_read == 2
        assert report.retained == 2
        assert report.excluded_total() == 0
        assert rows[0] == {"site": "L", "big": 25.0, "class": 1}
        assert rows[1]["big"] == 12.5

    def test_two_rows_missing_a_required_lab_drop_under_that_rule(self, tmp_path):
        rules = [{"name": "missing-required", "type": "require", "columns": ["size"]}]
        rows_csv = [["1", "L", "25", "yes"], ["2", "R", "", "no"], ["3", "L", "11", "yes"],
                    ["4", "R", "", "yes"]] + [[str(i), "L", "15", "no"] for i in range(5, 11)]
        path = write_csv(tmp_path / "d.csv", HEADER, rows_csv)
        rows, report = load_dataset(path, self.spec(exclusions=rules))
        assert report.rows_read == 10
        assert report.retained == 8
        assert report.exclusions == (("missing-required", 2),)

    def test_duplicate_identifiers_keep_the_first_occurrence(self, tmp_path):
        rules = [{"name": "duplicate", "type": "unique", "columns": ["pid"]}]
        rows_csv = [
            ["1", "L", "25", "yes"],
            ["1", "R", "12", "no"],
            ["2", "L", "30", "yes"],
            ["2", "L", "30", "yes"],
            ["2", "R", "9", "no"],
            ["3", "L", "14", "no"],
        ]
        path = write_csv(tmp_path / "d.csv", HEADER, rows_csv)
        rows, report = load_dataset(path, self.spec(exclusions=rules))
        assert dict(report.exclusions)["duplicate"] == 3
        assert report.retained == 3
        assert rows[0]["site"] == "L" and rows[0]["big"] == 25.0

    def test_unparseable_numbers_count_as_malformed(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "twenty", "yes"], ["2", "R", "12", "no"]],
        )
        rows, report = load_dataset(path, self.spec())
        assert dict(report.exclusions) == {"malformed": 1}
        assert report.retained == 1

    def test_ragged_rows_count_as_malformed(self, tmp_path):
        raw = "pid,site,size,outcome\n1,L,25,yes\n2,R,12,no,EXTRA,EXTRA\n"
        path = tmp_path / "d.csv"
        path.write_text(raw)
        rows, report = load_dataset(str(path), self.spec())
        assert dict(report.exclusions) == {"malformed": 1}

    def test_unknown_class_labels_are_their_own_bucket(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "25", "yes"], ["2", "R", "12", "maybe"]],
        )
        rows, report = load_dataset(path, self.spec())
        assert dict(report.exclusions) == {"unknown-class": 1}

    def test_undeclared_categorical_values_are_out_of_range(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "X", "25", "yes"], ["2", "R", "12", "no"]],
        )
        rows, report = load_dataset(path, self.spec())
        assert dict(report.exclusions) == {"out-of-range": 1}

    def test_numeric_range_rule_bounds_the_lab_value(self, tmp_path):
        rules = [{"name": "implausible", "type": "in-range", "columns": ["size"],
                  "min": 0, "max": 100}]
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "250", "yes"], ["2", "R", "12", "no"], ["3", "L", "-4", "no"]],
        )
        rows, report = load_dataset(path, self.spec(exclusions=rules))
        assert dict(report.exclusions)["implausible"] == 2

    def test_allowed_rule_whitelists_column_values(self, tmp_path):
        rules = [{"name": "bad-site", "type": "allowed", "columns": ["site"],
                  "values": ["L"]}]
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "25", "yes"], ["2", "R", "12", "no"]],
        )
        rows, report = load_dataset(path, self.spec(exclusions=rules))
        assert dict(report.exclusions)["bad-site"] == 1

    def test_a_row_failing_several_rules_is_counted_exactly_once(self, tmp_path):
        rules = [
            {"name": "need-size", "type": "require", "columns": ["size"]},
            {"name": "need-site", "type": "require", "columns": ["site"]},
        ]
        # This row is missing both columns; only the first rule should claim it.
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "", "", "yes"], ["2", "R", "12", "no"]],
        )
        rows, report = load_dataset(path, self.spec(exclusions=rules))
        assert dict(report.exclusions) == {"need-size": 1, "need-site": 0}
        assert report.retained + report.excluded_total() == report.rows_read

    def test_missing_optional_values_are_retained_but_flagged(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            HEADER,
            [["1", "L", "", "yes"], ["2", "R", "12", "no"]],
        )
        rows, report = load_dataset(path, self.spec())
        assert report.retained == 2
        assert report.flagged == 1
        assert "big" not in rows[0]
        assert complete_rows(rows, self.spec()) == [{"site": "R", "big": 12.0, "class": 0}]

    def test_mapping_block_renames_file_headers(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv",
            ["pid", "Anatomical Site", "Size (mm)", "outcome"],
            [["1", "L", "25", "yes"]],
        )
        spec = self.spec(mapping={"site": "Anatomical Site", "size": "Size (mm)"})
        rows, report = load_dataset(path, spec)
        assert rows == [{"site": "L", "big": 25.0, "class": 1}]

    def test_missing_required_columns_fail_loudly(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["pid", "site", "outcome"], [["1", "L", "yes"]])
        with pytest.raises(SchemaViolation, match="size"):
            load_dataset(path, self.spec())

    def test_class_column_is_optional_for_unlabelled_prediction_data(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["pid", "site", "size"], [["1", "L", "25"]])
        rows, report = load_dataset(path, self.spec(), require_class=False)
        assert rows == [{"site": "L", "big": 25.0}]

    def test_conditional_selector_column_is_carried_on_records(self, tmp_path):
        spec = load_spec(CKD_SPEC)
        rule_columns = [c for rule in spec.exclusions for c in rule.columns]
        header = list(
            dict.fromkeys(
                [spec.header_for(c) for c in spec.source_columns()]
                + rule_columns
                + [spec.class_column]
            )
        )
        row = {
            "patient_id": "K1", "gfr_stage": "G3a", "sex": "F", "age": "61",
            "hemoglobin": "11.5", "potassium": "5.2", "urine_protein": "0.4",
            "creatinine": "115", "phosphate": "1.5",
            spec.class_column: spec.positive_label,
        }
        path = write_csv(tmp_path / "d.csv", header, [[row[h] for h in header]])
        rows, _ = load_dataset(path, spec)
        assert rows[0]["sex"] == "F"
        assert rows[0]["anemia"] == 11.5

    def test_accounting_always_balances_on_fuzzed_files(self, tmp_path):
        rng = np.random.default_rng(99)
        rules = [
            {"name": "duplicate", "type": "unique", "columns": ["pid"]},
            {"name": "need-size", "type": "require", "columns": ["size"]},
            {"name": "plausible", "type": "in-range", "columns": ["size"], "min": 0, "max": 60},
        ]
        spec = self.spec(exclusions=rules)
        for trial in range(25):
            rows_csv = []
            for i in range(int(rng.integers(1, 40))):
                pid = str(rng.integers(0, 8))
                site = str(rng.choice(["L", "R", "X", ""]))
                size = str(rng.choice(["25", "12", "-9", "990", "junk", ""]))
                outcome = str(rng.choice(["yes", "no", "maybe", ""]))
                row = [pid, site, size, outcome]
                if rng.random() < 0.1:
                    row = row + ["spill"]
                rows_csv.append(row)
            path = write_csv(tmp_path / f"f{trial}.csv", HEADER, rows_csv)
            rows, report = load_dataset(path, spec)
            assert report.retained + report.excluded_total() == report.rows_read
            assert report.retained == len(rows)

    def test_empty_file_is_a_schema_violation(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaViolation, match="header"):
            load_dataset(str(path), self.spec())

    def test_bundled_dataset_accounting(self):
        spec = load_spec(THYROID_SPEC)
        rows, report = load_dataset(THYROID_CSV, spec)
        assert report.rows_read == 401
        assert report.retained == 401
        assert report.excluded_total() == 0
        assert all(r["class"] in (0, 1) for r in rows)
