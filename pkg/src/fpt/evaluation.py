"""Bootstrap evaluation: stratified split, confusion-matrix metrics with
percentile confidence intervals, and a seeded synthetic-cohort generator.

Resampling draws from the training partition only; the test partition stays
fixed across all resamples, so the report describes held-out behaviour. Each
resample's random stream is derived from (seed, resample index), which makes
serial and parallel execution produce byte-identical reports.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, StratificationError

log = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "precision")

RESAMPLING_NOTE = "resample training partition with replacement; test partition fixed"

Record = Mapping[str, object]
Predictor = Callable[[Record], float]
ModelBuilder = Callable[[Sequence[Record]], Predictor]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ConfigError(f"confusion count {name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    """The four headline metrics; None marks an undefined (0/0) value."""

    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    precision: float | None

    def get(self, name: str) -> float | None:
        return getattr(self, name)


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """Closed-form metric arithmetic; zero denominators yield None, never 0."""

    def ratio(num: int, den: int) -> float | None:
        return num / den if den else None

    return Metrics(
        accuracy=ratio(cm.tp + cm.tn, cm.total),
        sensitivity=ratio(cm.tp, cm.tp + cm.fn),
        specificity=ratio(cm.tn, cm.tn + cm.fp),
        precision=ratio(cm.tp, cm.tp + cm.fp),
    )


def _labels(rows: Sequence[Record], class_key: str) -> list[int]:
    out = []
    for i, r in enumerate(rows):
        label = r.get(class_key)
        if label not in (0, 1):
            raise ConfigError(f"row {i}: class label must be 0 or 1, got {label!r}")
        out.append(int(label))
    return out


def stratified_split(
    rows: Sequence[Record],
    test_fraction: float,
    seed: int,
    *,
    class_key: str = "class",
) -> tuple[list[Record], list[Record]]:
    """Per-class proportional split; original row order is kept within each
    partition, and the same seed always yields the same partitions."""
    if not (0.0 < test_fraction < 1.0):
        raise ConfigError(f"test fraction must lie strictly between 0 and 1, got {test_fraction}")
    labels = _labels(rows, class_key)
    by_class: dict[int, list[int]] = {0: [], 1: []}
    for i, label in enumerate(labels):
        by_class[label].append(i)
    if not by_class[0] or not by_class[1]:
        raise StratificationError("stratified split needs both classes present")
    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label in (0, 1):
        members = np.array(by_class[label])
        take = int(round(test_fraction * len(members)))
        picked = rng.permutation(members)[:take]
        test_idx.update(int(i) for i in picked)
    train = [rows[i] for i in range(len(rows)) if i not in test_idx]
    test = [rows[i] for i in range(len(rows)) if i in test_idx]
    return train, test


def score(
    predictor: Predictor,
    rows: Sequence[Record],
    *,
    threshold: float = 0.5,
    class_key: str = "class",
) -> ConfusionMatrix:
    """Confusion matrix of thresholded positive-class probabilities."""
    tp = fp = tn = fn = 0
    for row in rows:
        truth = int(row[class_key])
        predicted = 1 if predictor(row) >= threshold else 0
        if truth == 1:
            tp += predicted
            fn += 1 - predicted
        else:
            fp += predicted
            tn += 1 - predicted
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


@dataclass(frozen=True)
class MetricSummary:
    """Mean and 2.5/97.5 percentiles over the resamples where the metric was
    defined; undefined counts how many resamples had a 0/0 denominator."""

    mean: float | None
    ci_low: float | None
    ci_high: float | None
    undefined: int = 0


@dataclass(frozen=True)
class EvaluationReport:
    model: str
    resamples: int
    seed: int
    test_fraction: float
    threshold: float
    n_train: int
    n_test: int
    redraws: int
    resampling: str
    metrics: Mapping[str, MetricSummary]

    def __post_init__(self):
        object.__setattr__(self, "metrics", dict(self.metrics))


@dataclass(frozen=True)
class ComparisonReport:
    """Two models evaluated on identical resamples, plus their paired
    per-resample metric differences (contender minus baseline)."""

    contender: str
    baseline: str
    reports: Mapping[str, EvaluationReport]
    differences: Mapping[str, MetricSummary]

    def __post_init__(self):
        object.__setattr__(self, "reports", dict(self.reports))
        object.__setattr__(self, "differences", dict(self.differences))


def _summarise(values: list[float], undefined: int) -> MetricSummary:
    if not values:
        return MetricSummary(mean=None, ci_low=None, ci_high=None, undefined=undefined)
    arr = np.asarray(values, dtype=float)
    lo, hi = np.percentile(arr, [2.5, 97.5])
    return MetricSummary(
        mean=float(arr.mean()), ci_low=float(lo), ci_high=float(hi), undefined=undefined
    )


def _one_resample(
    index: int,
    seed: int,
    train: Sequence[Record],
    train_labels: Sequence[int],
    test: Sequence[Record],
    builders: Mapping[str, ModelBuilder],
    threshold: float,
    class_key: str,
    max_redraws: int,
) -> tuple[dict[str, Metrics], int]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    n = len(train)
    redraws = 0
    while True:
        idx = rng.integers(0, n, size=n)
        drawn = {train_labels[j] for j in idx}
        if len(drawn) == 2:
            break
        redraws += 1
        log.warning("resample %d drew a single-class sample; redrawing (%d/%d)",
                    index, redraws, max_redraws)
        if redraws > max_redraws:
            raise StratificationError(
                f"resample {index} stayed single-class after {max_redraws} redraws"
            )
    sample = [train[j] for j in idx]
    results: dict[str, Metrics] = {}
    for name, build in builders.items():
        model = build(sample)
        cm = score(model, test, threshold=threshold, class_key=class_key)
        results[name] = compute_metrics(cm)
    return results, redraws


def bootstrap_compare(
    rows: Sequence[Record],
    builders: Mapping[str, ModelBuilder],
    *,
    resamples: int,
    seed: int,
    test_fraction: float = 0.2,
    threshold: float = 0.5,
    class_key: str = "class",
    parallel: bool = False,
    max_redraws: int = 25,
) -> ComparisonReport:
    """Evaluate every builder on the same B resamples. With two builders the
    first is the contender and the second the baseline for the paired
    differences; a single builder gets an empty difference table."""
    if resamples < 1:
        raise ConfigError(f"resample count must be at least 1, got {resamples}")
    if not builders:
        raise ConfigError("at least one model builder is required")
    train, test = stratified_split(rows, test_fraction, seed, class_key=class_key)
    train_labels = _labels(train, class_key)

    def job(i: int):
        return _one_resample(
            i, seed, train, train_labels, test, builders, threshold, class_key, max_redraws
        )

    if parallel:
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(job, range(resamples)))
    else:
        outcomes = [job(i) for i in range(resamples)]

    total_redraws = sum(r for _, r in outcomes)
    reports: dict[str, EvaluationReport] = {}
    for name in builders:
        summaries: dict[str, MetricSummary] = {}
        for metric in METRIC_NAMES:
            values = [m[name].get(metric) for m, _ in outcomes]
            defined = [v for v in values if v is not None]
            summaries[metric] = _summarise(defined, len(values) - len(defined))
        reports[name] = EvaluationReport(
            model=name,
            resamples=resamples,
            seed=seed,
            test_fraction=test_fraction,
            threshold=threshold,
            n_train=len(train),
            n_test=len(test),
            redraws=total_redraws,
            resampling=RESAMPLING_NOTE,
            metrics=summaries,
        )

    differences: dict[str, MetricSummary] = {}
    names = list(builders)
    contender, baseline = names[0], names[-1]
    if len(names) >= 2:
        for metric in METRIC_NAMES:
            diffs = []
            undefined = 0
            for m, _ in outcomes:
                a = m[contender].get(metric)
                b = m[baseline].get(metric)
                if a is None or b is None:
                    undefined += 1
                else:
                    diffs.append(a - b)
            differences[metric] = _summarise(diffs, undefined)
    return ComparisonReport(
        contender=contender, baseline=baseline, reports=reports, differences=differences
    )


def bootstrap_evaluate(
    rows: Sequence[Record],
    build_model: ModelBuilder,
    *,
    resamples: int,
    seed: int,
    test_fraction: float = 0.2,
    threshold: float = 0.5,
    class_key: str = "class",
    parallel: bool = False,
    max_redraws: int = 25,
    model_name: str = "model",
) -> EvaluationReport:
    comparison = bootstrap_compare(
        rows,
        {model_name: build_model},
        resamples=resamples,
        seed=seed,
        test_fraction=test_fraction,
        threshold=threshold,
        class_key=class_key,
        parallel=parallel,
        max_redraws=max_redraws,
    )
    return comparison.reports[model_name]


def _summary_to_json(s: MetricSummary) -> dict:
    return {"mean": s.mean, "ci_low": s.ci_low, "ci_high": s.ci_high, "undefined": s.undefined}


def report_to_json(report: EvaluationReport) -> dict:
    return {
        "model": report.model,
        "resamples": report.resamples,
        "seed": report.seed,
        "test_fraction": report.test_fraction,
        "threshold": report.threshold,
        "n_train": report.n_train,
        "n_test": report.n_test,
        "redraws": report.redraws,
        "resampling": report.resampling,
        "metrics": {name: _summary_to_json(s) for name, s in report.metrics.items()},
    }


def comparison_to_json(comparison: ComparisonReport) -> dict:
    return {
        "contender": comparison.contender,
        "baseline": comparison.baseline,
        "reports": {name: report_to_json(r) for name, r in comparison.reports.items()},
        "differences": {
            name: _summary_to_json(s) for name, s in comparison.differences.items()
        },
    }


def report_to_table(report: EvaluationReport) -> str:
    """Aligned text table: one metric per row with its mean and 95% CI."""

    def cell(v: float | None) -> str:
        return "undefined" if v is None else f"{v:.3f}"

    lines = [
        f"model: {report.model}   resamples: {report.resamples}   seed: {report.seed}",
        f"train: {report.n_train}   test: {report.n_test}   threshold: {report.threshold}",
        f"resampling: {report.resampling}",
        f"{'metric':<12} {'mean':>10} {'2.5%':>10} {'97.5%':>10} {'undef':>6}",
    ]
    for name in METRIC_NAMES:
        s = report.metrics[name]
        lines.append(
            f"{name:<12} {cell(s.mean):>10} {cell(s.ci_low):>10} {cell(s.ci_high):>10} "
            f"{s.undefined:>6}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Synthetic cohorts.


@dataclass(frozen=True)
class ColumnSpec:
    """One generated column: categorical with level weights, or a numeric
    draw (uniform over [a, b], or normal with mean/sd)."""

    name: str
    kind: str
    levels: tuple[str, ...] = ()
    weights: tuple[float, ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("categorical", "uniform", "normal"):
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.levels:
                raise ConfigError(f"column {self.name!r}: categorical needs levels")
            if len(self.weights) != len(self.levels):
                raise ConfigError(
                    f"column {self.name!r}: {len(self.levels)} levels but "
                    f"{len(self.weights)} weights"
                )
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise ConfigError(f"column {self.name!r}: weights must sum to 1")
            if any(w < 0 for w in self.weights):
                raise ConfigError(f"column {self.name!r}: negative weight")
        else:
            if len(self.params) != 2:
                raise ConfigError(f"column {self.name!r}: {self.kind} needs two parameters")
            if self.kind == "uniform" and self.params[0] > self.params[1]:
                raise ConfigError(f"column {self.name!r}: empty uniform range {self.params}")
            if self.kind == "normal" and self.params[1] <= 0:
                raise ConfigError(f"column {self.name!r}: normal sd must be positive")


@dataclass(frozen=True)
class CohortSpec:
    """Column distributions plus a rule giving P(class = 1 | record)."""

    columns: tuple[ColumnSpec, ...]
    positive_probability: Callable[[dict], float]
    class_key: str = "class"

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise ConfigError("cohort spec declares no columns")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError(f"cohort spec repeats column names: {names}")
        if not callable(self.positive_probability):
            raise ConfigError("cohort spec needs a callable class rule")


def generate_cohort(spec: CohortSpec, n: int, seed: int) -> list[dict]:
    """n seeded rows drawn column by column, labelled by the class rule."""
    if n < 0:
        raise ConfigError(f"cohort size must be non-negative, got {n}")
    rng = np.random.default_rng(seed)
    rows: list[dict] = []
    for _ in range(n):
        record: dict = {}
        for col in spec.columns:
            if col.kind == "categorical":
                record[col.name] = str(rng.choice(col.levels, p=col.weights))
            elif col.kind == "uniform":
                record[col.name] = float(rng.uniform(col.params[0], col.params[1]))
            else:
                record[col.name] = float(rng.normal(col.params[0], col.params[1]))
        p = float(spec.positive_probability(record))
        if not (0.0 <= p <= 1.0):
            raise ConfigError(f"class rule returned {p}, outside [0, 1]")
        record[spec.class_key] = 1 if rng.random() < p else 0
        rows.append(record)
    return rows
