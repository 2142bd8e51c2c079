"""Score detection results against human labels, plus the ablation driver.

Two levels of evaluation: function level (did we flag the right pairs) and
inconsistency level (were the individual reported findings correct). Rates
with a zero denominator are None, never NaN. The ablation driver runs several
prompt variants over the same pairs and tabulates the metrics side by side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import jsonl
from .analysis import (
    PARSE_MALFORMED,
    VERDICT_CONSISTENT,
    VERDICT_INCONSISTENT,
    DetectionResult,
    is_under_promise,
)
from .errors import ConfigError, LabelError
from .extraction import CodeDocPair
from .llm_client import DEFAULT_CONCURRENCY, TransportMode
from .pipeline import run_detection
from .prompting import ProjectMeta, PromptVariant

PAIR_LABELS = (VERDICT_INCONSISTENT, VERDICT_CONSISTENT)
FINDING_LABELS = ("tp", "fp")


@dataclass(frozen=True)
class GroundTruthLabel:
    """Human verdict for one pair."""

    pair_id: str
    label: str

    def __post_init__(self):
        if self.label not in PAIR_LABELS:
            raise LabelError(
                f"pair {self.pair_id}: label must be one of {PAIR_LABELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class FindingLabel:
    """Human judgment of one reported finding; category text is optional."""

    finding_id: str
    label: str
    category: str = ""

    def __post_init__(self):
        if self.label not in FINDING_LABELS:
            raise LabelError(
                f"finding {self.finding_id}: label must be one of {FINDING_LABELS}, "
                f"got {self.label!r}"
            )


def load_pair_labels(path: str | Path) -> dict[str, str]:
    """Read pair labels from a JSON-lines file; duplicate pair ids are an error."""
    labels: dict[str, str] = {}
    for row in jsonl.read_records(path):
        label = GroundTruthLabel(pair_id=row["pair_id"], label=row["label"])
        if label.pair_id in labels:
            raise LabelError(f"duplicate label for pair {label.pair_id}")
        labels[label.pair_id] = label.label
    return labels


def load_finding_labels(path: str | Path) -> dict[str, FindingLabel]:
    """Read finding labels from a JSON-lines file; duplicate ids are an error."""
    labels: dict[str, FindingLabel] = {}
    for row in jsonl.read_records(path):
        label = FindingLabel(
            finding_id=row["finding_id"],
            label=row["label"],
            category=row.get("category", ""),
        )
        if label.finding_id in labels:
            raise LabelError(f"duplicate label for finding {label.finding_id}")
        labels[label.finding_id] = label
    return labels


@dataclass
class MetricsSummary:
    """Function-level confusion counts and the rates derived from them."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    evaluated: int = 0
    excluded_unlabeled: int = 0
    labels_unused: int = 0

    @property
    def precision(self) -> float | None:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float | None:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def accuracy(self) -> float | None:
        return _ratio(self.tp + self.tn, self.evaluated)

    @property
    def f1(self) -> float | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    @property
    def flag_rate(self) -> float | None:
        return _ratio(self.tp + self.fp, self.evaluated)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "evaluated": self.evaluated,
            "excluded_unlabeled": self.excluded_unlabeled,
            "labels_unused": self.labels_unused,
            "precision": _round4(self.precision),
            "recall": _round4(self.recall),
            "accuracy": _round4(self.accuracy),
            "f1": _round4(self.f1),
            "flag_rate": _round4(self.flag_rate),
        }


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


def _round4(value: float | None) -> float | None:
    return None if value is None else round(value, 4)


def compute_function_metrics(
    results: list[DetectionResult], labels: Mapping[str, str]
) -> MetricsSummary:
    """Confusion counts over labeled pairs; unlabeled results are excluded."""
    for label in labels.values():
        if label not in PAIR_LABELS:
            raise LabelError(f"label must be one of {PAIR_LABELS}, got {label!r}")
    summary = MetricsSummary()
    seen = set()
    for result in results:
        truth = labels.get(result.pair_id)
        if truth is None:
            summary.excluded_unlabeled += 1
            continue
        seen.add(result.pair_id)
        summary.evaluated += 1
        predicted_bad = result.verdict == VERDICT_INCONSISTENT
        actually_bad = truth == VERDICT_INCONSISTENT
        if predicted_bad and actually_bad:
            summary.tp += 1
        elif predicted_bad:
            summary.fp += 1
        elif actually_bad:
            summary.fn += 1
        else:
            summary.tn += 1
    summary.labels_unused = len(set(labels) - seen)
    return summary


@dataclass
class InconsistencyMetrics:
    """Finding-level counts: how many reported findings were judged correct."""

    findings: int = 0
    tp: int = 0
    fp: int = 0
    under_promise: int = 0

    @property
    def precision(self) -> float | None:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def under_promise_rate(self) -> float | None:
        return _ratio(self.under_promise, self.findings)

    def to_dict(self) -> dict:
        return {
            "findings": self.findings,
            "tp": self.tp,
            "fp": self.fp,
            "under_promise": self.under_promise,
            "precision": _round4(self.precision),
            "under_promise_rate": _round4(self.under_promise_rate),
        }


def compute_inconsistency_metrics(
    results: list[DetectionResult],
    finding_labels: Mapping[str, FindingLabel],
) -> InconsistencyMetrics:
    """Score individual findings. Every reported finding must carry a label."""
    metrics = InconsistencyMetrics()
    missing = []
    for result in results:
        for finding in result.findings:
            metrics.findings += 1
            label = finding_labels.get(finding.finding_id)
            if label is None:
                missing.append(finding.finding_id)
                continue
            if label.label == "tp":
                metrics.tp += 1
            else:
                metrics.fp += 1
            if is_under_promise(finding) or "under" in label.category.lower():
                metrics.under_promise += 1
    if missing:
        missing.sort()
        shown = ", ".join(missing[:10])
        if len(missing) > 10:
            shown += f", and {len(missing) - 10} more"
        raise LabelError(f"{len(missing)} finding(s) lack labels: {shown}")
    return metrics


def under_promise_rate(results: Iterable[DetectionResult]) -> float | None:
    """Fraction of reported findings that are under-promise, by parser category
    or the model's own type label. None when there are no findings."""
    total = 0
    under = 0
    for result in results:
        for finding in result.findings:
            total += 1
            if is_under_promise(finding):
                under += 1
    return _ratio(under, total)


def cohens_kappa(rater_a: list, rater_b: list) -> float:
    """Chance-corrected agreement between two equal-length rating sequences."""
    if len(rater_a) != len(rater_b):
        raise LabelError("rating sequences differ in length")
    n = len(rater_a)
    if n == 0:
        raise LabelError("cannot compute agreement over zero items")
    agree = sum(1 for a, b in zip(rater_a, rater_b) if a == b)
    p_o = agree / n
    categories = set(rater_a) | set(rater_b)
    p_e = sum(
        (rater_a.count(c) / n) * (rater_b.count(c) / n) for c in categories
    )
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


# ---------------------------------------------------------------------------
# Ablation

_COUNT_METRICS = ("pairs", "flagged", "malformed", "findings")
_PERCENT_METRICS = ("flag_rate", "under_promise_rate", "precision", "recall",
                    "accuracy", "finding_precision")
_RATIO_METRICS = ("f1",)


@dataclass
class AblationReport:
    """Metric table with one column per prompt variant."""

    variants: list[str]
    table: dict[str, dict[str, float | int | None]]
    results: dict[str, list[DetectionResult]] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        rounded = {
            metric: {
                v: (_round4(val) if isinstance(val, float) else val)
                for v, val in row.items()
            }
            for metric, row in self.table.items()
        }
        return {"variants": self.variants, "metrics": rounded}

    def to_text(self) -> str:
        """Fixed-width table: counts plain, rates as whole percent, f1 to 2dp."""
        def cell(metric: str, value) -> str:
            if value is None:
                return "-"
            if metric in _PERCENT_METRICS:
                return f"{round(value * 100)}%"
            if metric in _RATIO_METRICS:
                return f"{value:.2f}"
            return str(value)

        metrics = [m for m in self.table]
        name_width = max(len(m) for m in metrics) if metrics else 0
        widths = {
            v: max(len(v), max((len(cell(m, self.table[m].get(v))) for m in metrics),
                               default=0))
            for v in self.variants
        }
        lines = [
            " ".join([" " * name_width] + [v.rjust(widths[v]) for v in self.variants])
        ]
        for metric in metrics:
            row = [metric.ljust(name_width)]
            for v in self.variants:
                row.append(cell(metric, self.table[metric].get(v)).rjust(widths[v]))
            lines.append(" ".join(row))
        return "\n".join(lines)


def ablate(
    pairs: list[CodeDocPair],
    variants: list[PromptVariant],
    mode: TransportMode,
    *,
    project: ProjectMeta,
    model: str,
    fixture_dir: str | Path | None = None,
    labels: Mapping[str, str] | None = None,
    finding_labels: Mapping[str, FindingLabel] | None = None,
    concurrency: int = DEFAULT_CONCURRENCY,
) -> AblationReport:
    """Run each variant over the same pairs and tabulate the outcomes.

    Label-dependent rows appear only when the corresponding labels are given.
    """
    if not variants:
        raise ConfigError("no variants requested")

    names = [v.value for v in variants]
    table: dict[str, dict[str, float | int | None]] = {}
    all_results: dict[str, list[DetectionResult]] = {}

    def put(metric: str, variant: str, value):
        table.setdefault(metric, {})[variant] = value

    for variant in variants:
        results = run_detection(
            pairs, variant, project, model, mode,
            fixture_dir=fixture_dir, concurrency=concurrency,
        )
        all_results[variant.value] = results
        flagged = sum(1 for r in results if r.verdict == VERDICT_INCONSISTENT)
        findings = sum(len(r.findings) for r in results)
        put("pairs", variant.value, len(results))
        put("flagged", variant.value, flagged)
        put("malformed", variant.value,
            sum(1 for r in results if r.parse_status == PARSE_MALFORMED))
        put("findings", variant.value, findings)
        put("flag_rate", variant.value, _ratio(flagged, len(results)))
        put("under_promise_rate", variant.value, under_promise_rate(results))
        if labels is not None:
            summary = compute_function_metrics(results, labels)
            put("precision", variant.value, summary.precision)
            put("recall", variant.value, summary.recall)
            put("accuracy", variant.value, summary.accuracy)
            put("f1", variant.value, summary.f1)
        if finding_labels is not None:
            finding_metrics = compute_inconsistency_metrics(results, finding_labels)
            put("finding_precision", variant.value, finding_metrics.precision)

    return AblationReport(variants=names, table=table, results=all_results)


def write_ablation(path_json: str | Path, path_text: str | Path,
                   report: AblationReport) -> None:
    Path(path_json).parent.mkdir(parents=True, exist_ok=True)
    Path(path_json).write_text(
        json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    Path(path_text).write_text(report.to_text() + "\n", encoding="utf-8")
