"""Result reports and result-vs-result comparison."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Optional

from .engine import RESULT_SETS, AnalysisResult

REPORT_SCHEMA = "rtakit.report/1"
DIFF_SCHEMA = "rtakit.diff/1"


def round_half_up(x: float, digits: int = 0) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def percent_delta(base: float, other: float) -> Optional[int]:
    """Relative change from ``base`` to ``other`` in whole percent; None when base is zero."""
    if base == 0:
        return None
    return int(round_half_up((other - base) / base * 100))


def element_classes(result: AnalysisResult) -> dict[str, frozenset[str]]:
    return {
        "methods": frozenset(map(str, result.reachable_methods)),
        "types": frozenset(result.instantiated_types),
        "fields": frozenset(map(str, result.read_fields | result.written_fields)),
    }


@dataclass
class ClassDiff:
    count_a: int
    count_b: int
    only_in_a: list[str]
    only_in_b: list[str]
    percent_delta: Optional[int]


@dataclass
class DiffReport:
    label_a: str
    label_b: str
    classes: dict[str, ClassDiff]
    timings: dict[str, dict[str, float]] = field(default_factory=dict)
    time_percent_delta: Optional[int] = None

    def is_empty(self) -> bool:
        return all(not d.only_in_a and not d.only_in_b for d in self.classes.values())

    def to_json(self) -> dict[str, Any]:
        return {"schema": DIFF_SCHEMA, **asdict(self)}

    def to_text(self) -> str:
        a, b = self.label_a, self.label_b
        lines = [f"{'':8} {a:>10} {b:>10} {'delta':>8}"]
        for name, d in self.classes.items():
            pct = "n/a" if d.percent_delta is None else f"{d.percent_delta:+d}%"
            lines.append(f"{name:8} {d.count_a:>10} {d.count_b:>10} {pct:>8}")
        if self.timings:
            ta = self.timings.get(a, {}).get("analysis")
            tb = self.timings.get(b, {}).get("analysis")
            if ta is not None and tb is not None:
                pct = "n/a" if self.time_percent_delta is None else f"{self.time_percent_delta:+d}%"
                lines.append(f"{'time[ms]':8} {ta * 1000:>10.1f} {tb * 1000:>10.1f} {pct:>8}")
        for name, d in self.classes.items():
            for item in d.only_in_a:
                lines.append(f"only in {a}: {name[:-1]} {item}")
            for item in d.only_in_b:
                lines.append(f"only in {b}: {name[:-1]} {item}")
        return "\n".join(lines) + "\n"


def compare(
    a: AnalysisResult,
    b: AnalysisResult,
    label_a: Optional[str] = None,
    label_b: Optional[str] = None,
    timings: Optional[dict[str, dict[str, float]]] = None,
) -> DiffReport:
    if a.model_fingerprint and b.model_fingerprint and a.model_fingerprint != b.model_fingerprint:
        raise ValueError("model mismatch: results come from different models")
    label_a = label_a or a.engine
    label_b = label_b or b.engine
    if label_a == label_b:
        label_a, label_b = f"{label_a}.a", f"{label_b}.b"
    ca, cb = element_classes(a), element_classes(b)
    classes = {}
    for name in ca:
        classes[name] = ClassDiff(
            count_a=len(ca[name]),
            count_b=len(cb[name]),
            only_in_a=sorted(ca[name] - cb[name]),
            only_in_b=sorted(cb[name] - ca[name]),
            percent_delta=percent_delta(len(ca[name]), len(cb[name])),
        )
    report = DiffReport(label_a, label_b, classes)
    if timings:
        report.timings = timings
        ta = timings.get(label_a, {}).get("analysis")
        tb = timings.get(label_b, {}).get("analysis")
        if ta is not None and tb is not None:
            # milliseconds are rounded before comparing
            report.time_percent_delta = percent_delta(round_half_up(ta * 1000), round_half_up(tb * 1000))
    return report


def result_to_json(
    result: AnalysisResult,
    model_path: Optional[str] = None,
    config: Optional[dict[str, Any]] = None,
    timings: Optional[dict[str, float]] = None,
) -> dict[str, Any]:
    d = result.diagnostics
    return {
        "schema": REPORT_SCHEMA,
        "engine": result.engine,
        "model": model_path,
        "model_fingerprint": result.model_fingerprint,
        "config": config or {},
        "counts": {name: len(getattr(result, name)) for name in RESULT_SETS},
        **{name: sorted(map(str, getattr(result, name))) for name in RESULT_SETS},
        "diagnostics": {
            "no_target": len(d.no_target),
            "reused_summaries": d.reused,
            "extracted_summaries": d.extracted,
            "extracted_methods": [str(m) for m in d.extracted_methods],
            "tasks": d.tasks,
            "emitted_summaries": d.emitted,
        },
        "timings": timings or {},
    }


def result_to_text(result: AnalysisResult, timings: Optional[dict[str, float]] = None) -> str:
    lines = [f"engine: {result.engine}"]
    for name in RESULT_SETS:
        items = sorted(map(str, getattr(result, name)))
        lines.append(f"{name.replace('_', ' ')} ({len(items)}):")
        lines.extend(f"  {item}" for item in items)
    d = result.diagnostics
    if d.reused or d.extracted:
        lines.append(f"summaries: reused {d.reused}, extracted {d.extracted}")
    if d.no_target:
        lines.append(f"unresolved virtual targets: {len(d.no_target)}")
    if timings:
        lines.append("timings: " + ", ".join(f"{k} {v * 1000:.1f} ms" for k, v in timings.items()))
    return "\n".join(lines) + "\n"


def dumps(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"
