"""Wall-clock timing of the analyses across engines and thread counts."""

from __future__ import annotations

import platform
import os
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

from .engine import AnalysisConfig, analyze
from .hierarchy import Hierarchy
from .model import ProgramModel, fingerprint
from .pta import analyze_pta

BENCH_SCHEMA = "rtakit.bench/1"
ENGINES = ("rta", "pta")


@dataclass
class Timing:
    engine: str
    threads: int
    runs: list[float]
    reachable_methods: int

    @property
    def mean(self) -> float:
        return statistics.fmean(self.runs)

    @property
    def stdev(self) -> float:
        return statistics.stdev(self.runs) if len(self.runs) > 1 else 0.0


@dataclass
class BenchReport:
    model_fingerprint: str
    method_count: int
    repetitions: int
    timings: list[Timing] = field(default_factory=list)

    def mean(self, engine: str, threads: int) -> float:
        for t in self.timings:
            if t.engine == engine and t.threads == threads:
                return t.mean
        raise KeyError((engine, threads))

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": BENCH_SCHEMA,
            "model_fingerprint": self.model_fingerprint,
            "method_count": self.method_count,
            "repetitions": self.repetitions,
            "machine": {
                "python": platform.python_version(),
                "implementation": platform.python_implementation(),
                "cpus": os.cpu_count(),
            },
            "timings": [
                {**asdict(t), "mean_seconds": t.mean, "stdev_seconds": t.stdev}
                for t in self.timings
            ],
        }

    def to_text(self) -> str:
        lines = [f"{'engine':6} {'threads':>7} {'mean[ms]':>10} {'stdev[ms]':>10} {'methods':>8}"]
        for t in self.timings:
            lines.append(
                f"{t.engine:6} {t.threads:>7} {t.mean * 1000:>10.1f} {t.stdev * 1000:>10.1f} {t.reachable_methods:>8}"
            )
        return "\n".join(lines) + "\n"


def time_engine(model: ProgramModel, engine: str, threads: int, hierarchy: Hierarchy | None = None) -> tuple[float, int]:
    """One analysis run; returns (analysis seconds, reachable method count)."""
    config = AnalysisConfig(threads=threads)
    start = time.perf_counter()
    if engine == "rta":
        result = analyze(model, config, hierarchy)
    elif engine == "pta":
        result, _ = analyze_pta(model, config, hierarchy)
    else:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    return time.perf_counter() - start, len(result.reachable_methods)


def bench(
    model: ProgramModel,
    engines: Iterable[str] = ENGINES,
    thread_counts: Iterable[int] = (1, 4, 8, 16),
    repetitions: int = 3,
) -> BenchReport:
    engines = list(engines)
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}; expected one of {ENGINES}")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    report = BenchReport(fingerprint(model), model.method_count(), repetitions)
    for engine in engines:
        for threads in thread_counts:
            runs, count = [], 0
            for _ in range(repetitions):
                # fresh hierarchy per run so resolution caches do not carry over
                seconds, count = time_engine(model, engine, threads, Hierarchy(model))
                runs.append(seconds)
            report.timings.append(Timing(engine, threads, runs, count))
    return report
