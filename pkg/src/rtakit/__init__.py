"""Rapid type analysis and a points-to baseline over closed-world program models."""

from .engine import AnalysisConfig, AnalysisResult, RTAEngine, analyze
from .hierarchy import Hierarchy
from .model import FieldRef, MethodRef, ModelError, ProgramModel
from .oracle import naive_least_fixpoint
from .pta import analyze_pta
from .report import DiffReport, compare
from .scheduler import run_parallel
from .store import SummaryStore
from .summary import MethodSummary, extract_summary
from .textformat import load_model, parse_model, serialize_model
from .validate import ModelViolations, validate

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "AnalysisResult",
    "DiffReport",
    "FieldRef",
    "Hierarchy",
    "MethodRef",
    "MethodSummary",
    "ModelError",
    "ModelViolations",
    "ProgramModel",
    "RTAEngine",
    "SummaryStore",
    "analyze",
    "analyze_pta",
    "compare",
    "extract_summary",
    "load_model",
    "naive_least_fixpoint",
    "parse_model",
    "run_parallel",
    "serialize_model",
    "validate",
]
