"""Benchmark suites, oracle goldens and grading."""

from .goldens import InsufficientData, scan_golden, truth_golden
from .runner import (
    BenchReport,
    CaseVerdict,
    default_runs,
    grade,
    make_solver,
    run_bench,
    sensitivity_sweep,
    soundness,
)
from .suites import BenchCase, build_multi_suite, build_single_suite

__all__ = [
    "BenchCase",
    "BenchReport",
    "CaseVerdict",
    "InsufficientData",
    "build_multi_suite",
    "build_single_suite",
    "default_runs",
    "grade",
    "make_solver",
    "run_bench",
    "scan_golden",
    "sensitivity_sweep",
    "soundness",
    "truth_golden",
]
