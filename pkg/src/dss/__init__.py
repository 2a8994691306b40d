"""Distributed string sorting on a simulated message-passing machine."""

from .bench import ExperimentConfig, MetricsRecord, run_experiment, sweep, verify_outcomes
from .comm import CommWorld, PE, VolumeReport, spawn
from .sorters import SortConfig, SortOutcome, VARIANTS, hquick_driver, ms_sort, pdms_sort, run_variant
from .strings import StringSet, compute_lcp, distinguishing_prefixes, sort_with_lcp

__all__ = [
    "CommWorld",
    "ExperimentConfig",
    "MetricsRecord",
    "PE",
    "SortConfig",
    "SortOutcome",
    "StringSet",
    "VARIANTS",
    "VolumeReport",
    "compute_lcp",
    "distinguishing_prefixes",
    "hquick_driver",
    "ms_sort",
    "pdms_sort",
    "run_experiment",
    "run_variant",
    "sort_with_lcp",
    "spawn",
    "sweep",
    "verify_outcomes",
]
