"""Basis-driven time series aggregation for LP dispatch models."""

from .aggregation import BasisGroup, BasisSet, ExactnessReport, check_exactness, group_bases, solve_aggregated
from .casestudy import CaseStudyConfig, generate_case_study, three_node_network
from .combinatorics import bell_number, enumerate_partitions, stirling2
from .dataio import InputError, load_network, load_timeseries
from .lp import ActiveSet, CyclingError, LpSolution, LpStandardForm, Status, extract_active_set, solve_lp
from .merging import ComEvaluator, Partition, com_partition, host_basis, resolve_partition
from .metrics import UndefinedMetricError, describe_basis, error_generator, error_ov, error_report
from .pipeline import Analysis, InfeasibleTimestep, analyse
from .strategies import (
    AdjacencyList, ExhaustiveCapExceeded, detect_adjacency, exhaustive_strategy,
    greedy_adjacent_strategy, greedy_strategy,
)
from .transport import Generator, Line, NetworkModel, TimestepData, build_timestep_lp

__version__ = "0.1.0"

__all__ = [
    "ActiveSet", "AdjacencyList", "Analysis", "BasisGroup", "BasisSet", "CaseStudyConfig",
    "ComEvaluator", "CyclingError", "ExactnessReport", "ExhaustiveCapExceeded", "Generator",
    "InfeasibleTimestep", "InputError", "Line", "LpSolution", "LpStandardForm", "NetworkModel",
    "Partition", "Status", "TimestepData", "UndefinedMetricError", "analyse", "bell_number",
    "build_timestep_lp", "check_exactness", "com_partition", "describe_basis", "detect_adjacency",
    "enumerate_partitions", "error_generator", "error_ov", "error_report", "exhaustive_strategy",
    "extract_active_set", "generate_case_study", "greedy_adjacent_strategy", "greedy_strategy",
    "group_bases", "host_basis", "load_network", "load_timeseries", "resolve_partition",
    "solve_aggregated", "solve_lp", "stirling2", "three_node_network",
]
