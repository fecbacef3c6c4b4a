"""Empirical estimation of label-uncertainty-constrained concentration of
measure and the intrinsic adversarial-robustness limits it implies."""

from ._kernels import NUMBA_ENABLED
from .dataset import Dataset, LabelSet, PointSet, SoftLabelSet, load_dataset, make_dataset, split
from .geometry import Ball, DistanceCache, Metric, Region
from .search import Placement, SearchParams, SearchState, greedy_step, reference_step, run_search
from .pipeline import SummaryReport, TrialReport, evaluate_region, repeated_trials, run_trial
from .gaussmix import GaussMixModel, analytic_concentration, gaussian_expansion
from .uncertainty import example_lu, lu_stats, region_lu

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "Dataset", "LabelSet", "PointSet", "SoftLabelSet", "load_dataset", "make_dataset", "split",
    "Ball", "DistanceCache", "Metric", "Region",
    "Placement", "SearchParams", "SearchState", "greedy_step", "reference_step", "run_search",
    "SummaryReport", "TrialReport", "evaluate_region", "repeated_trials", "run_trial",
    "GaussMixModel", "analytic_concentration", "gaussian_expansion",
    "example_lu", "lu_stats", "region_lu",
]
