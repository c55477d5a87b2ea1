"""Counting, hypothesis tests, multinomial modeling, fits, and stability ranking."""

from .chisq import (
    ChiSquareResult,
    NumericalError,
    PoolingError,
    PoolingSpec,
    auto_pool,
    chi_square_gof,
    chi_square_pvalue,
    gammaincc,
    parse_pooling,
)
from .multinomial import MultinomialModel, MultinomialMoments, multinomial_logpmf, multinomial_moments, multinomial_pmf
from .polyfit import PolyFit, polyfit
from .runs import RunTestResult, TiePolicy, count_runs, run_test, run_test_labels
from .stability import StabilityReport, stability_report
from .tables import (
    FrequencyTable,
    SegmentSpec,
    TableComparison,
    WindowedCounts,
    compare_tables,
    count_notes,
    default_segments,
    expected_counts,
    parse_segments,
    relative,
    scale_labels,
    windowed_counts,
)

__all__ = [
    "ChiSquareResult",
    "FrequencyTable",
    "MultinomialModel",
    "MultinomialMoments",
    "NumericalError",
    "PolyFit",
    "PoolingError",
    "PoolingSpec",
    "RunTestResult",
    "SegmentSpec",
    "StabilityReport",
    "TableComparison",
    "TiePolicy",
    "WindowedCounts",
    "auto_pool",
    "chi_square_gof",
    "chi_square_pvalue",
    "compare_tables",
    "count_notes",
    "count_runs",
    "default_segments",
    "expected_counts",
    "gammaincc",
    "multinomial_logpmf",
    "multinomial_moments",
    "multinomial_pmf",
    "parse_pooling",
    "parse_segments",
    "polyfit",
    "relative",
    "run_test",
    "run_test_labels",
    "scale_labels",
    "stability_report",
    "windowed_counts",
]
