"""Rank verification for independent Gaussians with known, unequal variances."""

__version__ = "0.1.0"

from .errors import InsufficientDataError, ParseError, RankVerifyError, SelectionEventError
from .normal import (
    log_std_normal_sf,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_sf,
    truncated_sf_ratio,
)
from .winner import (
    Observations,
    PairwiseTest,
    VerificationResult,
    pairwise_pvalue,
    verify_loser,
    verify_winner,
    z_statistic,
)
from .procedures import RankingResult, SetTestResult, rank_bottom, rank_top, topk_set_test
from .simulation import (
    RandomStream,
    Scenario,
    SimConfig,
    SimReport,
    calibrate_sigma,
    draw,
    estimate_error,
    run_inflation_grid,
)
from .naive import NaiveBoundConfig, naive_error_lower_bound, naive_error_mc, naive_pvalue
from .data_io import AnalysisReport, ingest_raw, ingest_summary
