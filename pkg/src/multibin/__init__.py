"""Log and multibin log scores for categorical forecasts, and optimal hedging
against the multibin score."""

from .errors import *  # noqa: F401,F403
from .forecast import (
    BlurredForecast,
    CategoricalForecast,
    TargetSpec,
    outcome_to_bin,
    pad_support,
    validate_forecast,
)
from .hedging import (
    HedgeResult,
    OptimizerConfig,
    exact_deconvolve,
    hedge_forecast,
    hedging_gain,
    kl_divergence,
    optimize_hedged,
)
from .kernels import BACKEND
from .scoring import ScoreRule, blur, expected_score, log_score, multibin_log_score

__version__ = "0.1.0"
