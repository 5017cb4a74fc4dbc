"""The four peak-timing beliefs used to illustrate hedging, and their solutions."""

from __future__ import annotations

from dataclasses import dataclass

from .forecast import BlurredForecast, CategoricalForecast, pad_support
from .hedging import DEFAULT_CONFIG, HedgeResult, OptimizerConfig, optimize_hedged
from .scoring import MULTIBIN_LOG, ScoreRule, blur, expected_score

D = 1

BELIEFS = {
    1: ((3, 4, 5), (1 / 3, 1 / 3, 1 / 3)),
    2: (tuple(range(1, 8)), (0, 1 / 12, 1 / 4, 1 / 3, 1 / 4, 1 / 12, 0)),
    3: (tuple(range(1, 8)), (0, 1 / 6, 1 / 6, 1 / 3, 1 / 6, 1 / 6, 0)),
    4: (tuple(range(1, 8)), (0, 0.6, 0.2, 0.125, 0.05, 0.025, 0)),
}


@dataclass(frozen=True)
class ExampleSolution:
    number: int
    f: CategoricalForecast
    g: CategoricalForecast
    f_blur: BlurredForecast
    g_blur: BlurredForecast
    score_f: float
    score_g: float
    hedge: HedgeResult


def belief(number: int) -> CategoricalForecast:
    """Belief ``number`` padded so that its first and last bins are empty."""
    weeks, probs = BELIEFS[number]
    return pad_support(CategoricalForecast.from_probs(probs, weeks), D)


def solve(number: int, cfg: OptimizerConfig = DEFAULT_CONFIG) -> ExampleSolution:
    f = belief(number)
    res = optimize_hedged(f, D, cfg)
    rule = ScoreRule(MULTIBIN_LOG, D)
    return ExampleSolution(
        number=number,
        f=f,
        g=res.g,
        f_blur=blur(f, D),
        g_blur=blur(res.g, D),
        score_f=expected_score(rule, f, f),
        score_g=expected_score(rule, res.g, f),
        hedge=res,
    )


def solve_all(cfg: OptimizerConfig = DEFAULT_CONFIG) -> list[ExampleSolution]:
    return [solve(n, cfg) for n in sorted(BELIEFS)]
