"""Optimal hedged reports under the multibin log score.

Given a belief ``F`` the best report ``G`` maximises
``sum_t p_t log(blur(G)_t)``, i.e. minimises ``KL(F || blur(G))``.  When
``F`` is itself a blur of some distribution that distribution is found by
a left-to-right recursion; otherwise multiplicative EM updates (discrete
Richardson-Lucy with a box kernel) climb the concave objective.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DidNotConverge, SupportMismatch
from .forecast import CategoricalForecast, pad_support, unpad
from .scoring import MULTIBIN_LOG, ScoreRule, blur, check_regular, expected_score

EXACT = "exact_recursion"
ITERATIVE = "iterative"

TRUNCATE_BELOW = 1e-12
BLUR_MATCH_TOL = 1e-10
# an optimised report must beat honesty by more than this to be preferred
HONESTY_MARGIN = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 10000
    rel_tol: float = 1e-12
    negativity_tol: float = 1e-9

    def __post_init__(self):
        if self.max_iterations <= 0 or self.rel_tol <= 0 or self.negativity_tol <= 0:
            raise ValueError("optimizer settings must be positive")


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True)
class HedgeResult:
    """Optimised report and diagnostics.

    ``objective`` is ``sum_t p_t log(blur(G)_t)``; the expected multibin
    score of ``g`` under the belief equals ``objective + log(2d+1)``.
    """

    g: CategoricalForecast
    method: str
    objective: float
    expected_gain: float
    iterations: int = 0
    converged: bool = True


def objective(f: CategoricalForecast, g: CategoricalForecast, d: int) -> float:
    """``sum_t f_t log(blur(g, d)_t)`` with ``0 log x = 0``."""
    if f.T != g.T:
        raise SupportMismatch(f"supports differ: T={f.T}/{g.T}")
    blurred = kernels.window_sum(g.probs, d) / (2 * d + 1)
    mask = f.probs > 0
    if np.any(blurred[mask] <= 0):
        return -math.inf
    return math.fsum(f.probs[mask] * np.log(blurred[mask]))


def kl_divergence(f: CategoricalForecast, g_blur: CategoricalForecast) -> float:
    """``KL(f || g_blur)``; ``+inf`` if ``g_blur`` misses mass that ``f`` has."""
    if f.T != g_blur.T:
        raise SupportMismatch(f"supports differ: T={f.T}/{g_blur.T}")
    p, q = f.probs, g_blur.probs
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return math.fsum(p[mask] * (np.log(p[mask]) - np.log(q[mask])))


def exact_deconvolve(
    f: CategoricalForecast, d: int, cfg: OptimizerConfig = DEFAULT_CONFIG
) -> Optional[CategoricalForecast]:
    """Distribution ``G`` with ``blur(G, d) == f``, or ``None`` if none exists.

    Uses ``g[t+d] = (2d+1) f[t] - sum(g[t-d .. t+d-1])`` scanning left to
    right with ``g[:d] = 0``.  The candidate is accepted only if it is
    nonnegative (up to ``negativity_tol``), leaves the last ``d`` bins
    empty, and re-blurs to ``f`` within 1e-10.
    """
    check_regular(f.probs, d)
    p = f.probs
    n = p.size
    width = 2 * d + 1
    tol = cfg.negativity_tol
    g = np.zeros(n)
    for t in range(n - d):
        acc = 0.0
        for i in range(-d, d):
            j = t + i
            if j >= 0:
                acc += g[j]
        v = width * p[t] - acc
        if v < -tol:
            return None
        g[t + d] = 0.0 if abs(v) <= tol else v
    if d and np.any(g[n - d :] != 0):
        return None
    total = math.fsum(g)
    if total <= 0:
        return None
    candidate = f.with_probs(g / total)
    if np.max(np.abs(blur(candidate, d).probs - p)) > BLUR_MATCH_TOL:
        return None
    return candidate


def _truncate(g: np.ndarray) -> np.ndarray:
    g = np.where(g < TRUNCATE_BELOW, 0.0, g)
    return g / math.fsum(g)


def optimize_hedged(
    f: CategoricalForecast,
    d: int,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    *,
    record_trace: bool = False,
):
    """Report maximising the expected multibin score under belief ``f``.

    ``f`` must already be padded (first and last ``d`` bins zero).  With
    ``record_trace`` the objective after every EM update is returned as a
    second value.

    Optima need not be unique; the uniform starting point and fixed update
    order make the returned one reproducible.  If the optimiser cannot beat
    the honest report by more than 1e-12, ``f`` itself is returned.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    check_regular(f.probs, d)
    rule = ScoreRule(MULTIBIN_LOG, d)
    honest = expected_score(rule, f, f)
    trace = np.empty(0)

    g = exact_deconvolve(f, d, cfg)
    if g is not None:
        result = HedgeResult(
            g=g,
            method=EXACT,
            objective=objective(f, g, d),
            expected_gain=expected_score(rule, g, f) - honest,
        )
        return (result, trace) if record_trace else result

    n = f.T
    g0 = np.zeros(n)
    g0[d : n - d] = 1.0 / (n - 2 * d)
    raw, _, iterations, converged, trace = kernels.em_solve(
        f.probs, g0, d, d, n - d, cfg.max_iterations, cfg.rel_tol, record_trace
    )
    g = f.with_probs(_truncate(raw))
    obj = objective(f, g, d)
    if not converged:
        warnings.warn(
            f"EM stopped after {iterations} iterations without meeting rel_tol={cfg.rel_tol}",
            RuntimeWarning,
            stacklevel=2,
        )
    if obj <= objective(f, f, d) + HONESTY_MARGIN:
        g, obj = f, objective(f, f, d)
    result = HedgeResult(
        g=g,
        method=ITERATIVE,
        objective=obj,
        expected_gain=expected_score(rule, g, f) - honest,
        iterations=int(iterations),
        converged=bool(converged),
    )
    return (result, trace) if record_trace else result


def hedging_gain(f: CategoricalForecast, d: int, cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """Expected multibin score gained by reporting the optimised ``G`` instead of ``f``."""
    return optimize_hedged(f, d, cfg).expected_gain


def hedge_forecast(
    f: CategoricalForecast,
    d: int,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    isolated: Sequence[int] = (),
    strict: bool = False,
) -> HedgeResult:
    """Hedge a forecast on its own bin grid.

    Pads as needed, optimises, and maps the result back to ``f``'s bins.
    Bins in ``isolated`` are scored on their own, so the optimal report
    keeps their probabilities and hedges the remaining ordered bins
    conditionally on them.  With ``strict`` a non-converged EM run raises
    :class:`DidNotConverge`.
    """
    isolated = sorted(set(int(i) for i in isolated))
    p = f.probs
    keep = np.ones(p.size, dtype=bool)
    keep[isolated] = False
    ordered_mass = math.fsum(p[keep])
    rule = ScoreRule(MULTIBIN_LOG, d)
    honest = expected_score(rule, f, f, isolated)

    if ordered_mass <= 0:
        return HedgeResult(f, EXACT, honest - math.log(2 * d + 1), 0.0)

    cond = CategoricalForecast.from_probs(p[keep] / ordered_mass)
    padded = pad_support(cond, d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        inner = optimize_hedged(padded, d, cfg)
    if not inner.converged:
        msg = f"EM did not converge in {inner.iterations} iterations"
        if strict:
            raise DidNotConverge(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    g_cond = unpad(inner.g, cond).probs

    g = p.copy()
    g[keep] = g_cond * ordered_mass
    g = f.with_probs(g / math.fsum(g))
    score = expected_score(rule, g, f, isolated)
    if score <= honest:
        g, score = f, honest
    return HedgeResult(
        g=g,
        method=inner.method,
        objective=score - math.log(2 * d + 1),
        expected_gain=score - honest,
        iterations=inner.iterations,
        converged=inner.converged,
    )
