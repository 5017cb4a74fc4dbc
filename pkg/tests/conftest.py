import numpy as np
import pytest

from multibin.forecast import CategoricalForecast

# acceptance criterion outcomes, printed at the end of the session
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text in sorted(ACCEPTANCE_RESULTS, key=lambda r: (r[0], r[2])):
        terminalreporter.write_line(f"[{status}] criterion {number}: {text}")


def random_padded(rng, d, t_max=40, sparsity=0.3):
    """Random forecast whose first and last ``d`` bins are empty."""
    T = int(rng.integers(2 * d + 1, max(2 * d + 2, t_max + 1)))
    m = T - 2 * d
    q = rng.dirichlet(np.ones(m))
    q[rng.random(m) < sparsity] = 0.0
    if q.sum() == 0:
        q[rng.integers(m)] = 1.0
    p = np.zeros(T)
    p[d : T - d] = q / q.sum()
    return CategoricalForecast.from_probs(p)


@pytest.fixture
def rng():
    return np.random.default_rng(20190606)


def mblogs_oracle(p, y, d):
    """Multibin log score straight from its definition, 1-based bins, zeros off the grid."""
    T = len(p)
    total = 0.0
    for i in range(-d, d + 1):
        t = y + 1 + i
        if 1 <= t <= T:
            total += p[t - 1]
    return np.log(total) if total > 0 else -np.inf


def blur_oracle(p, d):
    T = len(p)
    out = []
    for t in range(1, T + 1):
        s = sum(p[t + i - 1] for i in range(-d, d + 1) if 1 <= t + i <= T)
        out.append(s / (2 * d + 1))
    return np.array(out)


def kkt_violation(f, g, d):
    """Largest violation of the optimality conditions of max sum f log blur(g).

    For a concave objective over the simplex, ``g`` is optimal iff the
    gradient multiplier ``u_s = mean_{t in window(s)} f_t / blur(g)_t`` is
    at most 1 everywhere and equals 1 where ``g_s > 0``.
    """
    f, g = np.asarray(f, float), np.asarray(g, float)
    b = blur_oracle(g, d)
    r = np.where(f > 0, f / np.where(b > 0, b, np.inf), 0.0)
    u = blur_oracle(r, d)
    interior = np.zeros(len(f), bool)
    interior[d : len(f) - d] = True
    over = np.max(np.where(interior, u - 1.0, -np.inf))
    on_support = np.abs(u[(g > 1e-6) & interior] - 1.0)
    return max(over, on_support.max() if on_support.size else 0.0)
