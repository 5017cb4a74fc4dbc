"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled
extension is unavailable or ``MULTIBIN_PURE_PYTHON`` is set.
"""

import numpy as np


def window_sum(x, d):
    """Zero-padded sum of ``x[t-d] .. x[t+d]`` for every ``t``.

    Terms are accumulated in the order ``i = -d .. d`` so the result is
    bitwise identical to the compiled kernel.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.zeros(n, dtype=np.float64)
    for i in range(-d, d + 1):
        if i < 0:
            if -i < n:
                out[-i:] += x[: n + i]
        elif i > 0:
            if i < n:
                out[: n - i] += x[i:]
        else:
            out += x
    return out


def _objective(f, blurred, mask):
    return float(np.dot(f[mask], np.log(blurred[mask])))


def em_solve(f, g0, d, lo, hi, max_iter, rel_tol, record_trace):
    """Multiplicative EM updates for ``max sum_t f_t log(blur(g)_t)``.

    ``g`` is confined to indices ``lo <= s < hi``.  Returns
    ``(g, objective, iterations, converged, trace)`` where ``trace`` holds
    the objective before the first update followed by one value per update
    (empty unless ``record_trace``).
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    g = np.array(g0, dtype=np.float64)
    width = 2 * d + 1
    mask = f > 0
    blurred = window_sum(g, d) / width
    obj = _objective(f, blurred, mask)
    trace = [obj] if record_trace else []
    ratio = np.zeros_like(f)
    converged = False
    it = 0
    while it < max_iter:
        ratio[mask] = f[mask] / blurred[mask]
        update = window_sum(ratio, d) / width
        g[lo:hi] *= update[lo:hi]
        g /= g.sum()
        blurred = window_sum(g, d) / width
        new_obj = _objective(f, blurred, mask)
        it += 1
        if record_trace:
            trace.append(new_obj)
        change = abs(new_obj - obj)
        obj = new_obj
        if change <= rel_tol * max(1.0, abs(obj)):
            converged = True
            break
    return g, obj, it, converged, np.asarray(trace, dtype=np.float64)
