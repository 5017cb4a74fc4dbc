# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: box-window sums and the EM deconvolution loop."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs

cnp.import_array()


cdef void _window_sum(const double[::1] x, Py_ssize_t d, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double acc
    for t in range(n):
        acc = 0.0
        for i in range(-d, d + 1):
            j = t + i
            if 0 <= j < n:
                acc = acc + x[j]
        out[t] = acc


def window_sum(x, Py_ssize_t d):
    """Zero-padded sum of ``x[t-d] .. x[t+d]`` for every ``t``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.zeros(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    _window_sum(xv, d, ov)
    return out


cdef double _objective(const double[::1] f, const double[::1] blurred) noexcept nogil:
    cdef Py_ssize_t t
    cdef double acc = 0.0
    for t in range(f.shape[0]):
        if f[t] > 0.0:
            acc = acc + f[t] * log(blurred[t])
    return acc


def em_solve(f, g0, Py_ssize_t d, Py_ssize_t lo, Py_ssize_t hi,
             long max_iter, double rel_tol, bint record_trace):
    """Multiplicative EM updates for ``max sum_t f_t log(blur(g)_t)``.

    Same contract as the numpy fallback.
    """
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    g_arr = np.array(g0, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t n = fv.shape[0]
    cdef double width = 2 * d + 1
    blurred_arr = np.zeros(n, dtype=np.float64)
    ratio_arr = np.zeros(n, dtype=np.float64)
    update_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] blurred = blurred_arr
    cdef double[::1] ratio = ratio_arr
    cdef double[::1] update = update_arr
    trace_arr = np.empty(max_iter + 1 if record_trace else 0, dtype=np.float64)
    cdef double[::1] trace = trace_arr
    cdef Py_ssize_t t
    cdef long it = 0
    cdef double obj, new_obj, total, change, scale
    cdef bint converged = False

    with nogil:
        _window_sum(g, d, blurred)
        for t in range(n):
            blurred[t] = blurred[t] / width
        obj = _objective(fv, blurred)
        if record_trace:
            trace[0] = obj
        while it < max_iter:
            for t in range(n):
                if fv[t] > 0.0:
                    ratio[t] = fv[t] / blurred[t]
                else:
                    ratio[t] = 0.0
            _window_sum(ratio, d, update)
            for t in range(lo, hi):
                g[t] = g[t] * (update[t] / width)
            total = 0.0
            for t in range(n):
                total = total + g[t]
            for t in range(n):
                g[t] = g[t] / total
            _window_sum(g, d, blurred)
            for t in range(n):
                blurred[t] = blurred[t] / width
            new_obj = _objective(fv, blurred)
            it += 1
            if record_trace:
                trace[it] = new_obj
            change = fabs(new_obj - obj)
            obj = new_obj
            scale = fabs(obj)
            if scale < 1.0:
                scale = 1.0
            if change <= rel_tol * scale:
                converged = True
                break

    if record_trace:
        trace_arr = trace_arr[: it + 1].copy()
    return g_arr, obj, it, converged, trace_arr
