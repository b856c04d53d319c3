"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``ROUGHLAB_PURE_PYTHON=1`` to force the fallback (used by the tests
that compare both back ends and by the benchmark).
"""

import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("ROUGHLAB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

_EMPTY = np.zeros(0)


def backends():
    """Available kernel modules by name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def _c2(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def lag_table(times, expo):
    """Inverse squared weights 1/(l*h)^(2*expo) indexed by lag, or an empty
    array when the grid is not uniform (kernels then call pow per pair)."""
    t = np.asarray(times, dtype=np.float64)
    dt = np.diff(t)
    if dt.size == 0 or dt.max() > dt.min() * (1.0 + 1e-12):
        return _EMPTY
    lags = np.arange(t.size, dtype=np.float64)
    lags[0] = 1.0
    table = ((t[-1] - t[0]) / dt.size * lags) ** (-2.0 * expo)
    table[0] = 0.0
    return table


def holder_increment(values, times, expo, impl=None):
    v = _c2(values).reshape(len(values), -1)
    t = _c2(times)
    return (impl or _impl).holder_increment(v, t, float(expo), lag_table(t, expo))


def holder_remainder(dv, yp, x, times, expo, yp2=None, x2=None, impl=None):
    n1 = len(dv)
    dv = _c2(dv).reshape(n1, -1)
    k = dv.shape[1]
    x = _c2(x).reshape(n1, -1)
    yp = _c2(yp).reshape(n1, k, x.shape[1])
    if yp2 is None:
        has2 = False
        x2 = np.zeros((n1, 1))
        yp2 = np.zeros((n1, k, 1))
    else:
        has2 = True
        x2 = _c2(x2).reshape(n1, -1)
        if x2.shape[1] != x.shape[1]:
            raise ValueError("both expansions need the same driver dimension")
        yp2 = _c2(yp2).reshape(n1, k, x2.shape[1])
    t = _c2(times)
    return (impl or _impl).holder_remainder(
        dv, yp, x, yp2, x2, has2, t, float(expo), lag_table(t, expo))


def holder_area(x, xx, times, expo, x2=None, xx2=None, impl=None):
    x = _c2(x)
    xx = _c2(xx)
    if x2 is None:
        has2 = False
        x2 = np.zeros_like(x)
        xx2 = np.zeros_like(xx)
    else:
        has2 = True
        x2 = _c2(x2)
        xx2 = _c2(xx2)
    t = _c2(times)
    return (impl or _impl).holder_area(
        x, xx, x2, xx2, has2, t, float(expo), lag_table(t, expo))


def neumaier_cumsum(terms, impl=None):
    terms = _c2(terms)
    shape = terms.shape
    flat = terms.reshape(shape[0], -1)
    out = (impl or _impl).neumaier_cumsum(flat)
    return np.asarray(out).reshape((shape[0] + 1,) + shape[1:])
