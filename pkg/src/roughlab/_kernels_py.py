"""Pure numpy fallbacks for the compiled kernels in ``_kernels.pyx``.

Each scan walks the start index ``i`` in Python and vectorises over ``j``.
"""

import numpy as np


def _row_weights(t, lag, i, expo):
    if lag.shape[0] > 0:
        return lag[1:t.shape[0] - i]
    return (t[i + 1:] - t[i]) ** (-2.0 * expo)


def holder_increment(v, t, expo, lag):
    best = 0.0
    for i in range(v.shape[0] - 1):
        diff = v[i + 1:] - v[i]
        r = np.einsum("jc,jc->j", diff, diff) * _row_weights(t, lag, i, expo)
        best = max(best, float(r.max()))
    return float(np.sqrt(best))


def holder_remainder(dv, yp, x, yp2, x2, has2, t, expo, lag):
    best = 0.0
    for i in range(dv.shape[0] - 1):
        expansion = (x[i + 1:] - x[i]) @ yp[i].T
        if has2:
            expansion = expansion - (x2[i + 1:] - x2[i]) @ yp2[i].T
        val = dv[i + 1:] - dv[i] - expansion
        r = np.einsum("jc,jc->j", val, val) * _row_weights(t, lag, i, expo)
        best = max(best, float(r.max()))
    return float(np.sqrt(best))


def _row_areas(x, xx, i):
    rel = x[i:-1] - x[i]
    dx = np.diff(x[i:], axis=0)
    return np.cumsum(xx[i:] + rel[:, :, None] * dx[:, None, :], axis=0)


def holder_area(x, xx, x2, xx2, has2, t, expo, lag):
    best = 0.0
    for i in range(x.shape[0] - 1):
        a = _row_areas(x, xx, i)
        if has2:
            a = a - _row_areas(x2, xx2, i)
        r = np.einsum("jpq,jpq->j", a, a) * _row_weights(t, lag, i, expo)
        best = max(best, float(r.max()))
    return float(np.sqrt(best))


def neumaier_cumsum(terms):
    n, k = terms.shape
    out = np.zeros((n + 1, k))
    s = np.zeros(k)
    comp = np.zeros(k)
    for i in range(n):
        v = terms[i]
        tsum = s + v
        big = np.abs(s) >= np.abs(v)
        comp += np.where(big, (s - tsum) + v, (v - tsum) + s)
        s = tsum
        out[i + 1] = s + comp
    return out
