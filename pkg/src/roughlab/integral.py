"""Compensated Riemann sums of one controlled path against another.

Shapes: the integrand ``Y`` takes values in L(W, U) stored as ``(u, w)``
with derivative ``(u, w, d)``; the integrator ``Z`` takes values in W
stored as ``(w, 1)`` with derivative ``(w, 1, d)``. One sum term over
``[t_p, t_q]`` is::

    Y_ab(t_p) Z_b(t_p, t_q) + Y'_abi(t_p) Z'_bj(t_p) XX_ij(t_p, t_q)

The grid-native integral sums these terms over every grid cell.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (ControlledPath, holder_norms, remainder_norms, segment_areas,
                   _check_index_pair)
from .errors import ShapeError

NOISE_FLOOR = 1e-13


def _same_base(Y, Z):
    a, b = Y.base, Z.base
    if a is b:
        return
    if not (a.grid.same_as(b.grid) and np.array_equal(a.x, b.x) and np.array_equal(a.xx, b.xx)):
        raise ShapeError("integrand and integrator are controlled by different rough paths")


def _check_shapes(Y, Z):
    _same_base(Y, Z)
    if Z.shape[1] != 1:
        raise ShapeError(f"integrator must be vector valued, got shape {Z.shape}")
    if Y.shape[1] != Z.shape[0]:
        raise ShapeError(f"integrand shape {Y.shape} does not act on integrator shape {Z.shape}")


def _terms(Y, Z, left, right, areas):
    zinc = Z.y[right, :, 0] - Z.y[left, :, 0]
    first = np.einsum("kab,kb->ka", Y.y[left], zinc)
    mixed = np.einsum("kabi,kbj->kaij", Y.yprime[left], Z.yprime[left, :, 0, :])
    second = np.einsum("kaij,kij->ka", mixed, areas)
    return first + second


def _check_nodes(nodes, n):
    nodes = np.asarray(nodes)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ValueError("a partition needs at least two nodes")
    if not np.issubdtype(nodes.dtype, np.integer):
        raise ValueError("partition nodes must be grid indices")
    if nodes[0] < 0 or nodes[-1] > n:
        raise IndexError(f"partition nodes outside 0..{n}")
    if not np.all(np.diff(nodes) > 0):
        raise ValueError("partition nodes must be strictly increasing")
    return nodes.astype(np.intp)


def sum_terms(Y, Z, nodes):
    """Per-interval terms of the compensated sum over ``nodes``, shape (m-1, u)."""
    _check_shapes(Y, Z)
    nodes = _check_nodes(nodes, Y.n)
    return _terms(Y, Z, nodes[:-1], nodes[1:], segment_areas(Y.base, nodes))


def compensated_sum(Y, Z, nodes):
    """Compensated Riemann sum over the partition given by grid indices."""
    return kernels.neumaier_cumsum(sum_terms(Y, Z, nodes))[-1]


def cell_terms(Y, Z):
    """Sum terms over every grid cell, shape (n, u)."""
    _check_shapes(Y, Z)
    left = np.arange(Y.n)
    return _terms(Y, Z, left, left + 1, Y.base.xx)


def rough_integral(Y, Z, i, j):
    """Integral of Y against Z over [t_i, t_j] on the full grid partition."""
    _check_index_pair(Y.n, i, j)
    if i == j:
        _check_shapes(Y, Z)
        return np.zeros(Y.shape[0])
    return compensated_sum(Y, Z, np.arange(i, j + 1))


def integral_controlled(Y, Z):
    """(int_0^. Y dZ, Y Z') as a controlled path over the same rough path."""
    values = kernels.neumaier_cumsum(cell_terms(Y, Z))
    deriv = np.einsum("kab,kbi->kai", Y.y, Z.yprime[:, :, 0, :])
    return ControlledPath(Y.base, values[:, :, None], deriv[:, :, None, :])


def local_expansion_error(Y, Z, i, j):
    """|int_s^t Y dZ - Y_s Z_st - Y'_s Z'_s XX_st| for s = t_i, t = t_j."""
    if not i < j:
        raise IndexError(f"need i < j, got ({i}, {j})")
    full = rough_integral(Y, Z, i, j)
    single = compensated_sum(Y, Z, np.array([i, j]))
    return float(np.linalg.norm(full - single))


@dataclass
class RateFit:
    """Least-squares fit of log(error) against log(scale).

    ``points`` are sorted by decreasing scale. Errors under the noise floor
    are dropped from the fit; with fewer than three usable points the fit
    is ``degenerate`` and ``slope`` is NaN.
    """

    points: list
    slope: float = float("nan")
    intercept: float = float("nan")
    r2: float = float("nan")
    used: int = 0
    degenerate: bool = False
    extra: dict = field(default_factory=dict)


def fit_rate(scales, errors, floor=NOISE_FLOOR):
    pts = sorted(zip(map(float, scales), map(float, errors)), key=lambda p: -p[0])
    if len(pts) < 3:
        raise ValueError("a rate fit needs at least three points")
    if any(a[0] <= b[0] for a, b in zip(pts, pts[1:])):
        raise ValueError("scales must be distinct")
    use = [(s, e) for s, e in pts if e > floor and np.isfinite(e)]
    if len(use) < 3:
        return RateFit(pts, used=len(use), degenerate=True)
    lx = np.log([s for s, _ in use])
    ly = np.log([e for _, e in use])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / tot if tot > 0 else 1.0
    return RateFit(pts, float(slope), float(intercept), float(r2), len(use))


def _check_levels(levels, n):
    levels = [int(f) for f in levels]
    if len(levels) < 3:
        raise ValueError("need at least three subsampling levels")
    for f in levels:
        if f < 1 or n % f:
            raise ValueError(f"subsampling factor {f} does not divide n = {n}")
    return levels


def mesh_convergence(Y, Z, levels):
    """Error of the every-f-th-node sum against the full-grid integral, per f."""
    levels = _check_levels(levels, Y.n)
    truth = rough_integral(Y, Z, 0, Y.n)
    t = Y.grid.times
    scales, errors = [], []
    for f in levels:
        nodes = np.arange(0, Y.n + 1, f)
        scales.append(float(np.diff(t[nodes]).max()))
        errors.append(float(np.linalg.norm(compensated_sum(Y, Z, nodes) - truth)))
    fit = fit_rate(scales, errors)
    fit.extra["levels"] = dict(zip(scales, levels))
    return fit


def local_rate(Y, Z, min_cells=2, max_cells=None):
    """Fit the local expansion error against window length over dyadic windows.

    For each window length L = min_cells, 2 min_cells, ... the error is the
    mean over the non-overlapping windows [k L, (k+1) L].
    """
    n = Y.n
    max_cells = n // 4 if max_cells is None else max_cells
    t = Y.grid.times
    scales, errors = [], []
    L = int(min_cells)
    while L <= max_cells:
        starts = np.arange(0, n - L + 1, L)
        errs = [local_expansion_error(Y, Z, s, s + L) for s in starts]
        scales.append(float(np.mean(t[starts + L] - t[starts])))
        errors.append(float(np.mean(errs)))
        L *= 2
    return fit_rate(scales, errors)


def removal_constant(Y, Z):
    """(1 + T^a + T^2a)(|Y'_0| + ||Y||)(|Z'_0| + ||Z||)(1 + ||X||_a)."""
    a = Y.alpha
    T = Y.grid.T
    rep = holder_norms(Y.base)
    ys = sum(remainder_norms(Y))
    zs = sum(remainder_norms(Z))
    return ((1 + T ** a + T ** (2 * a))
            * (np.linalg.norm(Y.yprime[0]) + ys)
            * (np.linalg.norm(Z.yprime[0]) + zs)
            * (1 + rep.x_alpha))


def removal_gap(Y, Z, nodes, pos):
    """|sum over P - sum over P without nodes[pos]| and the width t_{pos+1} - t_{pos-1}."""
    nodes = _check_nodes(nodes, Y.n)
    if not 0 < pos < nodes.size - 1:
        raise IndexError("only interior partition points can be removed")
    full = compensated_sum(Y, Z, nodes)
    less = compensated_sum(Y, Z, np.delete(nodes, pos))
    t = Y.grid.times
    return float(np.linalg.norm(full - less)), float(t[nodes[pos + 1]] - t[nodes[pos - 1]])


def classical_rough_integral(Y, R, i, j):
    """Integral of Y in L(R^d, R^u) against the rough path R itself.

    Written independently of :func:`compensated_sum`: explicit cell loop,
    cell areas read straight from ``R.xx`` and exactly rounded sums.
    """
    _check_index_pair(R.n, i, j)
    u, w = Y.shape
    if w != R.d:
        raise ShapeError(f"integrand must map R^{R.d}, got shape {Y.shape}")
    parts = [[] for _ in range(u)]
    for k in range(i, j):
        dx = R.x[k + 1] - R.x[k]
        area = R.xx[k]
        for a in range(u):
            val = float(np.dot(Y.y[k, a], dx))
            val += float(np.sum(Y.yprime[k, a] * area.T))
            parts[a].append(val)
    return np.array([math.fsum(p) for p in parts])
