"""Picard solver for dY = F(Y) dZ with Z a controlled rough path.

The Picard map is ``M(Y) = (Y_0 + int_0^. F(Y) dZ, F(Y) Z')``. A window of
grid cells is solved by iterating ``M`` from the center path
``H_t = Y_0 + F(Y_0) Z'_0 X_{0,t}`` until successive iterates agree in
the node sup gap plus the controlled distance. The global solve walks the
grid window by window, halving the window when iteration does not contract
and handing the terminal value over as the next initial condition.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import check_derivatives, compose
from .core import ControlledPath, fixed_point_metric, holder_norms, remainder_norms
from .errors import DriverTooRough, ShapeError, WindowTooLarge
from .integral import integral_controlled

log = logging.getLogger(__name__)

CERT_RATIO = 0.5
CERT_SLACK = 1e-9


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iters: int = 50
    tau_shrink: int = 2
    min_window_cells: int = 4
    initial_window: Optional[int] = None
    init: str = "center"
    persist: int = 3
    alpha: Optional[float] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")
        if int(self.tau_shrink) < 2:
            raise ValueError("tau_shrink must be an integer of at least 2")
        if int(self.min_window_cells) < 1:
            raise ValueError("min_window_cells must be positive")
        if self.initial_window is not None and int(self.initial_window) < 1:
            raise ValueError("initial_window must be positive")
        if self.init not in ("center", "constant"):
            raise ValueError(f"init must be 'center' or 'constant', got {self.init!r}")


@dataclass
class WindowRecord:
    start: int
    end: int
    iterations: int
    ratio: float
    residual: float
    gaps: list = field(default_factory=list)
    ball_radius: float = float("inf")
    ball_exceeded: bool = False

    def row(self):
        return (self.start, self.end, self.iterations, self.ratio, self.residual)


@dataclass
class SolveReport:
    windows: list = field(default_factory=list)
    halvings: list = field(default_factory=list)
    events: list = field(default_factory=list)
    total_picard_iters: int = 0
    success: bool = False
    residual: float = float("nan")


def _check_problem(F, Z, m):
    if Z.shape[1] != 1:
        raise ShapeError(f"driver Z must be vector valued, got shape {Z.shape}")
    if F.q != Z.shape[0]:
        raise ShapeError(f"field takes a driver in R^{F.q}, Z lives in R^{Z.shape[0]}")
    if F.p != F.m or F.m != m:
        raise ShapeError(f"field maps R^{F.m} to {F.p}x{F.q} matrices, solution lives in R^{m}")


def picard_map(F, Z, Y):
    """M(Y) = (Y_0 + int F(Y) dZ, F(Y) Z')."""
    _check_problem(F, Z, Y.shape[0])
    if Y.shape[1] != 1:
        raise ShapeError(f"solution path must be vector valued, got shape {Y.shape}")
    I = integral_controlled(compose(F, Y, check=False), Z)
    return ControlledPath(Y.base, Y.y[0] + I.y, I.yprime)


def _start_slope(F, y0, Z):
    return np.einsum("ab,bi->ai", F(y0), Z.yprime[0, :, 0, :])


def initial_center(F, Y0, Z):
    """H_t = Y_0 + F(Y_0) Z'_0 X_{0,t} with constant derivative F(Y_0) Z'_0."""
    y0 = np.atleast_1d(np.asarray(Y0, dtype=np.float64))
    _check_problem(F, Z, y0.size)
    A = _start_slope(F, y0, Z)
    R = Z.base
    y = y0 + (R.x - R.x[0]) @ A.T
    yp = np.broadcast_to(A[None, :, None, :], (R.n + 1, y0.size, 1, R.d))
    return ControlledPath(R, y[:, :, None], yp)


def constant_guess(Y0, Z):
    """Y = Y_0 with zero derivative."""
    y0 = np.atleast_1d(np.asarray(Y0, dtype=np.float64))
    R = Z.base
    y = np.broadcast_to(y0[None, :, None], (R.n + 1, y0.size, 1))
    return ControlledPath(R, y, np.zeros((R.n + 1, y0.size, 1, R.d)))


def derivative_gap(F, Z, Y):
    """max_t |Y'_t - F(Y_t) Z'_t|."""
    FY = F.eval(Y.vector())
    target = np.einsum("kab,kbi->kai", FY, Z.yprime[:, :, 0, :])
    diff = (Y.yprime[:, :, 0, :] - target).reshape(Y.n + 1, -1)
    return float(np.sqrt(np.einsum("kc,kc->k", diff, diff).max()))


def residual(F, Z, Y):
    """max(fixed-point metric between Y and M(Y), derivative identity gap)."""
    MY = picard_map(F, Z, Y)
    return max(fixed_point_metric(MY, Y), derivative_gap(F, Z, Y))


def sewing_constant(alpha):
    """Dyadic sewing constant 1 / (1 - 2^(1 - 3 alpha))."""
    return 1.0 / (1.0 - 2.0 ** (1.0 - 3.0 * alpha))


def ball_radius(F, Z):
    """2 (1 + C_a) |F|_{C_b^2} (1 + |Y'_0|)(1 + |Z'_0|)(1 + |X|_a)(1 + |Z|_{X;a}).

    ``|Y'_0|`` is bounded by ``|F|_inf |Z'_0|``. Infinite for unbounded fields.
    """
    if F.cb_norms is None:
        return float("inf")
    fb = F.cb_norm(2)
    if not np.isfinite(fb):
        return float("inf")
    zp0 = float(np.linalg.norm(Z.yprime[0]))
    yp0 = F.cb_norms[0] * zp0
    xa = holder_norms(Z.base).x_alpha
    zs = sum(remainder_norms(Z))
    return float(2 * (1 + sewing_constant(Z.alpha)) * fb * (1 + yp0) * (1 + zp0) * (1 + xa) * (1 + zs))


def _finite(Y):
    return bool(np.all(np.isfinite(Y.y)) and np.all(np.isfinite(Y.yprime)))


def solve_local(F, Z, Y0, window=None, cfg=None):
    """Fixed point of M on grid nodes ``window = (i, j)``.

    Returns the solution as a controlled path over the restricted (time
    shifted) rough path together with a :class:`WindowRecord`. Raises
    :class:`WindowTooLarge` when the gap ratio stays above 1/2 for
    ``cfg.persist`` consecutive iterations, when ``max_iters`` is reached,
    or when the iterates stop being finite.
    """
    cfg = cfg or SolveConfig()
    i, j = (0, Z.n) if window is None else (int(window[0]), int(window[1]))
    if not 0 <= i < j <= Z.n:
        raise IndexError(f"bad window ({i}, {j}) on a grid with {Z.n} cells")
    Zw = Z if (i, j) == (0, Z.n) else Z.restrict(i, j)
    if cfg.alpha is not None and Zw.alpha != cfg.alpha:
        Zw = Zw.rebase(Zw.base.with_alpha(cfg.alpha))
    y0 = np.atleast_1d(np.asarray(Y0, dtype=np.float64))
    _check_problem(F, Zw, y0.size)
    if not np.all(np.isfinite(y0)):
        raise WindowTooLarge("non-finite initial condition",
                             WindowRecord(i, j, 0, float("nan"), float("nan")))
    Y = initial_center(F, y0, Zw) if cfg.init == "center" else constant_guess(y0, Zw)
    radius = ball_radius(F, Zw)
    gaps, ratio, above = [], 0.0, 0
    rec = WindowRecord(i, j, 0, float("nan"), float("nan"), gaps, radius)
    for k in range(1, int(cfg.max_iters) + 1):
        Yn = picard_map(F, Zw, Y)
        rec.iterations = k
        if not _finite(Yn):
            raise WindowTooLarge(f"non-finite Picard iterate on window ({i}, {j})", rec)
        g = fixed_point_metric(Yn, Y)
        if not np.isfinite(g):
            raise WindowTooLarge(f"non-finite Picard gap on window ({i}, {j})", rec)
        if gaps:
            ratio = g / gaps[-1] if gaps[-1] > 0 else 0.0
        gaps.append(g)
        rec.ratio = ratio
        Y = Yn
        if np.isfinite(radius) and sum(remainder_norms(Y)) > 10 * radius:
            rec.ball_exceeded = True
        if ratio > CERT_RATIO + CERT_SLACK:
            above += 1
            if above >= cfg.persist:
                raise WindowTooLarge(
                    f"gap ratio above 1/2 for {above} iterations on window ({i}, {j})", rec)
        else:
            above = 0
            if g <= cfg.tol:
                rec.residual = residual(F, Zw, Y)
                if rec.ball_exceeded:
                    log.info("window (%d, %d): iterate left 10x the nominal ball", i, j)
                return Y, rec
    raise WindowTooLarge(f"no convergence in {cfg.max_iters} iterations on window ({i}, {j})", rec)


def _concat(Z, pieces):
    y = np.concatenate([pieces[0].y] + [p.y[1:] for p in pieces[1:]])
    yp = np.concatenate([pieces[0].yprime] + [p.yprime[1:] for p in pieces[1:]])
    return ControlledPath(Z.base, y, yp)


def solve(F, Z, Y0, cfg=None):
    """Global solution on [0, T] by stitched local solves.

    Windows start at ``cfg.initial_window`` cells (the full grid by
    default) and are divided by ``tau_shrink`` whenever a local solve
    signals that the window is too large. The last window may be shorter
    than ``min_window_cells``. Raises :class:`DriverTooRough` when a window
    would have to shrink below ``min_window_cells``.
    """
    cfg = cfg or SolveConfig()
    if cfg.alpha is not None and Z.alpha != cfg.alpha:
        Z = Z.rebase(Z.base.with_alpha(cfg.alpha))
    y0 = np.atleast_1d(np.asarray(Y0, dtype=np.float64))
    _check_problem(F, Z, y0.size)
    if F.analytic:
        check_derivatives(F, y0[None, :])
    n = Z.n
    size = n if cfg.initial_window is None else min(int(cfg.initial_window), n)
    floor = min(int(cfg.min_window_cells), n)
    report = SolveReport()
    pieces = []
    start = 0
    while start < n:
        end = min(start + size, n)
        try:
            Yw, rec = solve_local(F, Z, y0, (start, end), cfg)
        except WindowTooLarge as exc:
            rec = exc.record or WindowRecord(start, end, 0, float("nan"), float("nan"))
            report.total_picard_iters += rec.iterations
            report.halvings.append((start, end))
            report.events.append((rec, False))
            size //= int(cfg.tau_shrink)
            log.debug("window (%d, %d) too large, shrinking to %d cells", start, end, size)
            if size < floor:
                raise DriverTooRough(
                    f"window at node {start} would shrink below {floor} cells: {exc}", report) from exc
            continue
        report.windows.append(rec)
        report.events.append((rec, True))
        report.total_picard_iters += rec.iterations
        pieces.append(Yw)
        y0 = Yw.y[-1, :, 0]
        start = end
    Y = _concat(Z, pieces)
    report.success = True
    report.residual = residual(F, Z, Y)
    return Y, report


def classical_rde(F, R, Y0):
    """Explicit second-order recursion for dY = F(Y) dX on every grid cell.

    ``Y_{k+1} = Y_k + F(Y_k) dX_k + DF(Y_k)[F(Y_k)] XX_k``, written with
    plain loops and no use of the controlled-path machinery, as an
    independent reference for the ``Z = (X, id)`` pipeline.
    """
    y = np.atleast_1d(np.asarray(Y0, dtype=np.float64)).copy()
    if F.q != R.d or F.m != y.size:
        raise ShapeError("field and driver dimensions do not match")
    out = np.empty((R.n + 1, y.size))
    out[0] = y
    for k in range(R.n):
        pt = y[None, :]
        f = F.eval(pt)[0]
        df = F.deriv1(pt)[0]
        dx = R.x[k + 1] - R.x[k]
        step = f @ dx
        # DF(y)[f e_i] contracted with the cell area
        second = np.einsum("abc,ci,ib->a", df, f, R.xx[k])
        y = y + step + second
        out[k + 1] = y
    return out
