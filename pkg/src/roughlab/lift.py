"""Sampled signals and their level-2 lifts.

Stochastic samples come from a counter-based Philox stream keyed by
``(seed, trial)``, so every draw is a pure function of those two numbers
and of the grid.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import Grid, RoughPath, make_grid
from .errors import GridError, ShapeError

KINDS = ("bm", "fbm", "sin", "poly", "custom-samples")
FBM_MAX_POINTS = 2 ** 13


def rng(seed, trial=0):
    """Philox generator for one (master seed, trial index) stream."""
    ss = np.random.SeedSequence(int(seed) & (2 ** 64 - 1), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SignalSpec:
    kind: str
    d: int = 1
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {KINDS}")
        if int(self.d) < 1:
            raise ValueError("signal dimension must be at least 1")
        if self.kind == "fbm":
            H = float(self.params.get("hurst", 0.5))
            if not 1.0 / 3.0 < H <= 1.0:
                raise ValueError(f"fbm Hurst parameter must lie in (1/3, 1], got {H}")


def _per_coord(value, d, name):
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if arr.size == 1:
        return np.full(d, arr[0])
    if arr.size != d:
        raise ValueError(f"{name} needs 1 or {d} entries, got {arr.size}")
    return arr


def _fbm(t, H, d, gen):
    s = t[1:]
    if H == 1.0:
        # covariance s*t has rank one: the path is a random ray
        return np.concatenate([np.zeros((1, d)), s[:, None] * gen.standard_normal(d)])
    two_h = 2.0 * H
    cov = 0.5 * (s[:, None] ** two_h + s[None, :] ** two_h
                 - np.abs(s[:, None] - s[None, :]) ** two_h)
    chol = np.linalg.cholesky(cov)
    z = gen.standard_normal((s.size, d))
    return np.concatenate([np.zeros((1, d)), chol @ z])


def sample_signal(spec, grid, trial=0):
    """Values of the signal at the grid nodes, shape (n+1, d)."""
    t = grid.times
    d = int(spec.d)
    p = spec.params
    kind = spec.kind
    if kind == "bm":
        gen = rng(spec.seed, trial)
        inc = gen.standard_normal((grid.n, d)) * np.sqrt(np.diff(t))[:, None]
        return np.concatenate([np.zeros((1, d)), np.cumsum(inc, axis=0)])
    if kind == "fbm":
        if grid.n + 1 > FBM_MAX_POINTS:
            raise GridError(f"fbm sampling is capped at {FBM_MAX_POINTS} points, grid has {grid.n + 1}")
        return _fbm(t, float(p.get("hurst", 0.5)), d, rng(spec.seed, trial))
    if kind == "sin":
        omega = _per_coord(p.get("omega", 2 * np.pi), d, "omega")
        amp = _per_coord(p.get("amplitude", 1.0), d, "amplitude")
        phase = _per_coord(p.get("phase", 0.0), d, "phase")
        return amp * np.sin(omega * t[:, None] + phase)
    if kind == "poly":
        coeffs = np.asarray(p.get("coefficients", [0.0, 1.0]), dtype=np.float64)
        if coeffs.ndim == 1:
            coeffs = np.tile(coeffs[:, None], (1, d))
        if coeffs.shape[1] != d:
            raise ValueError(f"poly coefficients need {d} columns")
        powers = t[:, None] ** np.arange(coeffs.shape[0])[None, :]
        return powers @ coeffs
    samples = np.asarray(p["samples"], dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape != (grid.n + 1, d):
        raise ShapeError(f"custom samples have shape {samples.shape}, need {(grid.n + 1, d)}")
    return samples


def _as_grid(samples, grid):
    if grid is None:
        return make_grid(1.0, len(samples) - 1)
    if len(samples) != grid.n + 1:
        raise ShapeError(f"{len(samples)} samples for a grid with {grid.n + 1} nodes")
    return grid


def _prepare(samples):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("a lift needs at least two samples")
    return x


def lift_piecewise_linear(samples, alpha, grid=None):
    """Geometric lift of the linear interpolant: cell area = dX (x) dX / 2."""
    x = _prepare(samples)
    grid = _as_grid(x, grid)
    dx = np.diff(x, axis=0)
    xx = 0.5 * dx[:, :, None] * dx[:, None, :]
    return RoughPath(grid, x, xx, alpha, geometric=True)


def lift_ito(samples, alpha, grid=None):
    """Itô lift, cell area (dX (x) dX - dt I) / 2; not geometric."""
    x = _prepare(samples)
    grid = _as_grid(x, grid)
    dx = np.diff(x, axis=0)
    dt = np.diff(grid.times)
    xx = 0.5 * (dx[:, :, None] * dx[:, None, :] - dt[:, None, None] * np.eye(x.shape[1]))
    return RoughPath(grid, x, xx, alpha, geometric=False)


def _check_factor(R, factor):
    f = int(factor)
    if f != factor or f < 1 or f & (f - 1):
        raise ValueError(f"factor must be a power of two, got {factor}")
    if R.n % f:
        raise ValueError(f"factor {f} does not divide n = {R.n}")
    return f


def _halve(R):
    x = R.x[::2]
    dx = np.diff(R.x, axis=0)
    xx = R.xx[0::2] + R.xx[1::2] + dx[0::2, :, None] * dx[1::2, None, :]
    return RoughPath(Grid(R.grid.times[::2], kind=R.grid.kind), x, xx, R.alpha, R.geometric)


def coarsen(R, factor):
    """Keep every ``factor``-th node; coarse areas are Chen-chained fine areas.

    Performed as repeated halving, so coarsening by 2 twice and by 4 once
    give bit-identical results.
    """
    f = _check_factor(R, factor)
    while f > 1:
        R = _halve(R)
        f //= 2
    return R


def relift_linear(R, factor):
    """Subsample every ``factor``-th node, interpolate linearly back onto the
    fine grid and lift piecewise-linearly (the Wong-Zakai driver)."""
    f = int(factor)
    if f != factor or f < 1 or R.n % f:
        raise ValueError(f"factor {factor} does not divide n = {R.n}")
    t = R.grid.times
    tc = t[::f]
    xc = R.x[::f]
    x = np.column_stack([np.interp(t, tc, xc[:, k]) for k in range(R.d)])
    return lift_piecewise_linear(x, R.alpha, R.grid)


def signal_path(spec, grid, alpha, trial=0, lift="geometric"):
    """Sample and lift in one step."""
    x = sample_signal(spec, grid, trial)
    if lift == "ito":
        return lift_ito(x, alpha, grid)
    return lift_piecewise_linear(x, alpha, grid)
