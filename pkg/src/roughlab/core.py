"""Grids, level-2 rough paths, controlled rough paths and their Hölder norms.

All objects live on a finite grid ``0 = t_0 < ... < t_n = T``. A rough path
stores its first level at the nodes and its second level cell by cell; the
second level between any two nodes is rebuilt with Chen's relation, so it
is consistent by construction. Hölder quantities are maxima over grid pairs.

Norms are Euclidean on vectors and Frobenius on matrices and 3-tensors.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import GridError, ShapeError

ALPHA_MIN = 1.0 / 3.0
ALPHA_MAX = 0.5


def check_alpha(alpha):
    alpha = float(alpha)
    if not ALPHA_MIN < alpha <= ALPHA_MAX:
        raise ValueError(f"alpha must lie in (1/3, 1/2], got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class Grid:
    times: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size < 2:
            raise GridError("a grid needs at least two nodes")
        if t[0] != 0.0:
            raise GridError("grid must start at 0")
        if not np.all(np.diff(t) > 0):
            raise GridError("grid times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def n(self):
        return self.times.size - 1

    @property
    def T(self):
        return float(self.times[-1])

    @cached_property
    def mesh(self):
        return float(np.diff(self.times).max())

    def same_as(self, other):
        return self is other or (
            self.times.shape == other.times.shape
            and np.array_equal(self.times, other.times))

    def sub(self, i, j):
        """Nodes i..j shifted to start at zero."""
        return Grid(self.times[i:j + 1] - self.times[i], kind=self.kind)

    def take(self, nodes):
        return Grid(self.times[np.asarray(nodes)], kind="custom")


def make_grid(T, n, kind="uniform"):
    """Uniform or dyadic grid on [0, T] with ``n`` cells.

    A dyadic grid is a uniform grid whose cell count is a power of two.

    >>> make_grid(1.0, 4).times.tolist()
    [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    if not T > 0:
        raise GridError(f"horizon T must be positive, got {T}")
    if int(n) != n or n < 1:
        raise GridError(f"cell count n must be a positive integer, got {n}")
    n = int(n)
    if kind == "dyadic":
        if n & (n - 1):
            raise GridError(f"dyadic grid needs a power-of-two cell count, got {n}")
    elif kind != "uniform":
        raise GridError(f"unknown grid kind {kind!r}")
    times = np.arange(n + 1, dtype=np.float64) * (float(T) / n)
    times[-1] = float(T)
    return Grid(times, kind=kind)


def _check_index_pair(n, i, j):
    if not (0 <= i <= n and 0 <= j <= n):
        raise IndexError(f"grid indices ({i}, {j}) outside 0..{n}")
    if i > j:
        raise IndexError(f"need i <= j, got ({i}, {j})")


@dataclass(frozen=True, eq=False)
class RoughPath:
    """First level ``x`` at the n+1 nodes and second level ``xx`` per cell.

    ``xx[k][p][q]`` is the iterated integral of X^p against X^q over cell k.
    ``geometric`` is metadata: False for Itô-type lifts.
    """

    grid: Grid
    x: np.ndarray
    xx: np.ndarray
    alpha: float
    geometric: bool = True

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        n = self.grid.n
        if x.shape[0] != n + 1:
            raise ShapeError(f"x has {x.shape[0]} rows, grid has {n + 1} nodes")
        d = x.shape[1]
        xx = np.ascontiguousarray(self.xx, dtype=np.float64).reshape(n, d, d)
        x.setflags(write=False)
        xx.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xx", xx)
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def n(self):
        return self.grid.n

    @cached_property
    def area_from_origin(self):
        """Chen-accumulated areas over [t_0, t_k] for every k (the O(1) query cache)."""
        cells = self.xx + (self.x[:-1] - self.x[0])[:, :, None] * np.diff(self.x, axis=0)[:, None, :]
        return kernels.neumaier_cumsum(cells)

    def restrict(self, i, j):
        """The rough path on nodes i..j, time-shifted to start at zero."""
        _check_index_pair(self.n, i, j)
        if j - i < 1:
            raise GridError("restriction needs at least one cell")
        return RoughPath(self.grid.sub(i, j), self.x[i:j + 1], self.xx[i:j],
                         self.alpha, self.geometric)

    def with_alpha(self, alpha):
        return RoughPath(self.grid, self.x, self.xx, alpha, self.geometric)


def chen_pair(R, i, j):
    """Increment and area of R over [t_i, t_j], chained left to right."""
    _check_index_pair(R.n, i, j)
    d = R.d
    inc = R.x[j] - R.x[i]
    if i == j:
        return inc, np.zeros((d, d))
    x = R.x[i:j + 1]
    terms = R.xx[i:j] + (x[:-1] - x[0])[:, :, None] * np.diff(x, axis=0)[:, None, :]
    # cumsum adds strictly left to right, one cell at a time
    return inc, np.cumsum(terms, axis=0)[-1]


def chen_compose(first, second):
    """Chen product of two (increment, area) pairs over adjacent intervals."""
    (a, A), (b, B) = first, second
    return a + b, A + B + np.outer(a, b)


def segment_areas(R, nodes):
    """Areas over consecutive node pairs, each chained from its own left end."""
    nodes = np.asarray(nodes, dtype=np.intp)
    starts = nodes[:-1]
    lengths = np.diff(nodes)
    owner = np.repeat(starts, lengths)
    cells = np.arange(nodes[0], nodes[-1])
    rel = R.x[cells] - R.x[owner]
    terms = R.xx[cells] + rel[:, :, None] * (R.x[cells + 1] - R.x[cells])[:, None, :]
    return np.add.reduceat(terms, starts - nodes[0], axis=0)


@dataclass(frozen=True)
class HolderReport:
    x_alpha: float
    xx_2alpha: float
    r0_2alpha: float = 0.0
    r1_alpha: float = 0.0
    seminorm: float = 0.0
    pairs_scanned: int = 0

    @property
    def rough_norm(self):
        return self.x_alpha + self.xx_2alpha


def holder_norms(R, Y=None):
    """Hölder norms of R over all grid pairs, plus Y's remainders if given."""
    if R.n < 1:
        raise GridError("degenerate grid")
    t = R.grid.times
    a = R.alpha
    xa = kernels.holder_increment(R.x, t, a)
    xxa = kernels.holder_area(R.x, R.xx, t, 2 * a)
    r0 = r1 = 0.0
    if Y is not None:
        r0, r1 = remainder_norms(Y)
    return HolderReport(xa, xxa, r0, r1, r0 + r1, R.n * (R.n + 1) // 2)


def rough_norm(R):
    """||X||_alpha + ||XX||_2alpha."""
    return holder_norms(R).rough_norm


def rough_distance(R, S):
    """||X - X~||_alpha + ||XX - XX~||_2alpha over grid pairs."""
    if not R.grid.same_as(S.grid):
        raise GridError("rough paths live on different grids")
    if R.d != S.d:
        raise ShapeError(f"dimension mismatch {R.d} vs {S.d}")
    t = R.grid.times
    a = R.alpha
    first = kernels.holder_increment(R.x - S.x, t, a)
    second = kernels.holder_area(R.x, R.xx, t, 2 * a, x2=S.x, xx2=S.xx)
    return first + second


@dataclass(frozen=True, eq=False)
class ControlledPath:
    """(Y, Y') over a rough path; values (u, w), derivatives (u, w, d)."""

    base: RoughPath
    y: np.ndarray
    yprime: np.ndarray

    def __post_init__(self):
        n1 = self.base.n + 1
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None, None]
        elif y.ndim == 2:
            y = y[:, :, None]
        if y.shape[0] != n1:
            raise ShapeError(f"y has {y.shape[0]} rows, grid has {n1} nodes")
        yp = np.ascontiguousarray(self.yprime, dtype=np.float64)
        want = y.shape + (self.base.d,)
        if yp.size != int(np.prod(want)):
            raise ShapeError(f"yprime has shape {yp.shape}, expected {want}")
        yp = yp.reshape(want)
        y.setflags(write=False)
        yp.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "yprime", yp)

    @property
    def shape(self):
        return self.y.shape[1:]

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def grid(self):
        return self.base.grid

    @property
    def n(self):
        return self.base.n

    def vector(self):
        """Values as (n+1, u) for w = 1 paths."""
        if self.shape[1] != 1:
            raise ShapeError(f"path of shape {self.shape} is not vector valued")
        return self.y[:, :, 0]

    def restrict(self, i, j):
        return ControlledPath(self.base.restrict(i, j), self.y[i:j + 1], self.yprime[i:j + 1])

    def rebase(self, base):
        return ControlledPath(base, self.y, self.yprime)


def rough_identity(R):
    """The controlled path (X, id)."""
    d = R.d
    eye = np.broadcast_to(np.eye(d)[:, None, :], (R.n + 1, d, 1, d))
    return ControlledPath(R, R.x[:, :, None], eye)


def remainders(Y, i, j):
    """R0 = Y_ij - Y'_i X_ij and R1 = Y'_ij between nodes i and j."""
    _check_index_pair(Y.n, i, j)
    xinc = Y.base.x[j] - Y.base.x[i]
    r0 = Y.y[j] - Y.y[i] - Y.yprime[i] @ xinc
    r1 = Y.yprime[j] - Y.yprime[i]
    return r0, r1


def remainder_norms(Y):
    """(||R0||_2alpha, ||R1||_alpha) over grid pairs."""
    n1 = Y.n + 1
    t = Y.grid.times
    a = Y.alpha
    r0 = kernels.holder_remainder(Y.y.reshape(n1, -1), Y.yprime.reshape(n1, -1, Y.base.d),
                                  Y.base.x, t, 2 * a)
    r1 = kernels.holder_increment(Y.yprime.reshape(n1, -1), t, a)
    return r0, r1


def controlled_seminorm(Y):
    r0, r1 = remainder_norms(Y)
    return r0 + r1


def _check_comparable(Y, Z):
    if not Y.grid.same_as(Z.grid):
        raise GridError("controlled paths live on different grids")
    if Y.shape != Z.shape:
        raise ShapeError(f"shape mismatch {Y.shape} vs {Z.shape}")
    if Y.base.alpha != Z.base.alpha:
        raise ValueError("controlled paths carry different alpha")


def controlled_distance(Y, Z):
    """||R0^Y - R0^Z||_2alpha + ||R1^Y - R1^Z||_alpha; bases may differ."""
    _check_comparable(Y, Z)
    n1 = Y.n + 1
    t = Y.grid.times
    a = Y.alpha
    dv = (Y.y - Z.y).reshape(n1, -1)
    k = dv.shape[1]
    r0 = kernels.holder_remainder(dv, Y.yprime.reshape(n1, k, -1), Y.base.x, t, 2 * a,
                                  yp2=Z.yprime.reshape(n1, k, -1), x2=Z.base.x)
    r1 = kernels.holder_increment((Y.yprime - Z.yprime).reshape(n1, -1), t, a)
    return r0 + r1


def sup_gap(Y, Z):
    """max_k |Y_k - Z_k| over nodes."""
    diff = (Y.y - Z.y).reshape(Y.n + 1, -1)
    return float(np.sqrt(np.einsum("kc,kc->k", diff, diff).max()))


def fixed_point_metric(Y, Z):
    """Node-value sup gap plus seminorm distance; the seminorm alone ignores constants."""
    return sup_gap(Y, Z) + controlled_distance(Y, Z)
