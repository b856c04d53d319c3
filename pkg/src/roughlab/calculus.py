"""Vector fields with derivatives and their composition with controlled paths.

A :class:`VectorField` maps ``y in R^m`` to a ``p x q`` matrix (``p = m`` for
RDE fields). Evaluations are batched: ``eval`` takes ``(N, m)`` and returns
``(N, p, q)``; ``deriv1`` appends one ``m`` axis, ``deriv2`` two.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import ControlledPath, holder_norms, remainder_norms, rough_identity
from .errors import DerivativeCheckError, ShapeError

EPS = np.finfo(np.float64).eps
FD_STEP1 = EPS ** (1.0 / 3.0)
FD_STEP2 = EPS ** 0.25
CHECK_RTOL = 1e-5

_TANH_D2_MAX = 4.0 / (3.0 * np.sqrt(3.0))


@dataclass(frozen=True)
class VectorField:
    m: int
    q: int
    eval: Callable
    deriv1: Callable
    deriv2: Callable
    cb_norms: Optional[Tuple[float, float, float, float]] = None
    p: Optional[int] = None
    name: str = "field"
    analytic: bool = True

    def __post_init__(self):
        if self.p is None:
            object.__setattr__(self, "p", self.m)

    def __call__(self, y):
        return self.eval(np.atleast_2d(y))[0]

    def cb_norm(self, order):
        if self.cb_norms is None:
            raise ValueError(f"field {self.name!r} carries no C_b norms")
        return float(sum(self.cb_norms[:order + 1]))


def _frob_rows(a):
    n = a.shape[0]
    return np.sqrt(np.einsum("ki,ki->k", a.reshape(n, -1), a.reshape(n, -1)))


def check_derivatives(F, points, rtol=CHECK_RTOL):
    """Compare deriv1/deriv2 with central differences of eval/deriv1.

    Errors are normwise over all probes stacked together, relative to
    ``max(1, |analytic|)``, step ``eps^(1/3) * max(1, |y|)``. Returns the two relative errors; raises
    :class:`DerivativeCheckError` above ``rtol``.
    """
    y = np.atleast_2d(np.asarray(points, dtype=np.float64))
    N, m = y.shape
    h = FD_STEP1 * np.maximum(1.0, np.linalg.norm(y, axis=1))
    fd1 = np.empty((N, F.p, F.q, m))
    fd2 = np.empty((N, F.p, F.q, m, m))
    for c in range(m):
        e = np.zeros(m)
        e[c] = 1.0
        step = h[:, None] * e
        up, dn = y + step, y - step
        fd1[..., c] = (F.eval(up) - F.eval(dn)) / (2 * h)[:, None, None]
        fd2[..., c] = (F.deriv1(up) - F.deriv1(dn)) / (2 * h)[:, None, None, None]
    errs = []
    for fd, an in ((fd1, F.deriv1(y)), (fd2, F.deriv2(y))):
        scale = np.linalg.norm(an)
        gap = np.linalg.norm(fd - an)
        # mixed tolerance: derivatives that vanish at the probes are judged absolutely
        errs.append(gap / max(scale, 1.0))
    if max(errs) > rtol:
        raise DerivativeCheckError(
            f"field {F.name!r} fails the derivative check: relative errors {errs[0]:.2e}, {errs[1]:.2e}")
    return tuple(errs)


def _lin(L, B, y):
    return np.einsum("abc,kc->kab", L, y) + B


def constant_field(A, m=None):
    """F(y) = A."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    p, q = A.shape
    m = p if m is None else int(m)

    def ev(y):
        return np.broadcast_to(A, (len(y), p, q)).copy()

    return VectorField(m, q, ev, lambda y: np.zeros((len(y), p, q, m)),
                       lambda y: np.zeros((len(y), p, q, m, m)),
                       (float(np.linalg.norm(A)), 0.0, 0.0, 0.0), p=p, name="constant")


def linear_field(L, B=None):
    """F(y)_ab = sum_c L_abc y_c + B_ab. Unbounded, so ||F||_inf is infinite."""
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 0:
        L = L.reshape(1, 1, 1)
    p, q, m = L.shape
    B = np.zeros((p, q)) if B is None else np.asarray(B, dtype=np.float64).reshape(p, q)

    return VectorField(m, q, lambda y: _lin(L, B, y),
                       lambda y: np.broadcast_to(L, (len(y), p, q, m)).copy(),
                       lambda y: np.zeros((len(y), p, q, m, m)),
                       (np.inf, float(np.linalg.norm(L)), 0.0, 0.0), p=p, name="linear")


def rotation_field(omega=1.0):
    """F(y) = omega * J y on R^2 with a scalar driver; preserves |y|."""
    J = np.array([[0.0, -1.0], [1.0, 0.0]]) * float(omega)
    f = linear_field(J[:, None, :])
    return VectorField(2, 1, f.eval, f.deriv1, f.deriv2, f.cb_norms, p=2, name="rotation")


def tanh_field(L, B=None, scale=1.0):
    """Saturated linear field F(y) = s tanh((L y + B) / s), entrywise.

    Behaves like ``L y + B`` near the origin and is bounded by ``s``.
    """
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 0:
        L = L.reshape(1, 1, 1)
    p, q, m = L.shape
    B = np.zeros((p, q)) if B is None else np.asarray(B, dtype=np.float64).reshape(p, q)
    s = float(scale)

    def ev(y):
        return s * np.tanh(_lin(L, B, y) / s)

    def d1(y):
        th = np.tanh(_lin(L, B, y) / s)
        return (1.0 - th ** 2)[..., None] * L

    def d2(y):
        th = np.tanh(_lin(L, B, y) / s)
        g = -2.0 / s * th * (1.0 - th ** 2)
        return g[..., None, None] * L[:, :, :, None] * L[:, :, None, :]

    row = np.sum(L ** 2, axis=2)
    norms = (s * np.sqrt(p * q), float(np.linalg.norm(L)),
             _TANH_D2_MAX / s * float(np.sqrt(np.sum(row ** 2))),
             2.0 / s ** 2 * float(np.sqrt(np.sum(row ** 3))))
    return VectorField(m, q, ev, d1, d2, norms, p=p, name="tanh")


def sin_field(L, B=None):
    """F(y)_ab = sin(sum_c L_abc y_c + B_ab)."""
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 0:
        L = L.reshape(1, 1, 1)
    p, q, m = L.shape
    B = np.zeros((p, q)) if B is None else np.asarray(B, dtype=np.float64).reshape(p, q)

    def d1(y):
        return np.cos(_lin(L, B, y))[..., None] * L

    def d2(y):
        return -np.sin(_lin(L, B, y))[..., None, None] * L[:, :, :, None] * L[:, :, None, :]

    row = np.sum(L ** 2, axis=2)
    norms = (float(np.sqrt(p * q)), float(np.linalg.norm(L)),
             float(np.sqrt(np.sum(row ** 2))), float(np.sqrt(np.sum(row ** 3))))
    return VectorField(m, q, lambda y: np.sin(_lin(L, B, y)), d1, d2, norms, p=p, name="sin")


def fd_field(fn, m, q, p=None, batched=False, probe_radius=3.0, probes=256, seed=0, name="fd"):
    """Wrap an evaluation-only map; derivatives by central differences.

    ``fn`` maps a point of R^m to a ``p x q`` matrix (or a batch if
    ``batched``). C_b norms are estimated as maxima over uniform probes in
    the box ``[-probe_radius, probe_radius]^m``, so they are estimates, not
    guaranteed bounds.
    """
    p = m if p is None else p

    def ev(y):
        y = np.atleast_2d(y)
        if batched:
            out = np.asarray(fn(y), dtype=np.float64)
        else:
            out = np.stack([np.asarray(fn(row), dtype=np.float64) for row in y])
        out = out.reshape(len(y), p, q)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"field {name!r} returned non-finite values")
        return out

    def d1(y):
        y = np.atleast_2d(y)
        h = FD_STEP1 * np.maximum(1.0, np.linalg.norm(y, axis=1))
        out = np.empty((len(y), p, q, m))
        for c in range(m):
            step = np.zeros(m)
            step[c] = 1.0
            out[..., c] = (ev(y + h[:, None] * step) - ev(y - h[:, None] * step)) / (2 * h)[:, None, None]
        return out

    def d2(y):
        y = np.atleast_2d(y)
        h = FD_STEP2 * np.maximum(1.0, np.linalg.norm(y, axis=1))
        out = np.empty((len(y), p, q, m, m))
        hh = (4 * h * h)[:, None, None]
        for c in range(m):
            for e in range(m):
                sc = np.zeros(m)
                sc[c] = 1.0
                se = np.zeros(m)
                se[e] = 1.0
                hc, he = h[:, None] * sc, h[:, None] * se
                out[..., c, e] = (ev(y + hc + he) - ev(y + hc - he)
                                  - ev(y - hc + he) + ev(y - hc - he)) / hh
        return out

    gen = np.random.default_rng(seed)
    pts = gen.uniform(-probe_radius, probe_radius, size=(probes, m))
    try:
        f0, f1, f2 = (_frob_rows(g(pts)).max() for g in (ev, d1, d2))
    except Exception as exc:  # noqa: BLE001 - surfaced as a probe failure
        raise ValueError(f"field {name!r} failed at probe points: {exc}") from exc
    # third derivative from differences of the second
    h = FD_STEP2
    f3 = 0.0
    for c in range(m):
        step = np.zeros(m)
        step[c] = h
        f3 = max(f3, float(_frob_rows((d2(pts + step) - d2(pts - step)) / (2 * h)).max()))
    return VectorField(m, q, ev, d1, d2, (float(f0), float(f1), float(f2), f3), p=p, name=name,
                       analytic=False)


FIELDS = {
    "constant": lambda prm: constant_field(prm["value"], prm.get("m")),
    "linear": lambda prm: linear_field(_coef(prm), prm.get("bias")),
    "tanh": lambda prm: tanh_field(_coef(prm), prm.get("bias"), prm.get("scale", 1.0)),
    "sin": lambda prm: sin_field(_coef(prm), prm.get("bias")),
    "rotation": lambda prm: rotation_field(prm.get("omega", 1.0)),
}


def _coef(prm):
    L = np.asarray(prm.get("matrix", prm.get("lambda", 1.0)), dtype=np.float64)
    if L.ndim == 0:
        m = int(prm.get("m", 1))
        q = int(prm.get("q", 1))
        p = int(prm.get("p", m))
        if p == m and q == m:
            # scalar times the identity-like tensor L_abc = lam * delta_ac
            return float(L) * np.einsum("ac,b->abc", np.eye(m), np.ones(q))
        return np.full((p, q, m), float(L))
    return L


def build_field(name, params=None):
    """Field from the built-in library by name."""
    if name not in FIELDS:
        raise KeyError(f"unknown field {name!r}; expected one of {sorted(FIELDS)}")
    return FIELDS[name](params or {})


def compose(F, Y, check=True):
    """F(Y) = (F(Y_t), DF(Y_t) Y'_t) as a controlled path of p x q matrices."""
    if Y.shape[1] != 1 or Y.shape[0] != F.m:
        raise ShapeError(f"field expects vector paths in R^{F.m}, got shape {Y.shape}")
    y = Y.vector()
    if check and F.analytic:
        probes = y[[0, len(y) // 2, -1]]
        check_derivatives(F, probes)
    vals = F.eval(y)
    d1 = F.deriv1(y)
    yp = np.einsum("kabc,kcd->kabd", d1, Y.yprime[:, :, 0, :])
    return ControlledPath(Y.base, vals, yp)


def lift_integrand(G, R, check=True):
    """(G(X), DG(X)) as a controlled path over R."""
    return compose(G, rough_identity(R), check=check)


def compose_bound(F, Y):
    """Explicit majorant of the seminorm of F(Y).

    Remainder part: 2 c (1 + T^a + T^2a)(1 + |Y'_0| + |Y'_0|^2)(1 + N)^2 (1 + s)^2,
    derivative part: |DF| r1 + |D2F| ((|Y'_0| + T^a r1) |X|_a + T^a r0)(|Y'_0| + T^a r1),
    with c = |DF|_inf + |D2F|_inf, N the rough path norm, (r0, r1) the
    remainder norms of Y and s = r0 + r1. ``|F|_inf`` never enters, so
    linear fields get a finite bound.
    """
    if F.cb_norms is None:
        raise ValueError(f"field {F.name!r} carries no C_b norms")
    _, df, d2f, _ = F.cb_norms
    T = Y.grid.T
    a = Y.alpha
    ta = T ** a
    yp0 = float(np.linalg.norm(Y.yprime[0]))
    r0, r1 = remainder_norms(Y)
    s = r0 + r1
    rep = holder_norms(Y.base)
    N = rep.rough_norm
    c = df + d2f
    part0 = 2.0 * c * (1 + ta + ta * ta) * (1 + yp0 + yp0 ** 2) * (1 + N) ** 2 * (1 + s) ** 2
    ysup = yp0 + ta * r1
    part1 = df * r1 + d2f * (ysup * rep.x_alpha + ta * r0) * ysup
    return float(part0 + part1)
