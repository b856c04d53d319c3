"""Experiment runners behind the CLI subcommands.

Each ``run_*`` takes an :class:`ExperimentConfig`, pushes table rows into
``sink`` (a callable) and returns ``(columns, rows, meta)``. Trials are
pure functions of ``(config, trial)``; with ``ROUGHLAB_THREADS > 1`` they
fan out to a process pool and are merged in trial order, so the output
does not depend on the worker count.

When a trial fails numerically, rows of earlier trials and the completed
rows of the failing trial reach the sink before the error is re-raised.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..calculus import build_field, lift_integrand
from ..core import (ControlledPath, controlled_distance, holder_norms, make_grid,
                    rough_distance, rough_identity)
from ..errors import ConfigError, DerivativeCheckError, NumericalError
from ..integral import integral_controlled, local_rate, mesh_convergence, rough_integral
from ..lift import relift_linear, signal_path
from ..solver import solve

COLUMNS = {
    "lift": ("trial", "x_alpha", "xx_2alpha", "increment_norm", "area_norm"),
    "integrate": ("trial", "component", "value"),
    "solve": ("trial", "component", "y_T", "windows", "picard_iters", "residual"),
    "rates": ("trial", "level", "mesh", "error"),
    "contraction": ("trial", "window_start", "window_end", "iters", "ratio", "residual",
                    "accepted"),
    "stability": ("trial", "factor", "epsilon", "x_dist", "z_dist", "y_dist", "y0_gap", "z0_gap",
                  "yprime0_gap", "zprime0_gap", "y_terminal_gap"),
}


def threads():
    raw = os.environ.get("ROUGHLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"must be a positive integer, got {raw!r}", "ROUGHLAB_THREADS") from None


# -- problem assembly -------------------------------------------------------

def driver(cfg, trial):
    n = cfg.n
    kind = "dyadic" if n & (n - 1) == 0 else "uniform"
    return signal_path(cfg.driver, make_grid(cfg.T, n, kind), cfg.alpha, trial, cfg.lift)


def _field(entry, key, **defaults):
    params = dict(entry["params"])
    for k, v in defaults.items():
        params.setdefault(k, v)
    try:
        return build_field(entry["name"], params)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot build field {entry['name']!r}: {exc}", f"{key}.params") from None


def z_field(cfg):
    d = cfg.driver.d
    G = _field(cfg.z_field, "z_field", m=d, q=d)
    if G.m != d or G.q != d:
        raise ConfigError(f"G must map R^{d} to p x {d} matrices, got m={G.m}, q={G.q}", "z_field")
    return G


def build_z(cfg, R):
    """The controlled driver Z over R per ``z_mode``."""
    if cfg.z_mode == "identity":
        return rough_identity(R)
    if cfg.z_mode == "integral":
        return integral_controlled(lift_integrand(z_field(cfg), R), rough_identity(R))
    vals = np.asarray(cfg.z_custom["values"], dtype=np.float64)
    der = np.asarray(cfg.z_custom["derivative"], dtype=np.float64)
    if vals.ndim == 1:
        vals = vals[:, None]
    try:
        return ControlledPath(R, vals[:, :, None], der.reshape(vals.shape + (1, R.d)))
    except ValueError as exc:
        raise ConfigError(str(exc), "z_custom") from None


def z_dim(cfg):
    if cfg.z_mode == "identity":
        return cfg.driver.d
    if cfg.z_mode == "integral":
        return z_field(cfg).p
    vals = np.asarray(cfg.z_custom["values"])
    return 1 if vals.ndim == 1 else vals.shape[1]


def rde_field(cfg):
    q = z_dim(cfg)
    m = len(cfg.y0) if cfg.y0 is not None else int(cfg.field["params"].get("m", q))
    F = _field(cfg.field, "field", m=m, q=q)
    if F.q != q or F.p != F.m:
        raise ConfigError(f"field must map R^m to m x {q} matrices, got {F.p}x{F.q}", "field")
    y0 = np.ones(F.m) if cfg.y0 is None else np.asarray(cfg.y0, dtype=np.float64)
    if y0.size != F.m:
        raise ConfigError(f"has {y0.size} entries, field acts on R^{F.m}", "y0")
    return F, y0


def integrand_field(cfg):
    d = cfg.driver.d
    q = z_dim(cfg)
    F = _field(cfg.field, "field", m=d, q=q)
    if F.m != d or F.q != q:
        raise ConfigError(f"integrand map must take R^{d} to p x {q} matrices", "field")
    return F


def _pair(cfg, R):
    Z = build_z(cfg, R)
    return lift_integrand(integrand_field(cfg), R), Z


# -- per-trial work -----------------------------------------------------------

def _trial_lift(cfg, trial, emit):
    R = driver(cfg, trial)
    rep = holder_norms(R)
    emit((trial, rep.x_alpha, rep.xx_2alpha, float(np.linalg.norm(R.x[-1] - R.x[0])),
          float(np.linalg.norm(R.area_from_origin[-1]))))


def _trial_integrate(cfg, trial, emit):
    Y, Z = _pair(cfg, driver(cfg, trial))
    for c, v in enumerate(rough_integral(Y, Z, 0, cfg.n)):
        emit((trial, c, float(v)))


def _trial_solve(cfg, trial, emit):
    F, y0 = rde_field(cfg)
    Y, rep = solve(F, build_z(cfg, driver(cfg, trial)), y0, cfg.solver)
    for c, v in enumerate(Y.y[-1, :, 0]):
        emit((trial, c, float(v), len(rep.windows), rep.total_picard_iters, rep.residual))


def _trial_rates(cfg, trial, emit):
    Y, Z = _pair(cfg, driver(cfg, trial))
    fit = mesh_convergence(Y, Z, cfg.levels)
    for mesh, err in fit.points:
        emit((trial, fit.extra["levels"][mesh], mesh, err))
    loc = local_rate(Y, Z, cfg.local["min_cells"], cfg.local["max_cells"])
    return {"slope_mesh": fit.slope, "slope_local": loc.slope}


def _trial_contraction(cfg, trial, emit):
    F, y0 = rde_field(cfg)
    _, rep = solve(F, build_z(cfg, driver(cfg, trial)), y0, cfg.solver)
    for rec, ok in rep.events:
        emit((trial, rec.start, rec.end, rec.iterations, rec.ratio, rec.residual, int(ok)))


def _stability_row(trial, factor, eps, R, Rt, Z, Zt, Y, Yt):
    return (trial, factor, eps,
            rough_distance(R, Rt),
            controlled_distance(Z, Zt),
            controlled_distance(Y, Yt),
            float(np.linalg.norm(Y.y[0] - Yt.y[0])),
            float(np.linalg.norm(Z.y[0] - Zt.y[0])),
            float(np.linalg.norm(Y.yprime[0] - Yt.yprime[0])),
            float(np.linalg.norm(Z.yprime[0] - Zt.yprime[0])),
            float(np.linalg.norm(Y.y[-1] - Yt.y[-1])))


def _trial_stability(cfg, trial, emit):
    F, y0 = rde_field(cfg)
    R = driver(cfg, trial)
    Z = build_z(cfg, R)
    Y, _ = solve(F, Z, y0, cfg.solver)
    if cfg.stability["mode"] == "driver":
        for f in cfg.levels:
            Rt = relift_linear(R, f)
            Zt = build_z(cfg, Rt)
            Yt, _ = solve(F, Zt, y0, cfg.solver)
            emit(_stability_row(trial, f, 0.0, R, Rt, Z, Zt, Y, Yt))
    else:
        for eps in cfg.stability["epsilons"]:
            Yt, _ = solve(F, Z, y0 + eps, cfg.solver)
            emit(_stability_row(trial, 1, eps, R, R, Z, Z, Y, Yt))


TRIALS = {
    "lift": _trial_lift,
    "integrate": _trial_integrate,
    "solve": _trial_solve,
    "rates": _trial_rates,
    "contraction": _trial_contraction,
    "stability": _trial_stability,
}


def _guarded(name, cfg, trial):
    rows = []
    try:
        extra = TRIALS[name](cfg, trial, rows.append)
    except NumericalError as exc:
        return ("error", rows, exc.module, str(exc))
    except DerivativeCheckError as exc:
        return ("error", rows, "calculus", str(exc))
    except FloatingPointError as exc:
        return ("error", rows, name, str(exc))
    return ("ok", rows, extra)


def _run_trials(name, cfg, sink):
    """Rows of every trial into ``sink`` in trial order; returns the extras."""
    workers = min(threads(), cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_guarded, [name] * cfg.trials, [cfg] * cfg.trials,
                                    range(cfg.trials)))
    else:
        results = (_guarded(name, cfg, t) for t in range(cfg.trials))
    extras = []
    for trial, res in enumerate(results):
        for row in res[1]:
            sink(row)
        if res[0] == "error":
            raise NumericalError(f"trial {trial}: {res[3]}", res[2])
        extras.append(res[2])
    return extras


def _collect(sink):
    rows = []

    def emit(row):
        rows.append(row)
        if sink is not None:
            sink(row)
    return rows, emit


def _median_slope(values):
    vals = [v for v in values if np.isfinite(v)]
    return float(np.median(vals)) if vals else "degenerate"


# -- public runners -----------------------------------------------------------

def _simple(name):
    def run(cfg, sink=None):
        rows, emit = _collect(sink)
        _run_trials(name, cfg, emit)
        return COLUMNS[name], rows, {}
    run.__name__ = f"run_{name}"
    run.__doc__ = f"Per-trial `{name}` table with columns {', '.join(COLUMNS[name])}."
    return run


run_lift = _simple("lift")
run_integrate = _simple("integrate")
run_solve = _simple("solve")
run_contraction = _simple("contraction")


def run_rates(cfg, sink=None):
    """Mesh-error table per trial, then median slopes as summary rows.

    Summary rows read ``summary,slope_mesh,,<median>`` and
    ``summary,slope_local,,<median>``; a median over trials whose fits
    were all degenerate is written as ``degenerate``.
    """
    if len(cfg.levels) < 3:
        raise ConfigError("rates needs at least three levels", "levels")
    rows, emit = _collect(sink)
    extras = _run_trials("rates", cfg, emit)
    meta = {}
    for key in ("slope_mesh", "slope_local"):
        med = _median_slope([e[key] for e in extras])
        meta[key] = med
        emit(("summary", key, "", med))
    return COLUMNS["rates"], rows, meta


def _is_decreasing(values, strict):
    pairs = list(zip(values, values[1:]))
    return all(b < a for a, b in pairs) if strict else all(b <= a for a, b in pairs)


def run_stability(cfg, sink=None):
    """Distances between the reference solve and each approximant, per trial,
    followed by rows of medians across trials (``trial = median``).

    ``meta`` holds the decay verdicts: median ``y_dist`` strictly
    decreasing along the refinement and every input column non-increasing.
    """
    mode = cfg.stability["mode"]
    if mode == "driver" and not cfg.levels:
        raise ConfigError("stability in driver mode needs levels", "levels")
    if mode == "initial" and not cfg.stability["epsilons"]:
        raise ConfigError("stability in initial mode needs epsilons", "stability.epsilons")
    rows, emit = _collect(sink)
    _run_trials("stability", cfg, emit)
    table = np.array([r[1:] for r in rows], dtype=np.float64)
    keys = list(cfg.levels) if mode == "driver" else list(cfg.stability["epsilons"])
    col = 0 if mode == "driver" else 1
    order = sorted(set(keys), reverse=True)
    medians = []
    for k in order:
        sel = table[table[:, col] == k]
        med = np.median(sel, axis=0)
        medians.append(med)
        emit(("median",) + tuple(int(v) if i == 0 else float(v) for i, v in enumerate(med)))
    med = np.array(medians)
    names = COLUMNS["stability"][1:]
    y_dist = med[:, names.index("y_dist")]
    inputs = ("x_dist", "z_dist", "y0_gap", "z0_gap", "yprime0_gap", "zprime0_gap")
    meta = {
        "y_dist_strictly_decreasing": _is_decreasing(list(y_dist), True),
        "y_dist_final_over_initial": float(y_dist[-1] / y_dist[0]) if y_dist[0] > 0 else float("nan"),
        "inputs_non_increasing": all(
            _is_decreasing(list(med[:, names.index(c)]), False) for c in inputs),
    }
    return COLUMNS["stability"], rows, meta


RUNNERS = {
    "lift": run_lift,
    "integrate": run_integrate,
    "solve": run_solve,
    "rates": run_rates,
    "contraction": run_contraction,
    "stability": run_stability,
}
