"""Auxiliary (spinal) process: the law of a uniformly sampled cell line.

Along the spine the parasite load jumps by a kernel factor at rate 2r and
follows the cell SDE in between; for the multiplicative model its log is
the Levy process

    L_t = (g - sigma^2) t + sqrt(2 sigma^2) B_t + sum ln Theta_i.

The mean number of cells alive satisfies (many-to-one)

    E[c_t] = e^{(r-q)t} P_x(Y_t < inf),

and with stable positive jumps (b, c) the non-explosion probability has
the closed Laplace-functional form

    P_x(Y_t < inf) = E[ exp( -x (b c int_0^t e^{-b L_s} ds)^{-1/b} ) ],

which this module estimates by Monte Carlo over Levy paths (exact at jump
epochs, trapezoid on a dt grid in between).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels as K
from ._backend import walk_levy
from ._rng import mean_and_se, stream
from .classify import ModelParams, StableJumpParams
from .errors import BudgetExceeded, ParabranchError

__all__ = [
    "SpineConfig",
    "SpinePaths",
    "simulate_spine",
    "nonexplosion_probability",
    "nonexplosion_curve",
    "mean_cells_via_spine",
    "mean_cells_curve",
    "many_to_one_check",
    "levy_records",
    "psi0",
]


@dataclass(frozen=True)
class SpineConfig:
    """Monte Carlo controls for spine estimators.

    dt defaults to 1e-3 * t_max; record_times defaults to [t_max];
    branch_budget caps e^{r t} * reps for the branching side of the
    many-to-one check.
    """

    t_max: float
    reps: int = 10_000
    seed: int = 0
    x0: float = 1.0
    dt: Optional[float] = None
    record_times: Optional[tuple] = None
    threads: int = 1
    explosion_cap: Optional[float] = None
    branch_budget: float = 5e6

    def __post_init__(self):
        if self.t_max < 0:
            raise ParabranchError("t_max must be >= 0")
        if self.reps < 1:
            raise ParabranchError("reps must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ParabranchError("dt must be > 0")
        if self.x0 < 0:
            raise ParabranchError("x0 must be >= 0")

    @property
    def dt_eff(self) -> float:
        if self.dt is not None:
            return self.dt
        return 1e-3 * self.t_max if self.t_max > 0 else 1e-3

    @property
    def records(self) -> tuple:
        if self.record_times is not None:
            return tuple(sorted(self.record_times))
        return (self.t_max,)


def _draw_path_grid(rng, params: ModelParams, kernel, t_end: float, dt: float,
                    rec_times: Sequence[float]):
    """Sample one Levy path's primitives and lay them on the walk grid.

    Draw order is fixed (jump count, jump positions, kernel factors,
    Brownian increments) and shared by both backend lanes.
    """
    two_r = 2.0 * params.r
    n_jumps = int(rng.poisson(two_r * t_end)) if t_end > 0 else 0
    jump_times = np.sort(rng.random(n_jumps)) * t_end
    thetas = K.sample(kernel, rng, n_jumps)
    jump_sizes = np.log(thetas)

    n_steps = max(1, int(math.ceil(t_end / dt)))
    base = np.arange(1, n_steps) * dt
    times = np.unique(np.concatenate([
        base[base < t_end], jump_times, np.asarray(rec_times, dtype=float),
        np.array([t_end])]))
    times = times[(times > 0.0) & (times <= t_end)]
    grid = np.concatenate([[0.0], times])

    dt_arr = np.diff(grid)
    n = dt_arr.shape[0]
    jump_inc = np.zeros(n)
    if n_jumps:
        pos = np.searchsorted(grid, jump_times)
        np.add.at(jump_inc, pos - 1, jump_sizes)

    s2 = params.sigma ** 2
    cont_inc = (params.g - s2) * dt_arr
    if params.sigma > 0.0:
        cont_inc = cont_inc + math.sqrt(2.0 * s2) * np.sqrt(dt_arr) * rng.standard_normal(n)

    rec_idx = np.searchsorted(grid, np.asarray(rec_times, dtype=float))
    return dt_arr, cont_inc, jump_inc, rec_idx


def levy_records(params: ModelParams, kernel, config: SpineConfig, b: float = 0.0):
    """Per-replication (L_t, I_t) at the record times, I = int e^{-b L}.

    Returns arrays of shape (reps, n_records).  Replications use disjoint
    counter-based streams and may be evaluated on several threads; the
    output is identical either way.
    """
    rec = config.records
    dt = config.dt_eff
    reps = config.reps
    l_out = np.empty((reps, len(rec)))
    i_out = np.empty((reps, len(rec)))

    def run(lo: int, hi: int):
        for rep in range(lo, hi):
            rng = stream(config.seed, rep)
            dt_arr, cont_inc, jump_inc, rec_idx = _draw_path_grid(
                rng, params, kernel, config.t_max, dt, rec)
            l_out[rep], i_out[rep] = walk_levy(dt_arr, cont_inc, jump_inc, b, rec_idx)

    _run_chunks(run, reps, config.threads)
    return l_out, i_out


def _run_chunks(run: Callable[[int, int], None], reps: int, threads: int):
    if threads <= 1 or reps < 2 * threads:
        run(0, reps)
        return
    bounds = np.linspace(0, reps, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run, int(bounds[i]), int(bounds[i + 1]))
                   for i in range(threads)]
        for fut in futures:
            fut.result()


# ---------------------------------------------------------------------------
# non-explosion / mean-cell estimators (multiplicative model with stable jumps)


def nonexplosion_curve(params: ModelParams, kernel, stable: StableJumpParams,
                       ts: Sequence[float], x: float, config: SpineConfig):
    """(estimate, standard error) of P_x(Y_t < inf) at each t in ts."""
    if x < 0:
        raise ParabranchError("x must be >= 0")
    ts = tuple(float(t) for t in ts)
    if any(t < 0 for t in ts):
        raise ParabranchError("times must be >= 0")
    cfg = _with_records(config, ts)
    _, i_vals = levy_records(params, kernel, cfg, b=stable.b)
    rec_sorted = cfg.records
    out_est, out_se = [], []
    bc = stable.b * stable.c  # > 0
    inv = -1.0 / stable.b     # > 0
    for t in ts:
        col = rec_sorted.index(t)
        vals = np.exp(-x * (bc * i_vals[:, col]) ** inv)
        est, se = mean_and_se(vals)
        out_est.append(est)
        out_se.append(se)
    return np.array(out_est), np.array(out_se)


def nonexplosion_probability(params: ModelParams, kernel, stable: StableJumpParams,
                             t: float, x: float, config: SpineConfig):
    """P_x(Y_t < inf) for the multiplicative model with stable jumps.

    An equality (not only a bound) because the branching mechanism is the
    pure stable one; configurations with extra finite jump measures or
    non-multiplicative coefficients are outside this estimator by
    construction of ModelParams.
    """
    est, se = nonexplosion_curve(params, kernel, stable, [t], x, config)
    return float(est[0]), float(se[0])


def mean_cells_via_spine(params: ModelParams, kernel, stable: StableJumpParams,
                         t: float, x: float, config: SpineConfig):
    """E[c_t] estimate = e^{(r-q)t} * P_x(Y_t < inf), with exact error scaling."""
    p, se = nonexplosion_probability(params, kernel, stable, t, x, config)
    scale = math.exp((params.r - params.q) * t)
    return p * scale, se * scale


def mean_cells_curve(params: ModelParams, kernel, stable: StableJumpParams,
                     ts: Sequence[float], x: float, config: SpineConfig):
    ps, ses = nonexplosion_curve(params, kernel, stable, ts, x, config)
    scale = np.exp((params.r - params.q) * np.asarray(ts, dtype=float))
    return ps * scale, ses * scale


def _with_records(config: SpineConfig, ts: Sequence[float]) -> SpineConfig:
    t_max = max(ts) if ts else config.t_max
    return SpineConfig(
        t_max=t_max, reps=config.reps, seed=config.seed, x0=config.x0,
        dt=config.dt, record_times=tuple(sorted(set(ts))), threads=config.threads,
        explosion_cap=config.explosion_cap, branch_budget=config.branch_budget)


# ---------------------------------------------------------------------------
# spine trajectory simulation


@dataclass
class SpinePaths:
    """Y at the record times, one row per replication."""

    record_times: tuple
    y: np.ndarray                 # (reps, n_records); +inf where exploded
    exploded: np.ndarray          # bool (reps, n_records)
    config: SpineConfig = field(repr=False, default=None)


def simulate_spine(params: ModelParams, kernel, stable: Optional[StableJumpParams],
                   config: SpineConfig) -> SpinePaths:
    """Simulate the auxiliary process Y (kernel jumps at rate 2r).

    Pure multiplicative case (no stable jumps): exact update
    Y_t = x0 exp(L_t).  With stable jumps: Euler-Maruyama on the dt grid,
    the frozen-x stable increment drawn exactly per step (see
    simulate._stable_increments); crossing the explosion cap marks the
    path exploded rather than aborting.
    """
    rec = config.records
    if stable is None:
        l_vals, _ = levy_records(params, kernel, config, b=0.0)
        y = config.x0 * np.exp(l_vals)
        return SpinePaths(rec, y, np.zeros_like(y, dtype=bool), config)

    from .simulate import _stable_increments  # shared sampler, avoids duplication

    cap = config.explosion_cap if config.explosion_cap is not None \
        else 1e12 * max(config.x0, 1.0)
    dt = config.dt_eff
    reps = config.reps
    y_out = np.empty((reps, len(rec)))
    ex_out = np.zeros((reps, len(rec)), dtype=bool)
    s2 = params.sigma ** 2
    g = params.g

    def run(lo, hi):
        for rep in range(lo, hi):
            rng = stream(config.seed, rep)
            two_r = 2.0 * params.r
            n_jumps = int(rng.poisson(two_r * config.t_max))
            jump_times = np.sort(rng.random(n_jumps)) * config.t_max
            thetas = K.sample(kernel, rng, n_jumps)
            n_steps = max(1, int(math.ceil(config.t_max / dt)))
            base = np.arange(1, n_steps) * dt
            times = np.unique(np.concatenate([
                base[base < config.t_max], jump_times,
                np.asarray(rec, dtype=float), np.array([config.t_max])]))
            times = times[(times > 0) & (times <= config.t_max)]
            grid = np.concatenate([[0.0], times])
            jump_at = {float(t): [] for t in jump_times}
            for t, th in zip(jump_times, thetas):
                jump_at[float(t)].append(th)
            rec_set = {float(t): i for i, t in enumerate(rec)}

            y = config.x0
            if 0.0 in rec_set:
                y_out[rep, rec_set[0.0]] = y
            for i in range(1, grid.shape[0]):
                h = grid[i] - grid[i - 1]
                if math.isfinite(y):
                    dy = g * y * h
                    if params.sigma > 0.0:
                        dy += math.sqrt(2.0 * s2) * y * math.sqrt(h) * rng.standard_normal()
                    dy += _stable_increments(rng, np.array([y]), h, stable)[0]
                    y = max(y + dy, 0.0)
                    if y >= cap:
                        y = float("inf")
                for th in jump_at.get(float(grid[i]), ()):
                    y = th * y
                t = float(grid[i])
                if t in rec_set:
                    y_out[rep, rec_set[t]] = y
                    ex_out[rep, rec_set[t]] = not math.isfinite(y)

    _run_chunks(run, reps, config.threads)
    return SpinePaths(rec, y_out, ex_out, config)


# ---------------------------------------------------------------------------
# many-to-one and the branching mechanism exponent


_MTO_FUNCTIONALS = {
    "constant_one": lambda x: np.ones_like(x),
    "exp_neg": lambda x: np.where(np.isfinite(x), np.exp(-np.minimum(x, 700.0)), 0.0),
    "indicator_finite": lambda x: np.isfinite(x).astype(float),
}


def many_to_one_check(params: ModelParams, kernel, f: str, t: float, x: float,
                      config: SpineConfig) -> dict:
    """Compare both sides of E[sum_u f(X_t^u)] = e^{(r-q)t} E[f(Y_t)].

    Left side from the full branching simulation, right side from the
    spine; returns lhs, rhs, their standard errors and the z-score.
    """
    if f not in _MTO_FUNCTIONALS:
        raise ParabranchError(f"unknown many-to-one functional {f!r}; "
                              f"expected one of {sorted(_MTO_FUNCTIONALS)}")
    expected_cells = math.exp(params.r * t) * config.reps
    if expected_cells > config.branch_budget:
        raise BudgetExceeded(
            f"branching side needs ~e^(r t) * reps = {expected_cells:.3g} cells, "
            f"budget is {config.branch_budget:.3g}")

    func = _MTO_FUNCTIONALS[f]

    from .simulate import ModelFunctions, SimConfig, simulate_population

    model = ModelFunctions.multiplicative(params.g, params.sigma, kernel)
    sim_cfg = SimConfig(t_max=t, reps=config.reps, seed=config.seed, x0=x,
                        record_times=(t,), snapshots=True)
    traj = simulate_population(model, params.r, params.q, sim_cfg)
    sums = traj.functional_sums(t, func)
    lhs, lhs_se = mean_and_se(sums)

    spine_cfg = _with_records(config, [t])
    spine_cfg = SpineConfig(
        t_max=t, reps=config.reps, seed=config.seed + 1, x0=x, dt=config.dt,
        record_times=(t,), threads=config.threads, branch_budget=config.branch_budget)
    paths = simulate_spine(params, kernel, None, spine_cfg)
    yvals = paths.y[:, 0] if x > 0 else np.zeros(config.reps)
    fvals = func(yvals)
    fmean, fse = mean_and_se(fvals)
    scale = math.exp((params.r - params.q) * t)
    rhs, rhs_se = fmean * scale, fse * scale
    if f == "constant_one":
        rhs, rhs_se = scale, 0.0  # E[1] needs no Monte Carlo

    denom = math.hypot(lhs_se, rhs_se)
    z = abs(lhs - rhs) / denom if denom > 0 else float("inf") if lhs != rhs else 0.0
    return {"f": f, "t": t, "x": x, "lhs": lhs, "lhs_se": lhs_se,
            "rhs": rhs, "rhs_se": rhs_se, "z_score": z}


def psi0(lam: float, stable: Optional[StableJumpParams],
         pi: Sequence[tuple] = ()) -> float:
    """Branching mechanism psi0(lam) = c b-stable term + compensated pi part:
    c lam^(1+b) + sum w (e^{-lam z} - 1 + lam z)."""
    out = 0.0
    if stable is not None:
        out += stable.c * lam ** (1.0 + stable.b)
    for z, w in pi:
        out += w * (math.exp(-lam * z) - 1.0 + lam * z)
    return out
