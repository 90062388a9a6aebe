"""Event-driven simulation of the full branching cell population.

Cells divide at rate r (daughter loads Theta*x and (1-Theta)*x) and die at
rate q, with exact exponential clocks per cell.  In between events the
parasite load follows the configured dynamics:

* pure multiplicative models (drift g x, diffusion sigma^2 x^2, no extra
  jumps) use the exact geometric-Brownian update segment by segment;
* anything else (finite jump measure pi, stable positive jumps, custom
  drift/diffusion) is integrated by Euler-Maruyama on a dt grid, with the
  frozen-x stable increment drawn exactly per step.

Loads crossing the explosion cap become +inf; such cells count in N_t but
not in c_t and transmit infinite loads to their daughters.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels as K
from ._rng import mean_and_se, stream
from .classify import StableJumpParams
from .errors import ParabranchError, SnapshotsMissing

__all__ = [
    "ModelFunctions",
    "SimConfig",
    "PopulationTrajectory",
    "simulate_population",
    "infected_fraction",
]


@dataclass(frozen=True)
class ModelFunctions:
    """Per-cell load dynamics: drift g(.), squared diffusion sigma^2(.),
    finite-jump intensity p(.), finite discrete jump measure pi, kernel
    (optionally load-dependent), optional stable positive jumps.

    g(0) = sigma^2(0) = p(0) = 0 is required so that 0 stays absorbing.
    """

    drift: Callable
    diffusion2: Callable
    jump_rate: Callable
    pi: tuple = ()
    kernel: K.PartitionKernel = field(default_factory=K.Equal)
    kernel_of_x: Optional[Callable] = None
    stable: Optional[StableJumpParams] = None
    # set by the multiplicative() builder so the exact integrator can be used
    mult_g: Optional[float] = None
    mult_sigma: Optional[float] = None

    def __post_init__(self):
        for name, fn in (("drift", self.drift), ("diffusion2", self.diffusion2),
                         ("jump_rate", self.jump_rate)):
            v = float(fn(0.0))
            if v != 0.0:
                raise ParabranchError(f"{name}(0) must be 0 (0 is absorbing), got {v}")
        for z, w in self.pi:
            if w < 0 or z < 0:
                raise ParabranchError(f"pi atom (z={z}, w={w}) must be nonnegative")

    @classmethod
    def multiplicative(cls, g: float, sigma: float, kernel: K.PartitionKernel,
                       stable: Optional[StableJumpParams] = None) -> "ModelFunctions":
        """Drift g x, diffusion sigma^2 x^2, no finite jump measure."""
        return cls(drift=lambda x: g * x,
                   diffusion2=lambda x: (sigma * x) ** 2,
                   jump_rate=lambda x: 0.0 * x,
                   pi=(), kernel=kernel, stable=stable,
                   mult_g=float(g), mult_sigma=float(sigma))

    def kernel_at(self, x: float) -> K.PartitionKernel:
        return self.kernel_of_x(x) if self.kernel_of_x is not None else self.kernel

    @property
    def is_pure_multiplicative(self) -> bool:
        return (self.mult_g is not None and self.stable is None and not self.pi)


@dataclass(frozen=True)
class SimConfig:
    t_max: float
    reps: int = 1000
    seed: int = 0
    x0: float = 1.0
    dt: Optional[float] = None
    max_cells: int = 2_000_000       # per replication; exceeding aborts and flags it
    explosion_cap: Optional[float] = None   # default 1e12 * max(x0, 1)
    record_times: Optional[tuple] = None
    snapshots: bool = False
    chunk_reps: int = 1024           # pooled-chunk width of the Euler integrator

    def __post_init__(self):
        if self.t_max < 0 or self.reps < 1 or self.x0 < 0:
            raise ParabranchError("need t_max >= 0, reps >= 1, x0 >= 0")
        if self.dt is not None and not self.dt > 0:
            raise ParabranchError("dt must be > 0")
        cap = self.cap
        if not cap > self.x0:
            raise ParabranchError(f"explosion_cap {cap} must exceed x0 {self.x0}")

    @property
    def dt_eff(self) -> float:
        if self.dt is not None:
            return self.dt
        return 1e-3 * self.t_max if self.t_max > 0 else 1e-3

    @property
    def cap(self) -> float:
        if self.explosion_cap is not None:
            return self.explosion_cap
        return 1e12 * max(self.x0, 1.0)

    @property
    def records(self) -> tuple:
        if self.record_times is not None:
            return tuple(sorted(self.record_times))
        return (self.t_max,)


@dataclass
class PopulationTrajectory:
    """Counts (and optional per-cell loads) at the record times.

    N counts non-dead cells including exploded ones; C only alive cells
    with finite load, so C <= N always.
    """

    record_times: tuple
    n_cells: np.ndarray            # (reps, n_records) int64
    c_cells: np.ndarray            # (reps, n_records) int64
    snapshots: Optional[list]      # per record time: (rep_idx array, loads array)
    aborted: list                  # replication indices that hit max_cells
    reps: int

    def index_of(self, t: float) -> int:
        for i, rt in enumerate(self.record_times):
            if rt == t:
                return i
        raise ParabranchError(f"time {t} is not a record time {self.record_times}")

    def mean_n(self, t: float):
        return mean_and_se(self.n_cells[:, self.index_of(t)].astype(float))

    def mean_c(self, t: float):
        return mean_and_se(self.c_cells[:, self.index_of(t)].astype(float))

    def _snapshot(self, t: float):
        if self.snapshots is None:
            raise SnapshotsMissing(
                "per-cell snapshots were not recorded (SimConfig.snapshots=False)")
        return self.snapshots[self.index_of(t)]

    def functional_sums(self, t: float, func: Callable) -> np.ndarray:
        """Per-replication sum of func(load) over cells in V_t."""
        rep_idx, loads = self._snapshot(t)
        out = np.zeros(self.reps)
        if loads.size:
            np.add.at(out, rep_idx, func(loads))
        return out

    def count_above(self, t: float, threshold: float) -> np.ndarray:
        """Per-replication count of cells with load strictly above threshold."""
        rep_idx, loads = self._snapshot(t)
        out = np.zeros(self.reps)
        if loads.size:
            np.add.at(out, rep_idx, (loads > threshold).astype(float))
        return out


# ---------------------------------------------------------------------------
# division bookkeeping shared by both integrators


def _daughter_loads(x: float, theta: float):
    # c2 = x - c1 keeps conservation exact in floating point
    c1 = theta * x
    return c1, x - c1


def _death_rate(q) -> tuple:
    """Normalize q into (q_sup, accept) where accept(x, u) decides a
    death-candidate event by thinning; constant q accepts always."""
    if callable(q):
        q_func, q_sup = q
        return float(q_sup), lambda x, u: u * q_sup <= q_func(x)
    return float(q), None


# ---------------------------------------------------------------------------
# exact multiplicative integrator (event-driven, one stream per replication)


def _run_multiplicative(model: ModelFunctions, r: float, q, config: SimConfig):
    g, sigma = model.mult_g, model.mult_sigma
    s2 = sigma ** 2
    cap = config.cap
    rec = config.records
    q_sup, q_accept = _death_rate(q)
    total_rate = r + q_sup
    p_div = r / total_rate if total_rate > 0 else 0.0

    n_out = np.zeros((config.reps, len(rec)), dtype=np.int64)
    c_out = np.zeros((config.reps, len(rec)), dtype=np.int64)
    snaps = [([], []) for _ in rec] if config.snapshots else None
    aborted = []

    for rep in range(config.reps):
        rng = stream(config.seed, rep)
        # cells: id -> [t_last, x_last]; exploded cells carry x = +inf
        cells = {0: [0.0, float(config.x0)]}
        next_id = 1
        heap = []

        def schedule(cid, born):
            if total_rate <= 0:
                return
            life = rng.exponential(1.0 / total_rate)
            is_div = rng.random() < p_div
            heapq.heappush(heap, (born + life, cid, is_div))

        def advance(state, t_new):
            t_old, x = state
            if t_new > t_old and math.isfinite(x) and x > 0.0:
                w = rng.standard_normal() if sigma > 0.0 else 0.0
                h = t_new - t_old
                x = x * math.exp((g - s2) * h + math.sqrt(2.0 * s2 * h) * w)
                if x >= cap:
                    x = float("inf")
            state[0] = t_new
            state[1] = x
            return x

        schedule(0, 0.0)
        ok = True
        k_rec = 0
        t_now = 0.0
        while k_rec < len(rec):
            t_target = rec[k_rec]
            while heap and heap[0][0] <= t_target:
                t_ev, cid, is_div = heapq.heappop(heap)
                state = cells.get(cid)
                if state is None:
                    continue
                x = advance(state, t_ev)
                if is_div:
                    del cells[cid]
                    if math.isfinite(x):
                        theta = K.sample(model.kernel_at(x), rng)
                        c1, c2 = _daughter_loads(x, theta)
                    else:
                        c1 = c2 = float("inf")
                    for load in (c1, c2):
                        cells[next_id] = [t_ev, load]
                        schedule(next_id, t_ev)
                        next_id += 1
                else:
                    if q_accept is None or q_accept(x, rng.random()):
                        del cells[cid]
                    else:
                        schedule(cid, t_ev)  # phantom death: redraw the clock
                if len(cells) > config.max_cells:
                    ok = False
                    break
                t_now = t_ev
            if not ok:
                break
            # snapshot at t_target
            loads = [advance(state, t_target) for state in cells.values()]
            n_out[rep, k_rec] = len(loads)
            c_out[rep, k_rec] = sum(1 for v in loads if math.isfinite(v))
            if snaps is not None:
                snaps[k_rec][0].extend([rep] * len(loads))
                snaps[k_rec][1].extend(loads)
            k_rec += 1
        if not ok:
            aborted.append(rep)

    return n_out, c_out, snaps, aborted


# ---------------------------------------------------------------------------
# Euler integrator (pooled replication chunks, one stream per chunk)


def _stable_increments(rng, x: np.ndarray, h, stable: StableJumpParams) -> np.ndarray:
    """Exact one-sided stable increments for the jump part over steps of
    length h (scalar or per-cell) at frozen loads x: Laplace transform
    exp(h x c lam^(1+b)).

    Kanter's representation of the standard alpha-stable subordinator
    (E e^{-lam S} = e^{-lam^alpha}) scaled by ((-c) x h)^(1/alpha).
    """
    alpha = 1.0 + stable.b
    n = x.shape[0]
    u = rng.random(n) * math.pi
    e = rng.standard_exponential(n)
    s = (np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
         * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha))
    scale = (np.maximum(x, 0.0) * h * (-stable.c)) ** (1.0 / alpha)
    return scale * s


def _pi_increments(rng, x: np.ndarray, h, model: ModelFunctions) -> np.ndarray:
    """Compound-Poisson thinning of the finite measure pi over one step."""
    if not model.pi:
        return np.zeros_like(x)
    zs = np.array([z for z, _ in model.pi])
    ws = np.array([w for _, w in model.pi])
    wtot = ws.sum()
    rate = np.maximum(np.asarray(model.jump_rate(x), dtype=float), 0.0) * wtot * h
    counts = rng.poisson(rate)
    total = int(counts.sum())
    out = np.zeros_like(x)
    if total:
        u = rng.random(total)
        atoms = zs[np.searchsorted(np.cumsum(ws / wtot), u, side="right")]
        np.add.at(out, np.repeat(np.arange(x.shape[0]), counts), atoms)
    return out


def _euler_advance(rng, model: ModelFunctions, cap: float,
                   x: np.ndarray, h) -> np.ndarray:
    """One Euler-Maruyama step of lengths h (scalar or per-cell array).

    Exploded entries (inf) pass through; loads are clipped at 0 below and
    become +inf at the explosion cap.
    """
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    finite = np.isfinite(x)
    xf = np.where(finite, x, 0.0)
    dx = np.asarray(model.drift(xf), dtype=float) * h
    diff2 = np.asarray(model.diffusion2(xf), dtype=float)
    w = rng.standard_normal(x.shape[0])
    dx = dx + np.sqrt(np.maximum(2.0 * diff2 * h, 0.0)) * w
    dx = dx + _pi_increments(rng, xf, h, model)
    if model.stable is not None:
        dx = dx + _stable_increments(rng, xf, h, model.stable)
    xn = np.maximum(xf + dx, 0.0)
    xn = np.where(xn >= cap, np.inf, xn)
    return np.where(finite, xn, np.inf)


class _CellPool:
    """Growable per-chunk cell table; dead slots are left in place so heap
    entries stay valid."""

    def __init__(self, n0: int, rep_lo: int, x0: float):
        cap0 = max(16, 2 * n0)
        self.rep = np.empty(cap0, dtype=np.int64)
        self.x = np.empty(cap0)
        self.synced = np.empty(cap0)
        self.alive = np.zeros(cap0, dtype=bool)
        self.used = n0
        self.rep[:n0] = np.arange(rep_lo, rep_lo + n0)
        self.x[:n0] = x0
        self.synced[:n0] = 0.0
        self.alive[:n0] = True

    def add(self, rep: int, x: float, t: float) -> int:
        if self.used == self.rep.shape[0]:
            grow = self.rep.shape[0]
            for name in ("rep", "x", "synced", "alive"):
                arr = getattr(self, name)
                setattr(self, name, np.concatenate([arr, np.zeros(grow, dtype=arr.dtype)]))
        slot = self.used
        self.rep[slot] = rep
        self.x[slot] = x
        self.synced[slot] = t
        self.alive[slot] = True
        self.used += 1
        return slot


def _run_euler(model: ModelFunctions, r: float, q, config: SimConfig):
    """Pooled-chunk Euler integrator.

    Replications are grouped in chunks of config.chunk_reps, each chunk
    driven by one counter-based stream on a shared grid (dt steps plus the
    record times).  Division/death clocks stay exact exponentials (lazily
    deleted heap); events inside a step are processed one cell at a time in
    (event time, slot) order, then the surviving cells take one pooled
    vector step to the grid point.
    """
    q_sup, q_accept = _death_rate(q)
    total_rate = r + q_sup
    p_div = r / total_rate if total_rate > 0 else 0.0
    cap = config.cap
    rec = config.records
    dt = config.dt_eff

    n_steps = max(1, int(math.ceil(config.t_max / dt)))
    base = np.arange(1, n_steps) * dt
    grid_times = np.unique(np.concatenate([
        base[base < config.t_max], np.asarray(rec, dtype=float),
        np.array([config.t_max])]))
    grid_times = grid_times[(grid_times > 0) & (grid_times <= config.t_max)]
    rec_lookup = {float(t): i for i, t in enumerate(rec)}

    n_out = np.zeros((config.reps, len(rec)), dtype=np.int64)
    c_out = np.zeros((config.reps, len(rec)), dtype=np.int64)
    snaps = [([], []) for _ in rec] if config.snapshots else None
    aborted = []

    n_chunks = (config.reps + config.chunk_reps - 1) // config.chunk_reps
    for chunk in range(n_chunks):
        rep_lo = chunk * config.chunk_reps
        n_rep = min(config.chunk_reps, config.reps - rep_lo)
        rng = stream(config.seed, chunk)

        pool = _CellPool(n_rep, rep_lo, float(config.x0))
        heap = []
        if total_rate > 0:
            first_t = rng.exponential(1.0 / total_rate, n_rep)
            first_div = rng.random(n_rep) < p_div
            for slot in range(n_rep):
                heapq.heappush(heap, (float(first_t[slot]), slot, bool(first_div[slot])))
        rep_counts = np.ones(n_rep, dtype=np.int64)  # alive cells per local rep
        chunk_dead = set()

        def schedule(slot: int, t_now: float):
            if total_rate > 0:
                life = rng.exponential(1.0 / total_rate)
                div = rng.random() < p_div
                heapq.heappush(heap, (t_now + life, slot, div))

        if 0.0 in rec_lookup:
            _record(rec_lookup[0.0], pool, n_out, c_out, snaps)

        for t1 in grid_times:
            while heap and heap[0][0] <= t1:
                t_ev, slot, div = heapq.heappop(heap)
                if not pool.alive[slot]:
                    continue
                pool.x[slot:slot + 1] = _euler_advance(
                    rng, model, cap, pool.x[slot:slot + 1], t_ev - pool.synced[slot])
                pool.synced[slot] = t_ev
                local = int(pool.rep[slot]) - rep_lo
                if div:
                    xv = float(pool.x[slot])
                    if math.isfinite(xv):
                        theta = K.sample(model.kernel_at(xv), rng)
                        c1, c2 = _daughter_loads(xv, theta)
                    else:
                        c1 = c2 = float("inf")
                    pool.x[slot] = c1      # parent slot becomes daughter 1
                    schedule(slot, t_ev)
                    slot2 = pool.add(int(pool.rep[slot]), c2, t_ev)
                    schedule(slot2, t_ev)
                    rep_counts[local] += 1
                    if rep_counts[local] > config.max_cells and local not in chunk_dead:
                        chunk_dead.add(local)
                        sel = pool.rep[:pool.used] == rep_lo + local
                        pool.alive[:pool.used][sel] = False
                else:
                    if q_accept is None or q_accept(float(pool.x[slot]), rng.random()):
                        pool.alive[slot] = False
                        rep_counts[local] -= 1
                    else:
                        schedule(slot, t_ev)  # phantom death: redraw the clock

            idx = np.nonzero(pool.alive[:pool.used])[0]
            if idx.size:
                pool.x[idx] = _euler_advance(rng, model, cap, pool.x[idx],
                                             t1 - pool.synced[idx])
                pool.synced[idx] = t1
            k = rec_lookup.get(float(t1))
            if k is not None:
                _record(k, pool, n_out, c_out, snaps)
        aborted.extend(sorted(rep_lo + loc for loc in chunk_dead))

    return n_out, c_out, snaps, aborted


def _record(k, pool: "_CellPool", n_out, c_out, snaps):
    live = pool.alive[:pool.used]
    live_rep = pool.rep[:pool.used][live]
    live_x = pool.x[:pool.used][live]
    if live_rep.size:
        np.add.at(n_out[:, k], live_rep, 1)
        np.add.at(c_out[:, k], live_rep, np.isfinite(live_x).astype(np.int64))
    if snaps is not None:
        snaps[k][0].extend(live_rep.tolist())
        snaps[k][1].extend(live_x.tolist())


# ---------------------------------------------------------------------------
# public entry points


def simulate_population(model: ModelFunctions, r: float, q, config: SimConfig
                        ) -> PopulationTrajectory:
    """Simulate the branching cell population and return counts (and
    optional per-cell loads) at the record times.

    q may be a constant rate or a pair (q_func, q_sup) thinned against its
    supremum; all analytic cross-checks use constants.
    """
    if r < 0:
        raise ParabranchError("division rate r must be >= 0")
    if model.is_pure_multiplicative:
        n_out, c_out, snaps, aborted = _run_multiplicative(model, r, q, config)
    else:
        n_out, c_out, snaps, aborted = _run_euler(model, r, q, config)
    if snaps is not None:
        snaps = [(np.asarray(ri, dtype=np.int64), np.asarray(xi, dtype=float))
                 for ri, xi in snaps]
    return PopulationTrajectory(
        record_times=config.records, n_cells=n_out, c_cells=c_out,
        snapshots=snaps, aborted=aborted, reps=config.reps)


def infected_fraction(trajectory: PopulationTrajectory, mode: str,
                      eta: float = None, eps: float = None, r: float = None,
                      rate: float = None, statement_exponent: bool = False):
    """Fraction of cells (within V_t) whose load exceeds the mode's
    threshold, averaged over replications with its standard error.

    Modes: 'above_growing' counts loads above e^{rate * t}, where rate
    defaults to eta - eps (the proof's exponent) or eta/(2 r) - eps when
    statement_exponent is set; 'above_const' counts loads above eps;
    'positive' counts loads above 0.  Replications with no cells alive
    contribute fraction 0.  Returns (times, mean, se, per_rep).
    """
    times = trajectory.record_times
    fractions = np.zeros((trajectory.reps, len(times)))
    for k, t in enumerate(times):
        if mode == "above_growing":
            rho = rate
            if rho is None:
                if eta is None or eps is None:
                    raise ParabranchError("above_growing needs eta and eps (or rate)")
                rho = (eta / (2.0 * r) - eps) if statement_exponent else (eta - eps)
            thr = math.exp(rho * t)
        elif mode == "above_const":
            if eps is None:
                raise ParabranchError("above_const needs eps")
            thr = eps
        elif mode == "positive":
            thr = 0.0
        else:
            raise ParabranchError(f"unknown infected-fraction mode {mode!r}")
        counts = trajectory.count_above(t, thr)
        n_t = trajectory.n_cells[:, k].astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(n_t >= 1, counts / np.maximum(n_t, 1.0), 0.0)
        fractions[:, k] = frac
    means = np.empty(len(times))
    ses = np.empty(len(times))
    for k in range(len(times)):
        means[k], ses[k] = mean_and_se(fractions[:, k])
    return times, means, ses, fractions
