"""Parameter sweeps: regime classification over (g/r, kernel-parameter)
grids for the paired deterministic/random families, survival-boundary
curves, and finite-point boundary scatters.

All sweeps work at sigma = 0, r = 1 (the classification depends on g and q
only through g/r and q/r), with q = r * (q/r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import kernels as K
from ._rng import stream
from .classify import ModelParams, classify, growth_indicator, minimize_exponent
from .errors import ParabranchError

__all__ = [
    "AxisSpec",
    "PhaseGrid",
    "sweep",
    "survival_boundary",
    "multimodal_scatter",
    "DEFAULT_LOG_G_OVER_R",
    "DEFAULT_ALPHA",
    "scatter_rows_to_csv",
]

# defaults match the figure ranges: natural-log g/r in [0, 6], alpha in
# [-0.99, 20], 200 x 200 cells
DEFAULT_LOG_G_OVER_R = (0.0, 6.0, 200)
DEFAULT_ALPHA = (-0.99, 20.0, 200)


@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    steps: int
    log_scaled: bool = False

    def __post_init__(self):
        if self.steps < 2 or not self.hi > self.lo:
            raise ParabranchError("axis needs hi > lo and at least 2 steps")

    def values(self) -> np.ndarray:
        pts = np.linspace(self.lo, self.hi, self.steps)
        return np.exp(pts) if self.log_scaled else pts


@dataclass
class PhaseGrid:
    """Row-major (g/r major, parameter minor) paired classification grid."""

    g_over_r: np.ndarray
    param: np.ndarray
    q_over_r: float
    family: str
    m_det: np.ndarray
    d_det: np.ndarray
    regime_det: np.ndarray      # '<U16'
    m_rand: np.ndarray
    d_rand: np.ndarray
    regime_rand: np.ndarray
    color: np.ndarray           # green | orange | red | invalid
    columns: tuple = ("g_over_r", "param", "m_det", "d_det", "regime_det",
                      "m_rand", "d_rand", "regime_rand", "color")

    def to_csv_rows(self):
        for i, gr in enumerate(self.g_over_r):
            for j, a in enumerate(self.param):
                yield (gr, a, self.m_det[i, j], self.d_det[i, j],
                       self.regime_det[i, j], self.m_rand[i, j],
                       self.d_rand[i, j], self.regime_rand[i, j],
                       self.color[i, j])


def _classify_light(g_over_r: float, q_over_r: float, kernel) -> tuple:
    """(m, d_or_nan, regime) at sigma = 0, r = 1."""
    params = ModelParams(g=g_over_r, sigma=0.0, r=1.0, q=q_over_r)
    rep = classify(params, kernel)
    d = rep.d if rep.d is not None else float("nan")
    return rep.m, d, rep.regime


def sweep(family: str, g_over_r_spec: AxisSpec, param_spec: AxisSpec,
          q_over_r: float) -> PhaseGrid:
    """Classify the paired kernels over the grid.

    family 'beta' pairs BetaSym(alpha) with Deterministic(z_alpha) per
    column (the alpha <-> z_alpha correspondence preserves the minimal
    share); family 'deterministic' sweeps Deterministic(param) alone and
    mirrors it into both sides.
    """
    if q_over_r >= 1.0:
        raise ParabranchError("sweep assumes q/r < 1 (otherwise everything is extinct)")
    grs = g_over_r_spec.values()
    pars = param_spec.values()
    shape = (len(grs), len(pars))
    m_det = np.empty(shape)
    d_det = np.empty(shape)
    m_rand = np.empty(shape)
    d_rand = np.empty(shape)
    reg_det = np.empty(shape, dtype="<U18")
    reg_rand = np.empty(shape, dtype="<U18")
    color = np.empty(shape, dtype="<U8")

    for j, a in enumerate(pars):
        if family == "beta":
            k_rand = K.BetaSym(a)
            k_det = K.Deterministic(K.z_of_alpha(a))
        elif family == "deterministic":
            k_det = K.Deterministic(a)
            k_rand = k_det
        else:
            raise ParabranchError(f"unknown sweep family {family!r}")
        for i, gr in enumerate(grs):
            m_det[i, j], d_det[i, j], reg_det[i, j] = _classify_light(gr, q_over_r, k_det)
            if k_rand is k_det:
                m_rand[i, j], d_rand[i, j], reg_rand[i, j] = \
                    m_det[i, j], d_det[i, j], reg_det[i, j]
            else:
                m_rand[i, j], d_rand[i, j], reg_rand[i, j] = \
                    _classify_light(gr, q_over_r, k_rand)
            det_surv = reg_det[i, j] == "MeanSurvival"
            rand_surv = reg_rand[i, j] == "MeanSurvival"
            if det_surv and rand_surv:
                color[i, j] = "green"
            elif rand_surv:
                color[i, j] = "orange"
            elif not det_surv:
                color[i, j] = "red"
            else:
                color[i, j] = "invalid"  # det survives, random does not: impossible

    return PhaseGrid(g_over_r=grs, param=pars, q_over_r=q_over_r, family=family,
                     m_det=m_det, d_det=d_det, regime_det=reg_det,
                     m_rand=m_rand, d_rand=d_rand, regime_rand=reg_rand, color=color)


def survival_boundary(kernel: K.PartitionKernel, q_over_r: float,
                      rel_tol: float = 1e-8) -> float:
    """Critical g/r above which the mean population goes extinct under the
    kernel: the root in g/r of d = 0 past the m = 0 point (survival holds
    for every smaller g/r).  Bisection to the requested relative tolerance.
    """
    if not 0.0 <= q_over_r < 1.0:
        raise ParabranchError("survival_boundary needs q/r in [0, 1)")

    def survives(gr: float) -> bool:
        params = ModelParams(g=gr, sigma=0.0, r=1.0, q=q_over_r)
        m = growth_indicator(params, kernel)
        if m <= 0.0:
            return True
        _, phi_tau = minimize_exponent(params, kernel)
        return phi_tau + 1.0 - q_over_r > 0.0

    g_star = -2.0 * K.moments(kernel).log_moment  # m = 0 at this g/r
    lo = g_star
    hi = max(2.0 * g_star, g_star + 1.0)
    for _ in range(600):
        if not survives(hi):
            break
        lo = hi
        hi *= 2.0
    else:
        raise ParabranchError("survival_boundary: no extinction up to huge g/r")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if survives(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def multimodal_scatter(n_modes: int, draws: int, q_over_r: float, seed: int
                       ) -> list:
    """(min-share, boundary) scatter for random finite-point kernels.

    Mode locations are uniform on (0, 1/2), weights uniform then normalized
    to sum 2 p_i = 1; one row per draw: (vartheta, boundary, n_modes, seed,
    draw_index).
    """
    if n_modes < 1 or draws < 1:
        raise ParabranchError("need n_modes >= 1 and draws >= 1")
    rng = stream(seed, 0)
    rows = []
    for k in range(draws):
        zs = rng.random(n_modes) * 0.5
        zs = np.clip(zs, 1e-12, 0.5 - 1e-12)
        ws = rng.random(n_modes)
        ps = ws / (2.0 * math.fsum(ws))
        kern = K.FinitePoint(tuple(zip(zs.tolist(), ps.tolist())))
        vt = K.moments(kern).min_share
        b = survival_boundary(kern, q_over_r)
        rows.append((vt, b, n_modes, seed, k))
    return rows


SCATTER_COLUMNS = ("vartheta", "boundary", "n_modes", "seed", "draw_index")


def scatter_rows_to_csv(rows) -> str:
    out = [",".join(SCATTER_COLUMNS)]
    for vt, b, n, seed, k in rows:
        out.append(f"{vt:.17g},{b:.17g},{n},{seed},{k}")
    return "\n".join(out) + "\n"
