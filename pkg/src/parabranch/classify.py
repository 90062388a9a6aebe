"""Long-time fate classification of the mean number of cells alive.

The log-load along a typical cell line is a Levy process with Laplace
exponent

    phi(lam) = lam*(g - sigma^2) + lam^2*sigma^2 + 2 r (E[Theta^lam] - 1).

Its derivative at 0, m = phi'(0+), decides whether the load in a typical
line stays finite; when m > 0 the survival index d = phi(tau_hat) + r - q
(tau_hat the minimizer of phi on (lambda_minus, 0)) decides the fate of
the mean number of non-exploded cells.  This module computes m, tau_hat,
d, the resulting regime and asymptotic rate pair, the four limiting
parameter thresholds, and the constructive two-mode kernel that rescues
survival at any infection level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from scipy import optimize

from . import kernels as K
from .errors import ParabranchError, PreconditionViolated, SearchExhausted

__all__ = [
    "ModelParams",
    "StableJumpParams",
    "RegimeReport",
    "SIGN_TOL",
    "laplace_exponent",
    "laplace_exponent_dlam",
    "growth_indicator",
    "minimize_exponent",
    "classify",
    "sufficient_survival",
    "threshold",
    "x0",
    "construct_survival_kernel",
]

# absolute tolerance for sign decisions on m and d; reports carry a
# boundary flag when a decisive quantity falls inside it
SIGN_TOL = 1e-12

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Scalar model parameters: drift g, diffusion sigma, division rate r,
    death rate q (all per unit time, sigma per sqrt time)."""

    g: float
    sigma: float = 0.0
    r: float = 1.0
    q: float = 0.0

    def __post_init__(self):
        if not self.r > 0.0:
            raise ParabranchError(f"division rate r must be > 0, got {self.r}")
        if self.sigma < 0.0:
            raise ParabranchError(f"sigma must be >= 0, got {self.sigma}")
        if self.q < 0.0:
            raise ParabranchError(f"death rate q must be >= 0, got {self.q}")


@dataclass(frozen=True)
class StableJumpParams:
    """Parameters (b, c) of the stable positive-jump measure
    c*b*(b+1)/Gamma(1-b) * z^(-2-b) dz with b in (-1,0) and c < 0."""

    b: float
    c: float

    def __post_init__(self):
        if not (-1.0 < self.b < 0.0):
            raise ParabranchError(f"stability index b must lie in (-1,0), got {self.b}")
        if not self.c < 0.0:
            raise ParabranchError(f"stable constant c must be < 0, got {self.c}")


@dataclass(frozen=True)
class RegimeReport:
    m: float
    lambda_minus: float
    tau_hat: Optional[float]
    phi_tau_hat: Optional[float]
    d: Optional[float]
    regime: str            # MeanExtinction | MeanSurvival | CriticalBirthDeath | Unclassified
    rate_exp: float
    rate_poly: float
    boundary_flag: bool

    def to_json_dict(self) -> dict:
        def enc(v):
            if v is None or isinstance(v, str):
                return v
            if math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v
        return {
            "m": enc(self.m),
            "lambda_minus": enc(self.lambda_minus),
            "tau_hat": enc(self.tau_hat),
            "phi_tau_hat": enc(self.phi_tau_hat),
            "d": enc(self.d),
            "regime": self.regime,
            "rate_exp": enc(self.rate_exp),
            "rate_poly": enc(self.rate_poly),
            "boundary_flag": self.boundary_flag,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


# ---------------------------------------------------------------------------
# phi and its derivative


def laplace_exponent(params: ModelParams, kernel: K.PartitionKernel, lam: float) -> float:
    """phi(lam); +inf when lam <= lambda_minus(kernel)."""
    mel = K.mellin(kernel, lam)
    if math.isinf(mel):
        return float("inf")
    s2 = params.sigma ** 2
    return lam * (params.g - s2) + lam * lam * s2 + 2.0 * params.r * (mel - 1.0)


def laplace_exponent_dlam(params: ModelParams, kernel: K.PartitionKernel, lam: float) -> float:
    """phi'(lam) via the analytic family-specific E[Theta^lam ln Theta]."""
    dm = K.mellin_dlam(kernel, lam)
    s2 = params.sigma ** 2
    return (params.g - s2) + 2.0 * lam * s2 + 2.0 * params.r * dm


def growth_indicator(params: ModelParams, kernel: K.PartitionKernel) -> float:
    """m = phi'(0+) = g - sigma^2 + 2 r E[ln Theta]."""
    return params.g - params.sigma ** 2 + 2.0 * params.r * K.moments(kernel).log_moment


def minimize_exponent(params: ModelParams, kernel: K.PartitionKernel):
    """Locate tau_hat = argmin phi on (lambda_minus, 0) and return
    (tau_hat, phi(tau_hat)).

    phi is convex with phi'(0) = m > 0 required, so tau_hat is the unique
    root of phi' left of 0; found by bracket expansion plus Brent on the
    analytic derivative.
    """
    m = growth_indicator(params, kernel)
    lam_minus = kernel.lambda_minus()
    if m <= 0.0:
        raise PreconditionViolated(f"minimize_exponent: growth indicator m={m} <= 0")
    if lam_minus == 0.0:
        raise PreconditionViolated("minimize_exponent: lambda_minus = 0")

    dphi = lambda lam: laplace_exponent_dlam(params, kernel, lam)
    lo = _negative_derivative_point(dphi, lam_minus)
    tau = optimize.brentq(dphi, lo, 0.0, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    resid = dphi(tau)
    tol = 1e-9 * (1.0 + abs(params.g) + params.r)
    if not abs(resid) <= tol:
        # brentq stops on interval width; one extra secant shot if the
        # derivative is extremely steep (sub-float-floor modes)
        d2 = (dphi(tau + 1e-9) - dphi(tau - 1e-9)) / 2e-9
        if math.isfinite(d2) and d2 > 0:
            tau2 = tau - resid / d2
            if lam_minus < tau2 < 0 and abs(dphi(tau2)) < abs(resid):
                tau = tau2
                resid = dphi(tau)
        if not abs(resid) <= tol:
            raise ParabranchError(
                f"minimize_exponent: stationarity residual {resid} above {tol}")
    return tau, laplace_exponent(params, kernel, tau)


def _negative_derivative_point(dphi, lam_minus: float) -> float:
    """Find lam in (lambda_minus, 0) with finite phi'(lam) < 0.

    Walks left (geometric when lambda_minus = -inf, bisecting toward
    lambda_minus otherwise); backs off toward 0 on overflow.  A finite
    negative band always exists because phi' is continuous, increasing,
    and tends to -inf at lambda_minus.
    """
    hi = 0.0
    x = -1.0 if lam_minus == float("-inf") else 0.5 * lam_minus
    for _ in range(400):
        v = dphi(x)
        if math.isfinite(v):
            if v < 0.0:
                return x
            hi = x
            x = 2.0 * x if lam_minus == float("-inf") else 0.5 * (x + lam_minus)
        else:
            # overflowed: retreat halfway toward the last finite side
            x = 0.5 * (x + hi)
    raise ParabranchError("could not bracket the minimizer of phi")


# ---------------------------------------------------------------------------
# classification


def _m_and_d(params: ModelParams, kernel: K.PartitionKernel):
    """(m, tau_hat, phi_tau, d) with the last three None when m <= tol."""
    m = growth_indicator(params, kernel)
    if m > SIGN_TOL and kernel.lambda_minus() < 0.0:
        tau, phi_tau = minimize_exponent(params, kernel)
        return m, tau, phi_tau, phi_tau + params.r - params.q
    return m, None, None, None


def classify(params: ModelParams, kernel: K.PartitionKernel,
             stable: Optional[StableJumpParams] = None) -> RegimeReport:
    """Fate of E[c_t] plus the asymptotic rate pair (exp rate, poly power).

    The stable-jump parameters do not enter phi, m or d (they are hidden in
    the limiting constants), so `stable` is accepted and ignored by design.
    """
    del stable
    r, q = params.r, params.q
    lam_minus = kernel.lambda_minus()
    m, tau, phi_tau, d = _m_and_d(params, kernel)

    boundary = abs(m) <= SIGN_TOL or abs(r - q) <= SIGN_TOL
    if d is not None:
        boundary = boundary or abs(d) <= SIGN_TOL

    # rate pair per the three regimes (reported even when q >= r)
    if m < -SIGN_TOL:
        rate = (r - q, 0.0)
    elif abs(m) <= SIGN_TOL:
        rate = (r - q, -0.5)
    else:
        rate = (d if d is not None else float("nan"), -1.5)

    if abs(r - q) <= SIGN_TOL:
        regime = "CriticalBirthDeath"
    elif abs(m) <= SIGN_TOL and lam_minus == 0.0:
        regime = "Unclassified"
    elif q > r:
        regime = "MeanExtinction"
    elif m <= SIGN_TOL:
        regime = "MeanSurvival"
    elif d is None:
        # m > 0 with lambda_minus = 0: phi has no interior minimizer
        regime = "Unclassified"
    else:
        regime = "MeanSurvival" if d > SIGN_TOL else "MeanExtinction"

    return RegimeReport(
        m=m, lambda_minus=lam_minus, tau_hat=tau, phi_tau_hat=phi_tau, d=d,
        regime=regime, rate_exp=rate[0], rate_poly=rate[1], boundary_flag=boundary)


def sufficient_survival(params: ModelParams, kernel: K.PartitionKernel) -> bool:
    """Sufficient condition for E[c_t] -> infinity computed from bounding
    parameters (g(x) <= g x, q(x) <= q) and a stochastically dominating
    kernel: true iff m <= 0 or (m > 0 and d > 0).  Requires q < r.
    """
    if params.q >= params.r:
        raise PreconditionViolated(
            f"sufficient_survival requires q < r (got q={params.q}, r={params.r})")
    m, _, _, d = _m_and_d(params, kernel)
    if m <= SIGN_TOL:
        return True
    return d is not None and d > SIGN_TOL


# ---------------------------------------------------------------------------
# limiting thresholds (one per parameter, classification flips exactly there)


def threshold(which: str, params: ModelParams, kernel: K.PartitionKernel) -> float:
    """Limiting value of one parameter (the others held fixed) at which the
    fate of E[c_t] flips:

       q >= q_lim, r <= r_lim, g >= g_lim, sigma <= sigma_lim  -> extinction

    (with sigma_lim = 0 meaning survival for every sigma and sigma_lim = inf
    meaning extinction for every sigma).  Computed from the structural case
    analysis plus bisection on d, which is monotone in each parameter; the
    family-specific closed forms are deliberately not used here so they can
    serve as independent oracles.
    """
    if which == "q":
        return _q_lim(params, kernel)
    if which == "r":
        return _r_lim(params, kernel)
    if which == "g":
        return _g_lim(params, kernel)
    if which == "sigma":
        return _sigma_lim(params, kernel)
    raise ParabranchError(f"threshold: unknown parameter {which!r}")


def _q_lim(params: ModelParams, kernel) -> float:
    m = growth_indicator(params, kernel)
    if m <= 0.0:
        return params.r
    _, phi_tau = minimize_exponent(params, kernel)
    return max(phi_tau + params.r, 0.0)


def _d_of(params: ModelParams, kernel) -> float:
    """d when m > 0, else r - q (the positive limit of d at the m = 0
    boundary, so threshold brackets stay well-defined under cancellation)."""
    if growth_indicator(params, kernel) <= 0.0:
        return params.r - params.q
    _, phi_tau = minimize_exponent(params, kernel)
    return phi_tau + params.r - params.q


def _r_lim(params: ModelParams, kernel) -> float:
    g, s, q = params.g, params.sigma, params.q
    eln_inv = -K.moments(kernel).log_moment  # E[ln(1/Theta)] > 0
    eta = (g - s * s) / (2.0 * eln_inv)
    if eta <= q:
        return q
    # d is strictly increasing in r on (q, eta); negative near q, positive near eta
    f = lambda r: _d_of(ModelParams(g, s, r, q), kernel)
    lo, hi = _shrink_bracket(f, q, eta)
    if lo is None:
        return q  # d > 0 throughout: flip is the birth-death boundary
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-10, maxiter=500)


def _g_lim(params: ModelParams, kernel) -> float:
    s, r, q = params.sigma, params.r, params.q
    if r <= q:
        return 0.0
    g_star = s * s - 2.0 * r * K.moments(kernel).log_moment  # m = 0 here
    f = lambda g: _d_of(ModelParams(g, s, r, q), kernel)
    lo = g_star * (1.0 + 1e-12) + 1e-300
    hi = max(2.0 * abs(g_star), g_star + r, 1.0)
    for _ in range(300):
        if f(hi) < 0.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ParabranchError("g_lim: could not bracket d = 0")
    if f(lo) <= 0.0:
        return lo  # flip immediately past the m = 0 point
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-10, maxiter=500)


def _sigma_lim(params: ModelParams, kernel) -> float:
    g, r, q = params.g, params.r, params.q
    if r <= q:
        return float("inf")
    two_r_eln = 2.0 * r * K.moments(kernel).log_moment
    s2_star = g + two_r_eln  # m = 0 at sigma^2 = s2_star
    if s2_star <= 0.0:
        return 0.0
    f = lambda s2: _d_of(ModelParams(g, math.sqrt(s2), r, q), kernel)
    if f(0.0) >= 0.0:
        return 0.0  # d >= 0 already without diffusion: survival for all sigma > 0
    lo, hi = _shrink_bracket(f, 0.0, s2_star)
    if lo is None:
        raise ParabranchError("sigma_lim: d stayed negative up to the m=0 point")
    s2 = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-10, maxiter=500)
    return math.sqrt(s2)


def _shrink_bracket(f, a: float, b: float):
    """Bracket a sign change of f on the open interval (a, b), where f is
    expected negative near a and positive near b.  Returns (lo, hi), or
    (None, None) when f is already nonnegative near a."""
    span = b - a
    lo = a + 1e-12 * max(1.0, span)
    if f(lo) >= 0.0:
        return None, None
    for frac in (1e-12, 1e-9, 1e-6, 1e-3, 1e-2, 0.1):
        hi = b - frac * span
        if hi > lo and f(hi) > 0.0:
            return lo, hi
    return None, None


# ---------------------------------------------------------------------------
# equal-sharing fixed point


def x0(q_over_r: float) -> float:
    """Unique x > 2 solving x (1 + ln 2 - ln x) = 1 + q/r, for q/r in [0, 1).

    Bracket-expanded Brent; the residual at the returned value is at most
    1e-12 (asserted).
    """
    if not (0.0 <= q_over_r < 1.0):
        raise PreconditionViolated(f"x0: q/r must lie in [0, 1), got {q_over_r}")
    target = 1.0 + q_over_r
    f = lambda x: x * (1.0 + LN2 - math.log(x)) - target
    hi = 4.0
    while f(hi) > 0.0:
        hi *= 2.0
    root = optimize.brentq(f, 2.0, hi, xtol=1e-300, rtol=8.9e-16, maxiter=300)
    if abs(f(root)) > 1e-12:
        raise ParabranchError(f"x0: residual {f(root)} above 1e-12")
    return root


# ---------------------------------------------------------------------------
# constructive survival kernel (two-mode rescue at any infection level)


def construct_survival_kernel(params: ModelParams, vartheta: float) -> K.PartitionKernel:
    """Build a partitioning kernel with minimal-share expectation vartheta
    under which the population mean survives, for any drift g (sigma = 0).

    Easy case: g <= -r ln(vartheta(1-vartheta)) already makes m <= 0 for the
    deterministic kernel at vartheta.  Otherwise a two-mode kernel with one
    tiny mode z1 is searched: first along the geometric schedule z1 <- z1/2
    from vartheta/8 with weight p1 = z1^(1/lnln(1/z1)); if that exhausts the
    float range, z1 is pinned at the float floor and the weight is swept up
    to its cap (1/2 - vartheta)/(1 - 2 z1).  Raises SearchExhausted (with the
    last survival index) when no representable candidate survives.
    """
    if params.sigma != 0.0:
        raise PreconditionViolated("construct_survival_kernel requires sigma = 0")
    if params.q >= params.r:
        raise PreconditionViolated(
            f"construct_survival_kernel requires q < r (got q={params.q}, r={params.r})")
    if not (0.0 < vartheta < 0.5):
        raise PreconditionViolated(f"vartheta must lie in (0, 1/2), got {vartheta}")

    g, r = params.g, params.r
    if g <= -r * (math.log(vartheta) + math.log1p(-vartheta)):
        return K.Deterministic(vartheta)

    last_d = None

    def attempt(z1: float, p1: float):
        nonlocal last_d
        p2 = 0.5 - p1
        if not (p1 > 0.0 and p2 > 0.0):
            return None
        z2 = (vartheta - 2.0 * p1 * z1) / (2.0 * p2)
        if not (0.0 < z2 < 0.5):
            return None
        kern = K.FinitePoint(((z1, p1), (z2, p2)))
        report = classify(params, kern)
        last_d = report.d if report.d is not None else last_d
        return kern if report.regime == "MeanSurvival" else None

    # phase 1: the geometric schedule with the lnln weight
    z1 = vartheta / 8.0
    while z1 >= 5e-324:
        lnln = math.log(math.log(1.0 / z1)) if z1 < 1.0 / math.e else 0.0
        if lnln > 0.0:
            kern = attempt(z1, z1 ** (1.0 / lnln))
            if kern is not None:
                return kern
        z1 *= 0.5
        if z1 == 0.0:
            break

    # phase 2: float-floor z1, weight swept toward its cap
    for z1 in (1e-308, 5e-324):
        cap = (0.5 - vartheta) / (1.0 - 2.0 * z1)
        for frac in (0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 1.0 - 1e-6, 1.0 - 1e-9, 1.0 - 1e-12):
            kern = attempt(z1, cap * frac)
            if kern is not None:
                return kern

    raise SearchExhausted(
        f"no representable two-mode kernel with min-share {vartheta} survives "
        f"g={g}, r={r}, q={params.q} (last survival index d={last_d})",
        last_d=last_d)
