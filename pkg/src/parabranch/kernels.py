"""Partitioning kernels: symmetric laws on (0,1) for the parasite fraction
a daughter cell inherits at division.

Five families are provided (deterministic two-point, symmetric Beta,
uniform, equal sharing, finite point), each with closed-form Mellin
transform E[Theta^lam], log-moments and minimal-share expectation
E[min(Theta, 1-Theta)].  All kernels are immutable and safe to share
across threads; sampling takes an externally owned numpy Generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import KernelFormatError, ParabranchError

__all__ = [
    "PartitionKernel",
    "Deterministic",
    "BetaSym",
    "Uniform",
    "Equal",
    "FinitePoint",
    "KernelMoments",
    "sample",
    "mellin",
    "mellin_dlam",
    "moments",
    "incomplete_beta",
    "z_of_alpha",
    "density",
    "atoms",
    "parse_kernel",
    "format_kernel",
]

NEG_INF = float("-inf")


def _exp(v: float) -> float:
    """math.exp saturating to +inf instead of raising (bracket-expansion
    code probes far into the overflow region on purpose)."""
    try:
        return math.exp(v)
    except OverflowError:
        return float("inf")


@dataclass(frozen=True)
class PartitionKernel:
    """Base class; use one of the concrete families below."""

    def lambda_minus(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Deterministic(PartitionKernel):
    """Law (delta_z + delta_{1-z})/2 with z in (0, 1/2].

    z = 1/2 is allowed and then coincides with Equal.
    """

    z: float

    def __post_init__(self):
        if not (0.0 < self.z <= 0.5):
            raise ParabranchError(f"deterministic kernel needs z in (0, 1/2], got {self.z}")

    def lambda_minus(self) -> float:
        return NEG_INF


@dataclass(frozen=True)
class BetaSym(PartitionKernel):
    """Density c_alpha * theta^alpha (1-theta)^alpha on (0,1), alpha > -1."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > -1.0 and math.isfinite(self.alpha)):
            raise ParabranchError(f"symmetric-beta kernel needs alpha > -1, got {self.alpha}")

    def lambda_minus(self) -> float:
        return -(self.alpha + 1.0)


@dataclass(frozen=True)
class Uniform(PartitionKernel):
    """Uniform law on (0,1)."""

    def lambda_minus(self) -> float:
        return -1.0


@dataclass(frozen=True)
class Equal(PartitionKernel):
    """Point mass at 1/2 (symmetric sharing)."""

    def lambda_minus(self) -> float:
        return NEG_INF


@dataclass(frozen=True)
class FinitePoint(PartitionKernel):
    """Law sum_i p_i (delta_{z_i} + delta_{1-z_i}) with z_i in (0, 1/2) strictly.

    Weights must satisfy sum 2 p_i = 1 within 1e-12; anything else is
    rejected at construction.
    """

    modes: tuple = field()  # tuple of (z_i, p_i)

    def __post_init__(self):
        modes = tuple((float(z), float(p)) for z, p in self.modes)
        if not modes:
            raise ParabranchError("finite-point kernel needs at least one mode")
        for z, p in modes:
            if not (0.0 < z < 0.5):
                raise ParabranchError(f"finite-point mode z={z} outside (0, 1/2)")
            if not p > 0.0:
                raise ParabranchError(f"finite-point weight p={p} must be positive")
        total = 2.0 * math.fsum(p for _, p in modes)
        if abs(total - 1.0) > 1e-12:
            raise ParabranchError(
                f"finite-point weights sum to {total} (2*sum p_i), expected 1 within 1e-12")
        object.__setattr__(self, "modes", modes)

    def lambda_minus(self) -> float:
        return NEG_INF


@dataclass(frozen=True)
class KernelMoments:
    lambda_minus: float
    log_moment: float      # E[ln Theta]
    log2_moment: float     # E[ln^2 Theta]
    min_share: float       # E[min(Theta, 1-Theta)]


# ---------------------------------------------------------------------------
# special functions


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete Beta B(x; a, b) = int_0^x t^(a-1)(1-t)^(b-1) dt."""
    if not (0.0 <= x <= 1.0):
        raise ParabranchError(f"incomplete_beta: x={x} outside [0, 1]")
    if not (a > 0.0 and b > 0.0):
        raise ParabranchError(f"incomplete_beta: need a, b > 0, got a={a}, b={b}")
    return float(special.betainc(a, b, x) * math.exp(special.betaln(a, b)))


def z_of_alpha(alpha: float) -> float:
    """Deterministic-kernel parameter with the same minimal-share expectation
    as BetaSym(alpha).

    Equals 2 c_alpha B(1/2; alpha+2, alpha+1), which simplifies to the
    regularized incomplete beta I_{1/2}(alpha+2, alpha+1).
    """
    if not alpha > -1.0:
        raise ParabranchError(f"z_of_alpha: need alpha > -1, got {alpha}")
    return float(special.betainc(alpha + 2.0, alpha + 1.0, 0.5))


# ---------------------------------------------------------------------------
# Mellin transform and moments


def mellin(kernel: PartitionKernel, lam: float) -> float:
    """E[Theta^lam]; +inf when lam <= lambda_minus(kernel)."""
    if lam <= kernel.lambda_minus():
        return float("inf")
    if lam == 0.0:
        return 1.0  # exact: total mass (gammaln/fsum round-off would leak otherwise)
    if isinstance(kernel, Uniform):
        return 1.0 / (1.0 + lam)
    if isinstance(kernel, Equal):
        return _exp(-lam * math.log(2.0))
    if isinstance(kernel, Deterministic):
        z = kernel.z
        return 0.5 * (_exp(lam * math.log(z)) + _exp(lam * math.log1p(-z)))
    if isinstance(kernel, FinitePoint):
        terms = [p * (_exp(lam * math.log(z)) + _exp(lam * math.log1p(-z)))
                 for z, p in kernel.modes]
        try:
            return math.fsum(terms)
        except OverflowError:
            return float("inf")
    if isinstance(kernel, BetaSym):
        a = kernel.alpha
        return _exp(float(
            special.gammaln(a + 1.0 + lam) + special.gammaln(2.0 * a + 2.0)
            - special.gammaln(a + 1.0) - special.gammaln(2.0 * a + 2.0 + lam)))
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


def mellin_dlam(kernel: PartitionKernel, lam: float) -> float:
    """d/dlam E[Theta^lam] = E[Theta^lam ln Theta]; -inf past lambda_minus."""
    if lam <= kernel.lambda_minus():
        return float("-inf")
    if isinstance(kernel, Uniform):
        return -1.0 / (1.0 + lam) ** 2
    if isinstance(kernel, Equal):
        return -math.log(2.0) * _exp(-lam * math.log(2.0))
    if isinstance(kernel, Deterministic):
        z = kernel.z
        lz, l1z = math.log(z), math.log1p(-z)
        return 0.5 * (_exp(lam * lz) * lz + _exp(lam * l1z) * l1z)
    if isinstance(kernel, FinitePoint):
        terms = [p * (_exp(lam * math.log(z)) * math.log(z)
                      + _exp(lam * math.log1p(-z)) * math.log1p(-z))
                 for z, p in kernel.modes]
        try:
            return math.fsum(terms)
        except OverflowError:
            return float("-inf")
    if isinstance(kernel, BetaSym):
        a = kernel.alpha
        return mellin(kernel, lam) * float(
            special.digamma(a + 1.0 + lam) - special.digamma(2.0 * a + 2.0 + lam))
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


def moments(kernel: PartitionKernel) -> KernelMoments:
    """Closed-form lambda_minus, E[ln Theta], E[ln^2 Theta], E[min(Theta,1-Theta)]."""
    if isinstance(kernel, Uniform):
        return KernelMoments(-1.0, -1.0, 2.0, 0.25)
    if isinstance(kernel, Equal):
        l2 = math.log(2.0)
        return KernelMoments(NEG_INF, -l2, l2 * l2, 0.5)
    if isinstance(kernel, Deterministic):
        z = kernel.z
        lz, l1z = math.log(z), math.log1p(-z)
        return KernelMoments(NEG_INF, 0.5 * (lz + l1z), 0.5 * (lz * lz + l1z * l1z), z)
    if isinstance(kernel, FinitePoint):
        logm = math.fsum(p * (math.log(z) + math.log1p(-z)) for z, p in kernel.modes)
        log2m = math.fsum(
            p * (math.log(z) ** 2 + math.log1p(-z) ** 2) for z, p in kernel.modes)
        share = 2.0 * math.fsum(p * z for z, p in kernel.modes)
        return KernelMoments(NEG_INF, logm, log2m, share)
    if isinstance(kernel, BetaSym):
        a = kernel.alpha
        logm = float(special.digamma(a + 1.0) - special.digamma(2.0 * a + 2.0))
        # Var(ln Theta) = psi_1(a+1) - psi_1(2a+2) for Beta(a+1, a+1)
        log2m = float(special.polygamma(1, a + 1.0) - special.polygamma(1, 2.0 * a + 2.0)) + logm ** 2
        return KernelMoments(-(a + 1.0), logm, log2m, z_of_alpha(a))
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


# ---------------------------------------------------------------------------
# sampling

def sample(kernel: PartitionKernel, rng: np.random.Generator, size: int | None = None):
    """Draw from the kernel law.

    The draw protocol per family is fixed (it is shared with the compiled
    simulation lane): Uniform uses one uniform per draw, Equal consumes no
    randomness, Deterministic and FinitePoint use one uniform per draw,
    BetaSym one Beta variate per draw.
    """
    n = 1 if size is None else int(size)
    if isinstance(kernel, Uniform):
        out = rng.random(n)
    elif isinstance(kernel, Equal):
        out = np.full(n, 0.5)
    elif isinstance(kernel, Deterministic):
        u = rng.random(n)
        out = np.where(u < 0.5, kernel.z, 1.0 - kernel.z)
    elif isinstance(kernel, BetaSym):
        a = kernel.alpha + 1.0
        out = rng.beta(a, a, n)
    elif isinstance(kernel, FinitePoint):
        zs = np.array([z for z, _ in kernel.modes])
        ps = np.array([p for _, p in kernel.modes])
        values = np.concatenate([zs, 1.0 - zs])
        cum = np.cumsum(np.concatenate([ps, ps]))
        cum[-1] = 1.0  # guard against fsum-rounded tails
        u = rng.random(n)
        out = values[np.searchsorted(cum, u, side="right")]
    else:
        raise TypeError(f"unknown kernel type {type(kernel)!r}")
    return float(out[0]) if size is None else out


def density(kernel: PartitionKernel, thetas) -> np.ndarray:
    """Density of the absolutely continuous part on (0,1); zero for the
    atomic families (their mass sits in atoms())."""
    th = np.asarray(thetas, dtype=float)
    if np.any((th <= 0.0) | (th >= 1.0)):
        raise ParabranchError("density: evaluation points must lie in (0,1)")
    if isinstance(kernel, Uniform):
        return np.ones_like(th)
    if isinstance(kernel, BetaSym):
        a = kernel.alpha
        log_ca = float(special.gammaln(2 * a + 2) - 2 * special.gammaln(a + 1))
        return np.exp(log_ca + a * (np.log(th) + np.log1p(-th)))
    if isinstance(kernel, (Equal, Deterministic, FinitePoint)):
        return np.zeros_like(th)
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


def atoms(kernel: PartitionKernel) -> tuple:
    """Atoms of the law as (theta, mass) pairs; empty for continuous families."""
    if isinstance(kernel, Equal):
        return ((0.5, 1.0),)
    if isinstance(kernel, Deterministic):
        if kernel.z == 0.5:
            return ((0.5, 1.0),)
        return ((kernel.z, 0.5), (1.0 - kernel.z, 0.5))
    if isinstance(kernel, FinitePoint):
        out = [(z, p) for z, p in kernel.modes]
        out += [(1.0 - z, p) for z, p in kernel.modes]
        return tuple(sorted(out))
    if isinstance(kernel, (Uniform, BetaSym)):
        return ()
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


# ---------------------------------------------------------------------------
# text format:  uniform | equal | det:z=<f> | beta:alpha=<f> | points:z=<f>,p=<f>[;...]

def parse_kernel(text: str) -> PartitionKernel:
    """Parse the CLI kernel grammar; errors name the offending token."""
    s = text.strip()
    if s == "uniform":
        return Uniform()
    if s == "equal":
        return Equal()
    if s.startswith("det:"):
        return Deterministic(z=_parse_kv(s[4:], "z", s))
    if s.startswith("beta:"):
        return BetaSym(alpha=_parse_kv(s[5:], "alpha", s))
    if s.startswith("points:"):
        modes = []
        body = s[len("points:"):]
        if not body:
            raise KernelFormatError(f"kernel {text!r}: empty mode list after 'points:'")
        for part in body.split(";"):
            fields = part.split(",")
            if len(fields) != 2:
                raise KernelFormatError(
                    f"kernel {text!r}: mode {part!r} must be 'z=<float>,p=<float>'")
            z = _parse_kv(fields[0], "z", s)
            p = _parse_kv(fields[1], "p", s)
            modes.append((z, p))
        try:
            return FinitePoint(tuple(modes))
        except ParabranchError as exc:
            raise KernelFormatError(f"kernel {text!r}: {exc}") from exc
    raise KernelFormatError(
        f"kernel {text!r}: unknown family token {s.split(':', 1)[0]!r} "
        "(expected uniform | equal | det:... | beta:... | points:...)")


def _parse_kv(token: str, key: str, full: str) -> float:
    token = token.strip()
    prefix = key + "="
    if not token.startswith(prefix):
        raise KernelFormatError(f"kernel {full!r}: expected '{key}=<float>', got {token!r}")
    try:
        value = float(token[len(prefix):])
    except ValueError as exc:
        raise KernelFormatError(
            f"kernel {full!r}: bad float {token[len(prefix):]!r} for '{key}'") from exc
    if not math.isfinite(value):
        raise KernelFormatError(f"kernel {full!r}: '{key}' must be finite, got {value}")
    return value


def format_kernel(kernel: PartitionKernel) -> str:
    """Inverse of parse_kernel (round-trips within float repr)."""
    if isinstance(kernel, Uniform):
        return "uniform"
    if isinstance(kernel, Equal):
        return "equal"
    if isinstance(kernel, Deterministic):
        return f"det:z={kernel.z!r}"
    if isinstance(kernel, BetaSym):
        return f"beta:alpha={kernel.alpha!r}"
    if isinstance(kernel, FinitePoint):
        return "points:" + ";".join(f"z={z!r},p={p!r}" for z, p in kernel.modes)
    raise TypeError(f"unknown kernel type {type(kernel)!r}")
