"""Numerical checkers for the hypotheses of the infected-fraction results:
load-may-reach-zero (LN0-type), no-explosion (SN-infinity-type), the
kernel lower bound, and the three drift criteria.

All conditions are asymptotic (x -> 0 or x -> infinity); evaluating them
on a finite grid can only report holds_on_grid / fails_on_grid, never
prove the limit, and the verdict vocabulary makes that explicit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, interpolate

from . import kernels as K
from .errors import ParabranchError
from .simulate import ModelFunctions

__all__ = [
    "ConditionReport",
    "check_LN0",
    "check_SNinf",
    "check_LB",
    "I_a",
    "drift_criterion",
    "assumption_D",
    "parse_model_expr",
]


@dataclass
class ConditionReport:
    condition: str
    verdict: str                      # holds_on_grid | fails_on_grid | inconclusive
    witness: Optional[dict] = None
    evaluations: list = field(default_factory=list)   # rows of (x, lhs, rhs)

    def to_json_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "witness": self.witness,
            "evaluations": [
                {"x": x, "lhs": _enc(l), "rhs": _enc(r)} for x, l, r in self.evaluations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _enc(v):
    if v is None or isinstance(v, str):
        return v
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _mellin_one_minus_a(model: ModelFunctions, x: float, a: float) -> float:
    return K.mellin(model.kernel_at(x), 1.0 - a)


def _load_zero_lhs(model: ModelFunctions, r: float, a: float, x: float) -> float:
    return (float(model.drift(x)) / x
            - a * float(model.diffusion2(x)) / x ** 2
            - 2.0 * r * (1.0 - _mellin_one_minus_a(model, x, a)) / (1.0 - a))


def check_LN0(model: ModelFunctions, r: float, a: float, eta: float,
              x_grid: Sequence[float]) -> ConditionReport:
    """Check, on a decreasing grid of small x, the load-may-reach-zero
    condition

        g(x)/x - a sigma^2(x)/x^2 - 2r(1 - E[Theta^{1-a}(x)])/(1-a)
            <= -ln(1/x) (ln ln(1/x))^{1+eta}.

    Grid points must satisfy x < 1/e so the right side is defined.
    """
    if not (0.0 < a < 1.0):
        raise ParabranchError(f"check_LN0: a must lie in (0,1), got {a}")
    if not eta > 0.0:
        raise ParabranchError(f"check_LN0: eta must be > 0, got {eta}")
    xs = [float(x) for x in x_grid]
    if not xs:
        return ConditionReport("LN0", "inconclusive")
    rows, bad = [], None
    for x in xs:
        if not (0.0 < x < math.exp(-1.0)):
            raise ParabranchError(f"check_LN0: grid point {x} not in (0, 1/e)")
        lhs = _load_zero_lhs(model, r, a, x)
        lnln = math.log(math.log(1.0 / x))
        rhs = -math.log(1.0 / x) * lnln ** (1.0 + eta)
        rows.append((x, lhs, rhs))
        if bad is None and not lhs <= rhs:
            bad = {"x": x, "lhs": lhs, "rhs": rhs, "a": a, "eta": eta}
    if bad is not None:
        return ConditionReport("LN0", "fails_on_grid", bad, rows)
    return ConditionReport("LN0", "holds_on_grid", {"a": a, "eta": eta}, rows)


def I_a(model: ModelFunctions, a: float, x: float) -> float:
    """No-explosion integral
    (a/x^2) * sum_k w_k z_k^2 * int_0^1 (1-v) / (1 + z_k v / x)^(1+a) dv,
    inner integral by adaptive quadrature to 1e-10 absolute."""
    if not x > 0:
        raise ParabranchError(f"I_a: x must be > 0, got {x}")
    if not (0.0 < a < 1.0):
        raise ParabranchError(f"I_a: a must lie in (0,1), got {a}")
    total = 0.0
    for z, w in model.pi:
        if w == 0.0:
            continue
        inner, _ = integrate.quad(
            lambda v, zz=z: (1.0 - v) / (1.0 + zz * v / x) ** (1.0 + a),
            0.0, 1.0, epsabs=1e-10, epsrel=1e-12, limit=200)
        total += w * z * z * inner
    return a / x ** 2 * total


def check_SNinf(model: ModelFunctions, r: float, a: float,
                f_margin: Callable[[float], float], x_grid: Sequence[float],
                ratio_threshold: float = 0.1) -> ConditionReport:
    """Check, on an increasing grid of large x, that

        g(x)/x - a sigma^2(x)/x^2 - 2r(1-E[Theta^{1-a}(x)])/(1-a) - p(x) I_a(x)
            = -f(x) + o(ln x)

    holds in the testable sense |lhs + f(x)| / ln x small: the ratio at the
    largest grid point must be below ratio_threshold and the ratio sequence
    non-increasing over the last half of the grid.
    """
    if not (0.0 < a < 1.0):
        raise ParabranchError(f"check_SNinf: a must lie in (0,1), got {a}")
    xs = sorted(float(x) for x in x_grid)
    if not xs:
        return ConditionReport("SNinf", "inconclusive")
    rows, ratios = [], []
    for x in xs:
        if x <= 1.0:
            raise ParabranchError(f"check_SNinf: grid point {x} must exceed 1")
        lhs = (_load_zero_lhs(model, r, a, x)
               - float(model.jump_rate(x)) * I_a(model, a, x))
        resid = lhs + float(f_margin(x))
        ratio = abs(resid) / math.log(x)
        rows.append((x, lhs, -float(f_margin(x))))
        ratios.append(ratio)
    tail = ratios[len(ratios) // 2:]
    decreasing = all(tail[i + 1] <= tail[i] + 1e-12 for i in range(len(tail) - 1))
    if ratios[-1] < ratio_threshold and decreasing:
        return ConditionReport("SNinf", "holds_on_grid",
                               {"a": a, "ratio_at_largest": ratios[-1]}, rows)
    return ConditionReport(
        "SNinf", "fails_on_grid",
        {"x": xs[-1], "ratio_at_largest": ratios[-1], "tail_decreasing": decreasing},
        rows)


def check_LB(kernel_of_x: Callable[[float], K.PartitionKernel],
             x_grid: Sequence[float], theta_probe: Sequence[float],
             c_min: float = 1e-6) -> ConditionReport:
    """Check the kernel lower bound: one symmetric variable Theta and c > 0
    with Theta(x) >= c * Theta uniformly in x, via quantile comparison.

    The reference variable is anchored at the most symmetric grid member
    (largest low quantiles); c is the worst quantile ratio against it.
    Families whose kernels degenerate along the grid (lower quantile -> 0)
    drive c below c_min and fail; a constant family holds with c = 1.
    """
    xs = [float(x) for x in x_grid]
    probes = sorted(float(u) for u in theta_probe)
    if not xs or not probes:
        return ConditionReport("LB", "inconclusive")
    if any(not (0.0 < u < 1.0) for u in probes):
        raise ParabranchError("check_LB: probe quantiles must lie in (0,1)")
    quant = {x: np.array([_kernel_quantile(kernel_of_x(x), u) for u in probes])
             for x in xs}
    x_ref = max(xs, key=lambda x: float(np.min(quant[x])))
    qr = quant[x_ref]
    c = min(float(np.min(quant[x] / qr)) for x in xs)
    rows = [(x, float(np.min(quant[x])), None) for x in xs]
    if c >= c_min:
        return ConditionReport("LB", "holds_on_grid",
                               {"c": c, "x_ref": x_ref}, rows)
    worst = min(xs, key=lambda x: float(np.min(quant[x] / qr)))
    return ConditionReport("LB", "fails_on_grid",
                           {"best_c": c, "x": worst}, rows)


def _kernel_quantile(kernel: K.PartitionKernel, u: float) -> float:
    from scipy import special as sp
    if isinstance(kernel, K.Uniform):
        return u
    if isinstance(kernel, K.Equal):
        return 0.5
    if isinstance(kernel, K.Deterministic):
        return kernel.z if u < 0.5 else 1.0 - kernel.z
    if isinstance(kernel, K.BetaSym):
        a = kernel.alpha + 1.0
        return float(sp.betaincinv(a, a, u))
    if isinstance(kernel, K.FinitePoint):
        zs = np.array([z for z, _ in kernel.modes])
        ps = np.array([p for _, p in kernel.modes])
        order = np.argsort(zs)
        vals = np.concatenate([zs[order], (1.0 - zs[order])[::-1]])
        prob = np.concatenate([ps[order], ps[order][::-1]])
        cum = np.cumsum(prob)
        return float(vals[np.searchsorted(cum, u, side="left")])
    raise TypeError(f"unknown kernel type {type(kernel)!r}")


def assumption_D(model: ModelFunctions, diverges: bool = False) -> ConditionReport:
    """Gate on the finite-first-moment assumption for pi.

    Finite discrete measures always pass; a caller representing an analytic
    measure with divergent first moment sets `diverges` and gets the
    failure with the condition named.
    """
    if diverges:
        return ConditionReport(
            "AssumptionD", "fails_on_grid",
            {"reason": "declared divergent: requires int z pi(dz) < inf"})
    first = math.fsum(w * z for z, w in model.pi)
    return ConditionReport("AssumptionD", "holds_on_grid",
                           {"first_moment": first},
                           [(0.0, first, None)])


def drift_criterion(model: ModelFunctions, r: float, mode: str,
                    x_grid: Sequence[float]) -> ConditionReport:
    """Evaluate one of the three drift expressions on the grid and report
    the largest eta for which the strict inequality holds grid-wide.

    Modes: 'prop41_i' needs g(x)/x + 2r E[ln Theta(x)] > eta; 'prop41_ii'
    the same expression < -eta; 'prop41_iii' subtracts the diffusion and
    compensated-jump terms and needs < -eta.
    """
    xs = [float(x) for x in x_grid]
    if not xs:
        return ConditionReport(mode, "inconclusive")
    rows = []
    vals = []
    for x in xs:
        if not x > 0:
            raise ParabranchError("drift_criterion: grid points must be > 0")
        base = float(model.drift(x)) / x + 2.0 * r * K.moments(model.kernel_at(x)).log_moment
        if mode == "prop41_i":
            v = base
        elif mode == "prop41_ii":
            v = base
        elif mode == "prop41_iii":
            v = base - float(model.diffusion2(x)) / x ** 2
            comp = math.fsum(
                w * (z / x - math.log1p(z / x)) for z, w in model.pi)
            v -= float(model.jump_rate(x)) * comp
        else:
            raise ParabranchError(f"drift_criterion: unknown mode {mode!r}")
        vals.append(v)
        rows.append((x, v, None))
    if mode == "prop41_i":
        eta = min(vals)
        ok = eta > 0.0
        bad_x = xs[int(np.argmin(vals))]
    else:
        eta = -max(vals)
        ok = eta > 0.0
        bad_x = xs[int(np.argmax(vals))]
    if ok:
        return ConditionReport(mode, "holds_on_grid", {"eta": eta}, rows)
    return ConditionReport(mode, "fails_on_grid",
                           {"x": bad_x, "value": vals[int(np.argmin(vals))]
                            if mode == "prop41_i" else vals[int(np.argmax(vals))]},
                           rows)


# ---------------------------------------------------------------------------
# model-function expressions for the CLI:
#   linear:g=<f>   |  logistic:g=<f>,K=<f>  |  table:<x1>:<v1>,<x2>:<v2>,...


def parse_model_expr(expr: str) -> Callable[[float], float]:
    """Parse a named built-in or tabulated (x, value) function."""
    s = expr.strip()
    if s.startswith("linear:"):
        g = _kv(s[len("linear:"):], "g", s)
        return lambda x: g * np.asarray(x, dtype=float)
    if s.startswith("logistic:"):
        body = s[len("logistic:"):].split(",")
        if len(body) != 2:
            raise ParabranchError(f"model {s!r}: logistic needs g=<f>,K=<f>")
        g = _kv(body[0], "g", s)
        cap = _kv(body[1], "K", s)
        return lambda x: g * np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float) / cap)
    if s.startswith("table:"):
        pairs = []
        for tok in s[len("table:"):].split(","):
            try:
                xs, vs = tok.split(":")
                pairs.append((float(xs), float(vs)))
            except ValueError as exc:
                raise ParabranchError(
                    f"model {s!r}: bad table entry {tok!r} (expected x:value)") from exc
        pairs.sort()
        xs = np.array([p[0] for p in pairs])
        vs = np.array([p[1] for p in pairs])
        interp = interpolate.PchipInterpolator(xs, vs, extrapolate=True)
        return lambda x: interp(np.asarray(x, dtype=float))
    raise ParabranchError(
        f"model {s!r}: unknown model expression (linear: | logistic: | table:)")


def _kv(token: str, key: str, full: str) -> float:
    token = token.strip()
    if not token.startswith(key + "="):
        raise ParabranchError(f"model {full!r}: expected '{key}=<float>', got {token!r}")
    try:
        return float(token[len(key) + 1:])
    except ValueError as exc:
        raise ParabranchError(f"model {full!r}: bad float in {token!r}") from exc
