"""Command-line interface: every operation as a subcommand with seeded,
reproducible, machine-readable output.

Exit codes: 0 success, 2 argument/format errors, 3 precondition
violations, 4 budget or search exhaustion.  Output is deterministic for a
fixed argv+seed; wall time goes to stderr so files stay byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from . import conditions as cond
from . import kernels as K
from . import phase as P
from . import simulate as sim
from . import spine as S
from ._backend import backend_name
from .classify import (ModelParams, StableJumpParams, classify,
                       construct_survival_kernel, threshold, x0)
from .errors import (BudgetExceeded, KernelFormatError, ParabranchError,
                     PreconditionViolated, SearchExhausted)

FMT = "%.17g"


def _f17(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return FMT % x
    return str(x)


def _manifest(args, sub: str) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in {"func", "out", "timing"} and v is not None}
    return {"subcommand": sub, "config": cfg, "seed": getattr(args, "seed", None),
            "version": __version__, "backend": backend_name()}


def _emit(args, manifest: dict, result=None, csv_text: str | None = None):
    if getattr(args, "output", "json") == "csv":
        if csv_text is None:
            raise ParabranchError("this subcommand has no CSV form; use --output json")
        payload = "# manifest: " + json.dumps(manifest, sort_keys=True) + "\n" + csv_text
    else:
        payload = json.dumps({"manifest": manifest, "result": result},
                             sort_keys=True, allow_nan=False) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _jsonable(value):
    """Replace non-finite floats by the documented string forms."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def _params(args) -> ModelParams:
    return ModelParams(g=args.g, sigma=args.sigma, r=args.r, q=args.q)


def _stable(args):
    if args.stable_b is None and args.stable_c is None:
        return None
    if args.stable_b is None or args.stable_c is None:
        raise ParabranchError("--stable-b and --stable-c must be given together")
    return StableJumpParams(b=args.stable_b, c=args.stable_c)


def _add_model_flags(p, need_kernel=True):
    p.add_argument("--g", type=float, required=True, help="drift coefficient")
    p.add_argument("--sigma", type=float, default=0.0, help="diffusion coefficient")
    p.add_argument("--r", type=float, default=1.0, help="division rate")
    p.add_argument("--q", type=float, default=0.0, help="death rate")
    if need_kernel:
        p.add_argument("--kernel", type=str, required=True,
                       help="uniform | equal | det:z=<f> | beta:alpha=<f> | "
                            "points:z=<f>,p=<f>[;...]")


def _add_common(p):
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="also embed wall time in the manifest (breaks byte-reproducibility)")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classify(args):
    rep = classify(_params(args), K.parse_kernel(args.kernel), _stable(args))
    return rep.to_json_dict(), None


def _cmd_threshold(args):
    val = threshold(args.which, _params(args), K.parse_kernel(args.kernel))
    return {"which": args.which, "value": _jsonable(val)}, None


def _cmd_x0(args):
    val = x0(args.q_over_r)
    resid = val * (1.0 + math.log(2.0) - math.log(val)) - (1.0 + args.q_over_r)
    return {"q_over_r": args.q_over_r, "x0": val, "residual": resid}, None


def _cmd_construct_kernel(args):
    params = ModelParams(g=args.g, sigma=0.0, r=args.r, q=args.q)
    kern = construct_survival_kernel(params, args.vartheta)
    rep = classify(params, kern)
    mom = K.moments(kern)
    return {"kernel": K.format_kernel(kern),
            "min_share": mom.min_share,
            "regime": rep.regime,
            "report": rep.to_json_dict()}, None


def _cmd_kernel_info(args):
    kernels = [K.parse_kernel(text) for text in args.kernel]
    result = []
    lines = ["kernel,theta,density,mass"]
    thetas = np.linspace(0.0, 1.0, args.density_steps + 2)[1:-1]
    for kern in kernels:
        mom = K.moments(kern)
        result.append({
            "kernel": K.format_kernel(kern),
            "lambda_minus": _jsonable(mom.lambda_minus),
            "log_moment": mom.log_moment,
            "log2_moment": mom.log2_moment,
            "min_share": mom.min_share,
        })
        name = K.format_kernel(kern)
        dens = K.density(kern, thetas)
        if np.any(dens > 0):
            for th, de in zip(thetas, dens):
                lines.append(f"{name},{_f17(float(th))},{_f17(float(de))},")
        for th, mass in K.atoms(kern):
            lines.append(f"{name},{_f17(float(th))},,{_f17(float(mass))}")
    out = result[0] if len(result) == 1 else result
    return out, "\n".join(lines) + "\n"


def _cmd_phase(args):
    grid = P.sweep(
        args.family,
        P.AxisSpec(args.gr_lo, args.gr_hi, args.gr_steps, log_scaled=args.gr_log),
        P.AxisSpec(args.param_lo, args.param_hi, args.param_steps),
        args.q_over_r)
    lines = [",".join(grid.columns)]
    for row in grid.to_csv_rows():
        lines.append(",".join(_f17(v) for v in row))
    csv_text = "\n".join(lines) + "\n"
    result = {"rows": [list(_jsonable(v) for v in row) for row in grid.to_csv_rows()],
              "columns": list(grid.columns)}
    return result, csv_text


def _cmd_boundary(args):
    val = P.survival_boundary(K.parse_kernel(args.kernel), args.q_over_r)
    return {"kernel": args.kernel, "q_over_r": args.q_over_r,
            "boundary_g_over_r": val}, None


def _cmd_scatter(args):
    rows = P.multimodal_scatter(args.n_modes, args.draws, args.q_over_r, args.seed)
    csv_text = P.scatter_rows_to_csv(rows)
    return {"rows": [list(r) for r in rows],
            "columns": list(P.SCATTER_COLUMNS)}, csv_text


def _cmd_simulate(args):
    kern = K.parse_kernel(args.kernel)
    stable = _stable(args)
    model = sim.ModelFunctions.multiplicative(args.g, args.sigma, kern, stable=stable)
    records = tuple(float(t) for t in args.record.split(",")) if args.record else (args.t,)
    cfg = sim.SimConfig(t_max=args.t, reps=args.reps, seed=args.seed, x0=args.x0,
                        dt=args.dt, record_times=records, snapshots=True,
                        explosion_cap=args.explosion_cap,
                        max_cells=args.max_cells)
    traj = sim.simulate_population(model, args.r, args.q, cfg)

    fr_grow = sim.infected_fraction(traj, "above_growing",
                                    eta=args.frac_eta, eps=args.frac_eps)[3]
    fr_const = sim.infected_fraction(traj, "above_const", eps=args.frac_eps)[3]
    fr_pos = sim.infected_fraction(traj, "positive")[3]

    lines = ["rep,t,N,C,frac_growing,frac_const,frac_positive"]
    for rep in range(traj.reps):
        for k, t in enumerate(traj.record_times):
            lines.append(",".join([
                str(rep), _f17(float(t)),
                str(int(traj.n_cells[rep, k])), str(int(traj.c_cells[rep, k])),
                _f17(float(fr_grow[rep, k])), _f17(float(fr_const[rep, k])),
                _f17(float(fr_pos[rep, k]))]))
    csv_text = "\n".join(lines) + "\n"

    summary = {"record_times": list(traj.record_times), "aborted": traj.aborted}
    for name, arr in (("N", traj.n_cells.astype(float)),
                      ("C", traj.c_cells.astype(float)),
                      ("frac_growing", fr_grow), ("frac_const", fr_const),
                      ("frac_positive", fr_pos)):
        stats = []
        for k in range(len(traj.record_times)):
            from ._rng import mean_and_se
            mean, se = mean_and_se(arr[:, k])
            stats.append({"t": traj.record_times[k], "mean": mean, "se": _jsonable(se)})
        summary[name] = stats
    return summary, csv_text


def _cmd_spine(args):
    params = _params(args)
    kern = K.parse_kernel(args.kernel)
    stable = _stable(args)
    cfg = S.SpineConfig(t_max=args.t, reps=args.reps, seed=args.seed, x0=args.x0,
                        dt=args.dt, threads=args.threads)
    if stable is None:
        raise PreconditionViolated(
            "spine estimation of P(Y_t < inf) needs the stable-jump parameters "
            "(--stable-b, --stable-c); without them Y never explodes")
    p, se = S.nonexplosion_probability(params, kern, stable, args.t, args.x0, cfg)
    mc, mc_se = S.mean_cells_via_spine(params, kern, stable, args.t, args.x0, cfg)
    return {"t": args.t, "x0": args.x0,
            "nonexplosion": {"estimate": p, "std_error": se},
            "mean_cells": {"estimate": mc, "std_error": mc_se},
            "reps": args.reps, "seed": args.seed}, None


def _cmd_verify_mto(args):
    params = _params(args)
    kern = K.parse_kernel(args.kernel)
    cfg = S.SpineConfig(t_max=args.t, reps=args.reps, seed=args.seed, x0=args.x0,
                        dt=args.dt, threads=args.threads,
                        branch_budget=args.budget)
    rep = S.many_to_one_check(params, kern, args.f, args.t, args.x0, cfg)
    return _jsonable(rep), None


def _cmd_check_conditions(args):
    kern = K.parse_kernel(args.kernel)
    drift = cond.parse_model_expr(args.drift)
    diff2 = cond.parse_model_expr(args.diffusion2) if args.diffusion2 else (lambda x: 0.0 * np.asarray(x))
    prate = cond.parse_model_expr(args.jump_rate) if args.jump_rate else (lambda x: 0.0 * np.asarray(x))
    pi = ()
    if args.pi:
        try:
            pi = tuple((float(z), float(w)) for z, w in
                       (tok.split(":") for tok in args.pi.split(",")))
        except ValueError as exc:
            raise ParabranchError(f"bad --pi {args.pi!r}: expected z:w[,z:w...]") from exc
    model = sim.ModelFunctions(drift=drift, diffusion2=diff2, jump_rate=prate,
                               pi=pi, kernel=kern)
    lo, hi, n = args.grid_lo, args.grid_hi, args.grid_steps
    xs = np.geomspace(lo, hi, n) if args.grid_log else np.linspace(lo, hi, n)

    if args.check == "ln0":
        rep = cond.check_LN0(model, args.r, args.a, args.eta, sorted(xs, reverse=True))
    elif args.check == "sninf":
        margin = cond.parse_model_expr(args.f_margin) if args.f_margin else (lambda x: 0.0 * np.asarray(x))
        rep = cond.check_SNinf(model, args.r, args.a, lambda x: float(margin(x)), xs)
    elif args.check == "lb":
        rep = cond.check_LB(lambda x: kern, xs, (0.1, 0.25, 0.5, 0.75, 0.9))
    elif args.check in ("drift_i", "drift_ii", "drift_iii"):
        mode = {"drift_i": "prop41_i", "drift_ii": "prop41_ii",
                "drift_iii": "prop41_iii"}[args.check]
        rep = cond.drift_criterion(model, args.r, mode, xs)
    elif args.check == "assumption_d":
        rep = cond.assumption_D(model, diverges=args.pi_diverges)
    else:
        raise ParabranchError(f"unknown check {args.check!r}")
    return rep.to_json_dict(), None


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parabranch",
        description="Fate classification and Monte Carlo verification of a "
                    "parasite-infected branching cell population")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="regime and asymptotic rates")
    _add_model_flags(p)
    p.add_argument("--stable-b", type=float, default=None)
    p.add_argument("--stable-c", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("threshold", help="limiting parameter value (Lemma-style flip)")
    p.add_argument("--which", choices=("q", "r", "g", "sigma"), required=True)
    _add_model_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("x0", help="equal-sharing fixed point x0(q/r)")
    p.add_argument("--q-over-r", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_x0)

    p = sub.add_parser("construct-kernel", help="two-mode kernel rescuing survival")
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--vartheta", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_construct_kernel)

    p = sub.add_parser("kernel-info", help="kernel moments (and density CSV)")
    p.add_argument("--kernel", type=str, required=True, action="append",
                   help="may repeat; CSV output holds one density/atom block per kernel")
    p.add_argument("--density-steps", type=int, default=201)
    _add_common(p)
    p.set_defaults(func=_cmd_kernel_info)

    p = sub.add_parser("phase", help="paired deterministic/random sweep (CSV)")
    p.add_argument("--family", choices=("beta", "deterministic"), default="beta")
    p.add_argument("--gr-lo", type=float, default=P.DEFAULT_LOG_G_OVER_R[0])
    p.add_argument("--gr-hi", type=float, default=P.DEFAULT_LOG_G_OVER_R[1])
    p.add_argument("--gr-steps", type=int, default=P.DEFAULT_LOG_G_OVER_R[2])
    p.add_argument("--gr-log", action=argparse.BooleanOptionalAction, default=True,
                   help="g/r axis given in natural log (default)")
    p.add_argument("--param-lo", type=float, default=P.DEFAULT_ALPHA[0])
    p.add_argument("--param-hi", type=float, default=P.DEFAULT_ALPHA[1])
    p.add_argument("--param-steps", type=int, default=P.DEFAULT_ALPHA[2])
    p.add_argument("--q-over-r", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(func=_cmd_phase, output="csv")

    p = sub.add_parser("boundary", help="critical g/r for one kernel")
    p.add_argument("--kernel", type=str, required=True)
    p.add_argument("--q-over-r", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("scatter", help="finite-point boundary scatter (CSV)")
    p.add_argument("--n-modes", type=int, required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--q-over-r", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(func=_cmd_scatter, output="csv")

    p = sub.add_parser("simulate", help="full branching population (CSV + summary)")
    _add_model_flags(p)
    p.add_argument("--stable-b", type=float, default=None)
    p.add_argument("--stable-c", type=float, default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--record", type=str, default=None, help="comma-separated record times")
    p.add_argument("--explosion-cap", type=float, default=None)
    p.add_argument("--max-cells", type=int, default=2_000_000)
    p.add_argument("--frac-eta", type=float, default=1.0,
                   help="eta for the growing-threshold fraction column")
    p.add_argument("--frac-eps", type=float, default=0.1,
                   help="eps for the growing/const fraction columns")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate, output="csv")

    p = sub.add_parser("spine", help="non-explosion probability via the spine")
    _add_model_flags(p)
    p.add_argument("--stable-b", type=float, default=None)
    p.add_argument("--stable-c", type=float, default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--x0", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=_cmd_spine)

    p = sub.add_parser("verify-mto", help="many-to-one identity z-score")
    _add_model_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--f", choices=sorted(S._MTO_FUNCTIONALS), default="exp_neg")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--budget", type=float, default=5e6)
    _add_common(p)
    p.set_defaults(func=_cmd_verify_mto)

    p = sub.add_parser("check-conditions", help="hypothesis checkers on a grid")
    p.add_argument("--check", choices=("ln0", "sninf", "lb", "drift_i", "drift_ii",
                                       "drift_iii", "assumption_d"), required=True)
    p.add_argument("--kernel", type=str, required=True)
    p.add_argument("--drift", type=str, required=True,
                   help="linear:g=<f> | logistic:g=<f>,K=<f> | table:x:v,...")
    p.add_argument("--diffusion2", type=str, default=None)
    p.add_argument("--jump-rate", type=str, default=None)
    p.add_argument("--pi", type=str, default=None, help="atoms z:w[,z:w...]")
    p.add_argument("--pi-diverges", action="store_true",
                   help="declare pi to have divergent first moment")
    p.add_argument("--f-margin", type=str, default=None,
                   help="margin function f for the no-explosion check")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--grid-lo", type=float, required=True)
    p.add_argument("--grid-hi", type=float, required=True)
    p.add_argument("--grid-steps", type=int, default=20)
    p.add_argument("--grid-log", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_check_conditions)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        result, csv_text = args.func(args)
    except (KernelFormatError,) as exc:
        print(f"parabranch: argument error: {exc}", file=sys.stderr)
        return 2
    except PreconditionViolated as exc:
        print(f"parabranch: precondition violated: {exc}", file=sys.stderr)
        return 3
    except (BudgetExceeded, SearchExhausted) as exc:
        print(f"parabranch: exhausted: {exc}", file=sys.stderr)
        return 4
    except ParabranchError as exc:
        print(f"parabranch: error: {exc}", file=sys.stderr)
        return 2
    manifest = _manifest(args, args.cmd)
    elapsed = time.perf_counter() - t0
    if getattr(args, "timing", False):
        manifest["wall_time_s"] = elapsed
    _emit(args, manifest, _jsonable(result), csv_text)
    print(f"parabranch: {args.cmd} done in {elapsed:.3f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
