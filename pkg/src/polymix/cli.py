"""Command-line interface: reproducible experiments, JSON reports, CSV logs.

Every JSON report carries `schema: 1` and a manifest echoing the command,
its full parameter set and seeds, so identical invocations give identical
output up to the timestamp field.  Exit codes: 2 bad flags (argparse),
3 capacity exceeded, 4 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .counts import (
    conv_condition_check,
    count_distribution,
    minimal_conv_constant,
    partition_function,
)
from .entropy_lab import chi_laplace_probe
from .errors import CapacityError, ConvergenceError, PolymixError
from .generator import build_generator
from .interchange import (
    build_colored_generator,
    build_interchange_generator,
    dirichlet_comparison,
    lsi_segment,
)
from .lsi import lsi_constant_estimate, mixing_bound_check
from .paths import enumerate_state_space, extremal_path
from .simulate import SimConfig, simulate, write_trajectories_csv
from .spectral import exact_mixing_time, kappa_value, spectral_gap
from .wilson import lower_bound_time

SCHEMA = 1


def _manifest(command: str, params: dict, seeds=None) -> dict:
    return {
        "command": command,
        "params": params,
        "seeds": seeds,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _report(command: str, args, body: dict, seeds=None) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {"schema": SCHEMA, "manifest": _manifest(command, params, seeds), **body}


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_enumerate(args):
    index = enumerate_state_space(args.L, args.d)
    body = {
        "L": args.L,
        "d": args.d,
        "count": len(index),
        "partition_function": str(partition_function(args.L, args.d)),
    }
    _emit(_report("enumerate", args, body), args)
    return 0


def _cmd_law(args):
    dist = count_distribution(args.L, args.d)
    body = {
        "L": args.L,
        "d": args.d,
        "gamma": [float(w) for w in dist.weights()],
        "mean": dist.mean(),
        "variance": dist.variance(),
    }
    if args.conv:
        c = minimal_conv_constant(dist)
        rep = conv_condition_check(dist, c, find_minimal=False)
        body["conv"] = {"minimal_c": c, "holds": rep.holds, "margins": rep.margins}
    _emit(_report("law", args, body), args)
    return 0


def _cmd_spectrum(args):
    gen = build_generator(enumerate_state_space(args.L, args.d))
    gap = spectral_gap(gen)
    kap = kappa_value(args.L)
    body = {"L": args.L, "d": args.d, "gap": gap, "kappa": kap, "gap_over_kappa": gap / kap}
    _emit(_report("spectrum", args, body), args)
    return 0


def _cmd_mix(args):
    if args.mode == "exact":
        gen = build_generator(enumerate_state_space(args.L, args.d))
        rep = exact_mixing_time(gen)
        body = rep.to_json()
    else:
        C0 = 1.0 / (4.0 * args.eps)
        body = lower_bound_time(args.L, args.d, C0).to_json()
    _emit(_report("mix", args, body), args)
    return 0


def _cmd_lsi(args):
    gen = build_generator(enumerate_state_space(args.L, args.d))
    rep = lsi_constant_estimate(gen, restarts=args.restarts, seed=args.seed)
    bound = mixing_bound_check(gen, rep)
    body = {**rep.to_json(), "mixing_bound": bound.to_json()}
    _emit(_report("lsi", args, body, seeds=[args.seed]), args)
    return 0


def _cmd_simulate(args):
    every = args.sample_every if args.sample_every else args.tmax / 10.0
    times = np.arange(0.0, args.tmax + 1e-9, every)
    cfg = SimConfig(
        L=args.L,
        d=args.d,
        t_max=args.tmax,
        sample_times=times,
        n_trajectories=args.traj,
        master_seed=args.seed,
    )
    records = simulate(cfg, extremal_path(args.L, args.d))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_trajectories_csv(records, fh)
        body = {
            "L": args.L,
            "d": args.d,
            "n_trajectories": args.traj,
            "sample_times": [float(t) for t in times],
            "csv": args.out,
        }
        print(json.dumps({"schema": SCHEMA, "manifest": _manifest("simulate", vars(args) | {}, [args.seed]), **body}, indent=2, sort_keys=True))
    else:
        write_trajectories_csv(records, sys.stdout)
    return 0


def _cmd_entropy_lab(args):
    t_grid = np.array([float(v) for v in args.t_grid.split(",")]) if args.t_grid else None
    rep = chi_laplace_probe(args.L, args.d, args.i, args.n, t_grid)
    _emit(_report("entropy-lab", args, rep.to_json()), args)
    return 0


def _cmd_interchange(args):
    counts = tuple(int(v) for v in args.colors.split(",")) if args.colors else None
    if args.op == "gap":
        gen = build_interchange_generator(args.n)
        body = {"n": args.n, "graph": "segment", "gap": spectral_gap_dense(gen)}
        if counts:
            cgen = build_colored_generator(args.n, counts)
            body["counts"] = list(counts)
            body["gap_colored"] = spectral_gap_dense(cgen)
    elif args.op == "lsi":
        body = lsi_segment(args.n, counts=counts, seed=args.seed).to_json()
    else:
        body = {"n": args.n, "sup_ratio": dirichlet_comparison(args.n)}
    _emit(_report("interchange", args, body), args)
    return 0


def spectral_gap_dense(gen) -> float:
    return float(np.linalg.eigvalsh(-gen.matrix.toarray())[1])


def _cmd_scaling(args):
    Ls = [int(v) for v in args.L_grid.split(",")]
    rows = []
    for L in Ls:
        gen = build_generator(enumerate_state_space(L, args.d))
        rep = exact_mixing_time(gen)
        lsi = lsi_constant_estimate(gen, restarts=args.restarts, seed=args.seed)
        rows.append(
            {
                "L": L,
                "t_mix": rep.t_mix,
                "t_mix_is_lower_bound": rep.t_mix_is_lower_bound,
                "gap": rep.gap,
                "kappa": rep.kappa,
                "alpha_est": lsi.alpha_est,
                "t_over_l2logl": rep.t_mix / (L * L * math.log(L)),
            }
        )
    logL = np.log([r["L"] for r in rows])
    logT = np.log([r["t_mix"] for r in rows])
    log_scale = np.log([r["L"] ** 2 * math.log(r["L"]) for r in rows])
    exp_L = float(np.polyfit(logL, logT, 1)[0])
    exp_scale = float(np.polyfit(log_scale, logT, 1)[0])
    body = {
        "d": args.d,
        "rows": rows,
        "fit_exponent_vs_L": exp_L,
        "fit_exponent_vs_L2logL": exp_scale,
    }
    _emit(_report("scaling", args, body, seeds=[args.seed]), args)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polymix")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False, out=True):
        sp.add_argument("--L", type=int, required=True)
        sp.add_argument("--d", type=int, required=True)
        if seed:
            sp.add_argument("--seed", type=int, required=True)
        if out:
            sp.add_argument("--out", type=str, default=None)

    sp = sub.add_parser("enumerate")
    common(sp)
    sp.set_defaults(func=_cmd_enumerate)

    sp = sub.add_parser("law")
    common(sp)
    sp.add_argument("--conv", action="store_true")
    sp.set_defaults(func=_cmd_law)

    sp = sub.add_parser("spectrum")
    common(sp)
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("mix")
    common(sp)
    sp.add_argument("--mode", choices=["exact", "wilson-lb"], required=True)
    sp.add_argument("--eps", type=float, default=5.0)
    sp.set_defaults(func=_cmd_mix)

    sp = sub.add_parser("lsi")
    common(sp, seed=True)
    sp.add_argument("--restarts", type=int, default=16)
    sp.set_defaults(func=_cmd_lsi)

    sp = sub.add_parser("simulate")
    common(sp, seed=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--traj", type=int, required=True)
    sp.add_argument("--obs", type=str, default="phi,counts")
    sp.add_argument("--sample-every", type=float, default=None)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("entropy-lab")
    common(sp)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t-grid", type=str, default=None)
    sp.set_defaults(func=_cmd_entropy_lab)

    sp = sub.add_parser("interchange")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--colors", type=str, default=None)
    sp.add_argument("--op", choices=["gap", "lsi", "compare"], required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=str, default=None)
    sp.set_defaults(func=_cmd_interchange)

    sp = sub.add_parser("scaling")
    sp.add_argument("--L-grid", type=str, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--restarts", type=int, default=12)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=str, default=None)
    sp.set_defaults(func=_cmd_scaling)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 4
    except PolymixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
