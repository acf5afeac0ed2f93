"""Command line: ``semiheat {constants,evolve,scan,run,check}``.

Exit codes: 0 success, 1 precondition/hypothesis failure, 2 acceptance
failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .constants import HypothesisError, InitialDataSpec, derive_constants
from .dynamics import evolve, make_initial_data
from .grid import Frame, TruncationError, build_grid

EXIT_OK, EXIT_PRECONDITION, EXIT_ACCEPTANCE, EXIT_IO = 0, 1, 2, 3


def _range(text: str) -> tuple:
    lo, hi, n = text.split(":")
    n = int(n)
    if n < 1:
        raise argparse.ArgumentTypeError("range needs at least one point")
    return tuple(float(x) for x in np.linspace(float(lo), float(hi), n))


def _list(text: str) -> tuple:
    return tuple(float(x) for x in text.split(","))


def _problem_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", help="sectioned key = value file; flags override it")
    ap.add_argument("--dim", type=int, dest="N")
    ap.add_argument("--p", type=float)
    ap.add_argument("--lambda", type=float, dest="lam")


def _evolve_flags(ap: argparse.ArgumentParser) -> None:
    _problem_flags(ap)
    ap.add_argument("--init", type=InitialDataSpec.parse, help="kind:a:b, e.g. gaussian:0.1:2")
    ap.add_argument("--frame", type=Frame, choices=list(Frame))
    ap.add_argument("--dt", type=float)
    ap.add_argument("--horizon", type=float, help="s_max (v-frame) or t_max (u-frame)")
    ap.add_argument("--rmax", type=float, dest="r_max")
    ap.add_argument("--nodes", type=int, dest="M")
    ap.add_argument("--sample-every", type=int, dest="sample_every")
    ap.add_argument("--blowup-threshold", type=float, dest="blowup_threshold")
    ap.add_argument("--q", type=_list, dest="q_list", help="comma list of L^q exponents")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semiheat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="print derived constants as JSON")
    _problem_flags(c)

    e = sub.add_parser("evolve", help="integrate one run, write diagnostics CSV + JSON")
    _evolve_flags(e)
    e.add_argument("--out", help="CSV path (JSON summary goes next to it)")
    e.add_argument("--json", help="JSON summary path")

    s = sub.add_parser("scan", help="Fujita phase scan over (p, amplitude)")
    _evolve_flags(s)
    s.add_argument("--p-range", type=_range, dest="p_list", help="lo:hi:n")
    s.add_argument("--amp-range", type=_range, dest="amp_list", help="lo:hi:n")
    s.add_argument("--p-list", type=_list, dest="p_list_explicit")
    s.add_argument("--amp-list", type=_list, dest="amp_list_explicit")
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="phase-table CSV path")
    s.add_argument("--json", help="JSON summary path")

    r = sub.add_parser("run", help="run the experiment named in the config")
    _evolve_flags(r)
    r.add_argument("--experiment")
    r.add_argument("--json", help="report path (stdout if omitted)")

    k = sub.add_parser("check", help="run the acceptance suite")
    k.add_argument("--workers", type=int, default=3)
    return ap


_OVERRIDES = ("N", "p", "lam", "init", "frame", "dt", "horizon", "r_max", "M",
              "sample_every", "blowup_threshold", "q_list", "experiment")


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    kw = {k: getattr(args, k, None) for k in _OVERRIDES}
    if getattr(args, "p_list_explicit", None) or getattr(args, "p_list", None):
        kw["p_list"] = args.p_list_explicit or args.p_list
    if getattr(args, "amp_list_explicit", None) or getattr(args, "amp_list", None):
        kw["amp_list"] = args.amp_list_explicit or args.amp_list
    return cfg.with_overrides(**kw)


def _cmd_constants(args) -> int:
    from .io import dumps

    cfg = _config(args)
    consts = derive_constants(cfg.N, cfg.p, cfg.lam)
    sys.stdout.write(dumps(consts.as_dict()))
    return EXIT_OK


def _cmd_evolve(args) -> int:
    from .io import emit_outputs

    cfg = _config(args)
    csv_path = args.out or cfg.csv_out or "trajectory.csv"
    json_path = args.json or cfg.json_out or csv_path.rsplit(".", 1)[0] + ".json"
    params = cfg.params
    grid = build_grid(params.N, cfg.M, cfg.r_max)
    u0, _ = make_initial_data(grid, params.init, params)
    traj = evolve(grid, params, u0, cfg.controls, cfg.frame, cfg.q_list)
    emit_outputs(traj, cfg, csv_path, json_path)
    print(f"{traj.outcome.status.value}: {traj.outcome.reason}")
    print(f"wrote {csv_path} ({len(traj.samples)} rows) and {json_path}")
    return EXIT_OK


def _cmd_scan(args) -> int:
    from .experiments import run_fujita_scan
    from .io import write_json, write_phase_csv

    cfg = _config(args)
    table = run_fujita_scan(cfg.p_list, cfg.amp_list, cfg, workers=args.workers)
    csv_path = args.out or cfg.csv_out or "phase.csv"
    json_path = args.json or cfg.json_out or csv_path.rsplit(".", 1)[0] + ".json"
    write_phase_csv(table, csv_path)
    write_json(table.as_dict(), json_path)
    for p, a, outcome, tb in table.rows():
        extra = "" if tb is None else f" (t_b ~ {tb:.4g})"
        print(f"p={p:<8.5g} A={a:<8.4g} {outcome}{extra}")
    return EXIT_OK


def _cmd_run(args) -> int:
    from . import experiments as ex
    from .io import dumps, write_json

    cfg = _config(args)
    name = cfg.experiment
    if name == "decay":
        report = ex.run_decay_experiment(cfg).as_dict()
    elif name == "negative-entropy":
        report = ex.run_negative_entropy_test(cfg)
    elif name == "cross-frame":
        report = ex.run_cross_frame_check(cfg)
    elif name == "wang-audit":
        report = ex.run_wang_audit(cfg)
    elif name == "scan":
        report = ex.run_fujita_scan(cfg.p_list, cfg.amp_list, cfg).as_dict()
    else:
        raise ConfigError(f"experiment {name!r} is not runnable with 'run'; use 'evolve'")
    if args.json:
        write_json(report, args.json)
    else:
        sys.stdout.write(dumps(report))
    return EXIT_OK


def _cmd_check(args) -> int:
    from .acceptance import Suite

    suite = Suite()
    failed = 0
    for method in ("constants", "operator", "entropy_balance", "production_balance",
                   "decay_rates", "u_rates", "gbound", "k_structure", "wang", "blowup",
                   "cross_frame", "phase_scan", "determinism"):
        fn = getattr(suite, method)
        crit = fn(args.workers) if method == "phase_scan" else fn()
        print(crit.line(), flush=True)
        failed += not crit.passed
    print(f"{13 - failed}/13 criteria passed")
    return EXIT_OK if failed == 0 else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"constants": _cmd_constants, "evolve": _cmd_evolve, "scan": _cmd_scan,
               "run": _cmd_run, "check": _cmd_check}[args.command]
    try:
        return handler(args)
    except (HypothesisError, ConfigError, TruncationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
