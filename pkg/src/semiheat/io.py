"""CSV/JSON writers. Output bytes depend only on the run, never on wall-clock state."""

from __future__ import annotations

import csv
import json
import math
import os

from .config import RunConfig
from .constants import derive_constants
from .diagnostics import CSV_COLUMNS, default_window, fit_log_slope
from .dynamics import Trajectory


class OutputError(OSError):
    pass


def _num(x) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _open(path: str):
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def extra_q(q_list) -> list:
    return sorted(float(q) for q in set(q_list) if float(q) not in (2.0, 4.0))


def write_trajectory_csv(traj: Trajectory, path: str, q_list=(2.0, 4.0)) -> None:
    extra = extra_q(q_list)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(CSV_COLUMNS) + [f"norm_l{q:g}_u" for q in extra])
        for smp in traj.samples:
            w.writerow([_num(x) for x in smp.row(extra)])


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(obj, path: str) -> None:
    with _open(path) as fh:
        fh.write(dumps(obj))


def trajectory_summary(traj: Trajectory, cfg: RunConfig) -> dict:
    params = traj.params
    consts = derive_constants(params.N, params.p, params.lam)
    fits = {}
    window = cfg.fit_window or default_window(consts, cfg.horizon)
    if traj.frame.value == "v":
        s = [x.s for x in traj.samples]
        for name in ("norm_l2rho_v", "E", "I", "K"):
            try:
                fits[name] = fit_log_slope(s, [getattr(x, name) for x in traj.samples],
                                           window, name).as_dict()
            except ValueError as exc:
                fits[name] = {"refused": str(exc)}
    return {
        "config": cfg.as_dict(),
        "config_echo": cfg.echo(),
        "constants": consts.as_dict(),
        "outcome": traj.outcome.as_dict(),
        "frame": traj.frame.value,
        "steps": traj.steps,
        "dt_final": traj.dt_final,
        "samples": len(traj.samples),
        "initial": traj.initial.as_dict() if traj.initial is not None else None,
        "fits": fits,
        "backend": traj.backend,
    }


def emit_outputs(traj: Trajectory, cfg: RunConfig, csv_path: str, json_path: str) -> None:
    write_trajectory_csv(traj, csv_path, cfg.q_list)
    write_json(trajectory_summary(traj, cfg), json_path)


def write_phase_csv(table, path: str) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "A", "outcome", "t_blowup_estimate"])
        for p, a, outcome, tb in table.rows():
            w.writerow([_num(p), _num(a), outcome, "" if tb is None else _num(tb)])
