"""Artifact serialization: CSV series/snapshots and JSON summaries.

One directory per run: ``run.cfg`` (full config echo), ``series.csv`` (one
row per accepted step), ``snap_NNNN.csv`` (one file per saved time, columns
x, h, u, P, Q) and ``summary.json`` (reports with stable keys).  CSV numbers
carry 17 significant digits; JSON floats use exact round-trip representations.
"""

from __future__ import annotations

import json
import os

from .config import config_echo
from .dynamics import SimHistory
from .kinematics import pq_fields
from .scenarios import RunArtifact, SweepResult

__all__ = ["write_run_artifact", "write_sweep_result", "SERIES_CSV_COLUMNS"]

#: the stable public schema of series.csv
SERIES_CSV_COLUMNS = ("t", "mass", "energy", "min_h", "min_ux", "max_abs_hx", "sup_P", "sup_Q")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_series_csv(hist: SimHistory, path: str) -> None:
    cols = [hist.series[c] for c in SERIES_CSV_COLUMNS]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SERIES_CSV_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_snapshot_csv(hist: SimHistory, index: int, path: str) -> None:
    s = hist.snapshots[index]
    P, Q = pq_fields(s, hist.params, hist.grid)
    x = hist.grid.cells()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# t = {_fmt(s.t)}\n")
        fh.write("x,h,u,P,Q\n")
        for row in zip(x, s.h, s.u, P, Q):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def summary_dict(art: RunArtifact) -> dict:
    hist = art.history
    return {
        "version": art.version,
        "status": hist.status,
        "abort_reason": hist.abort_reason,
        "abort_time": hist.abort_time,
        "trigger": None if hist.trigger is None else {"t": hist.trigger[0], "code": hist.trigger[1]},
        "t_final": hist.t_final,
        "n_steps": hist.n_steps,
        "e0": art.e0,
        "e_max": art.config.params.e_max,
        "bounds_applicable": art.bounds_applicable,
        "wall_time_s": art.wall_time,
        "verdicts": {k: v for k, v in art.verdicts.items()},
        "reports": {name: rep.to_dict() for name, rep in art.reports.items()},
        "config": config_echo(art.config),
    }


def write_run_artifact(art: RunArtifact, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "run.cfg"), "w", encoding="utf-8") as fh:
        fh.write(config_echo(art.config))
    write_series_csv(art.history, os.path.join(out_dir, "series.csv"))
    for i in range(len(art.history.snapshots)):
        write_snapshot_csv(art.history, i, os.path.join(out_dir, f"snap_{i:04d}.csv"))
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary_dict(art), fh, indent=2)
        fh.write("\n")


def write_sweep_result(result: SweepResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for eps, art in zip(result.epsilons, result.artifacts):
        write_run_artifact(art, os.path.join(out_dir, f"eps_{eps:g}"))
    with open(os.path.join(out_dir, "sweep_table.csv"), "w", encoding="utf-8") as fh:
        fh.write("eps_coarse,eps_fine,dh_l2,du_l2,comparable\n")
        for row in result.table:
            dh = "" if row["dh_l2"] is None else _fmt(row["dh_l2"])
            du = "" if row["du_l2"] is None else _fmt(row["du_l2"])
            fh.write(f"{_fmt(row['eps_coarse'])},{_fmt(row['eps_fine'])},{dh},{du},{row['comparable']}\n")
    summary = {
        "epsilons": result.epsilons,
        "table": result.table,
        "runs": [
            {"epsilon": eps, "status": art.history.status, "e0": art.e0,
             "verdicts": art.verdicts}
            for eps, art in zip(result.epsilons, result.artifacts)
        ],
    }
    with open(os.path.join(out_dir, "sweep_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
