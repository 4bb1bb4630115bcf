"""Command-line driver.

    sgnlab run   --config PATH [--out DIR] [--override SECTION.KEY=VALUE ...]
    sgnlab sweep --config PATH --epsilons 0.2,0.1,0.05 --out DIR [--override ...]
    sgnlab check --config PATH

``run`` simulates one scenario, writes its artifacts and prints one verdict
line per enabled check; exit code 0 iff every enabled check passes (an
expected blow-up counts as a pass when it triggers; a skipped check does not
fail the run).  ``check`` only validates the configuration.  Usage and
configuration errors exit with code 2, failed checks with 1.

The default output directory comes from the SGNLAB_OUT environment variable
(falling back to ./sgnlab_out).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_config
from .errors import SgnError
from .io import write_run_artifact, write_sweep_result
from .scenarios import RunArtifact, epsilon_sweep, run_scenario

__all__ = ["main"]


def _default_out() -> str:
    return os.environ.get("SGNLAB_OUT", "sgnlab_out")


def _print_verdicts(art: RunArtifact) -> bool:
    hist = art.history
    ok = True
    for name, verdict in sorted(art.verdicts.items()):
        if verdict == "skipped":
            print(f"[SKIP] {name}: initial energy {art.e0:.6g} >= threshold {art.config.params.e_max:.6g}")
            continue
        tag = "PASS" if verdict else "FAIL"
        detail = ""
        rep = art.reports.get(name)
        if name == "energy" and rep is not None:
            detail = ", ".join(f"{k}: value={c.value:.3e} tol={c.tol:.3e}" for k, c in rep.verdicts.items())
        elif name == "bounds" and rep is not None:
            detail = ", ".join(f"{k}: margin={v:.3e}" for k, v in rep.margins.items())
        elif name == "oleinik" and rep is not None:
            detail = f"fitted_C={rep.fitted_C:.6g}, violations={rep.violations}"
        elif name == "dispersion" and rep is not None:
            for row in rep.lines:
                speed = "n/a" if row["measured"] is None else f"{row['measured']:.4f}"
                print(f"    k={row['k']:g}: measured c={speed}, predicted {row['predicted']:.4f}, "
                      f"rel err {row['rel_err']:.2%} ({'ok' if row['pass'] else 'off'})")
            detail = f"{len(rep.lines)} modes within {rep.rtol:.0%}" if verdict else "mode mismatch"
        elif name == "blowup" and rep is not None:
            detail = (f"triggered at t={hist.trigger[0]:.6g} ({hist.trigger[1]})"
                      if hist.trigger else "no trigger")
        elif name == "completed":
            detail = f"aborted: {hist.abort_reason} at t={hist.abort_time:.6g}"
        print(f"[{tag}] {name}: {detail}")
        ok = ok and bool(verdict)
    print(f"run {hist.status} at t={hist.t_final:.6g} after {hist.n_steps} steps "
          f"(E0={art.e0:.9g}, wall {art.wall_time:.2f}s)")
    return ok


def _cmd_run(args) -> int:
    cfg = parse_config(args.config, args.override)
    art = run_scenario(cfg)
    out = args.out or os.path.join(_default_out(), "run")
    write_run_artifact(art, out)
    ok = _print_verdicts(art)
    print(f"artifacts written to {out}")
    return 0 if ok else 1


def _cmd_sweep(args) -> int:
    cfg = parse_config(args.config, args.override)
    try:
        epsilons = [float(tok) for tok in args.epsilons.replace(" ", "").split(",") if tok]
    except ValueError:
        print(f"cannot parse epsilon list {args.epsilons!r}", file=sys.stderr)
        return 2
    result = epsilon_sweep(cfg, epsilons)
    out = args.out or os.path.join(_default_out(), "sweep")
    write_sweep_result(result, out)
    ok = True
    for eps, art in zip(result.epsilons, result.artifacts):
        print(f"--- epsilon = {eps:g} ---")
        ok = _print_verdicts(art) and ok
    for row in result.table:
        if row["comparable"]:
            print(f"|h({row['eps_coarse']:g}) - h({row['eps_fine']:g})|_L2 = {row['dh_l2']:.6e}   "
                  f"|u diff|_L2 = {row['du_l2']:.6e}")
        else:
            print(f"pair ({row['eps_coarse']:g}, {row['eps_fine']:g}): incomparable (aborted run)")
    print(f"artifacts written to {out}")
    return 0 if ok else 1


def _cmd_check(args) -> int:
    parse_config(args.config, args.override)
    print(f"config {args.config} OK")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sgnlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", _cmd_run), ("sweep", _cmd_sweep), ("check", _cmd_check)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--override", action="append", default=[],
                        metavar="SECTION.KEY=VALUE")
        if name != "check":
            sp.add_argument("--out", default=None)
        if name == "sweep":
            sp.add_argument("--epsilons", required=True)
        sp.set_defaults(fn=fn)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except SgnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
