"""Command-line entry point ``cylab``.

Every subcommand reads the defaults, then an optional ``--config`` INI file,
then ``--set section.key=value`` overrides, then its own flags. Results go to
``--output`` or ``$CYLAB_OUTPUT`` as CSV plus a JSON sidecar. The exit code
is 0 unless a check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import experiments as ex
from .config import load_config
from .io import ResultRecord, write_record
from .verify import LEVELS, verify_suite

# flag -> (section, key); list-valued keys take comma-separated values
FLAGS: dict[str, list[tuple[str, str, str]]] = {
    "potential-check": [("--d", "geometry", "d"), ("--N", "potential", "N_values")],
    "walk-sim": [("--d", "geometry", "d"), ("--N", "geometry", "N"),
                 ("--samples", "walk", "samples"), ("--k", "walk", "k"),
                 ("--schedule-budget", "walk", "schedule_budget")],
    "disconnect-sim": [("--d", "geometry", "d"), ("--N", "disconnect", "N_values"),
                       ("--replicates", "disconnect", "replicates"),
                       ("--budget-multiplier", "disconnect", "budget_multiplier")],
    "interlace-sim": [("--u", "interlace", "u_values"), ("--samples", "interlace", "samples"),
                      ("--guard", "interlace", "guard"), ("--sets", "interlace", "sets")],
    "percolation-scan": [("--u-grid", "percolation", "u_grid"), ("--scales", "percolation", "scales"),
                         ("--samples", "percolation", "samples"), ("--z", "percolation", "z")],
    "limitlaw-eval": [("--u", "limitlaw", "u"), ("--m", "limitlaw", "m"),
                      ("--replicates", "limitlaw", "replicates"), ("--theta", "limitlaw", "theta"),
                      ("--s", "limitlaw", "s")],
    "theorem41": [("--d", "geometry", "d"), ("--N", "theorem41", "N_values"),
                  ("--replicates", "theorem41", "replicates"), ("--u", "theorem41", "u"),
                  ("--delta-fraction", "theorem41", "delta_fraction"),
                  ("--budget-multiplier", "theorem41", "budget_multiplier")],
    "corollary46": [("--d", "geometry", "d"), ("--N", "corollary46", "N"),
                    ("--replicates", "corollary46", "replicates"), ("--u", "corollary46", "u"),
                    ("--budget-multiplier", "corollary46", "budget_multiplier")],
    "verify": [],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cylab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in FLAGS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with [section] key = value entries")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one configuration value (repeatable)")
        p.add_argument("--seed", help="master seed")
        p.add_argument("--output", help="output directory (default $CYLAB_OUTPUT)")
        for flag, sec, key in flags:
            p.add_argument(flag, dest=f"cfg__{sec}__{key}", help=f"sets {sec}.{key}")
        if name == "interlace-sim":
            p.add_argument("--sprinkling", action="store_true",
                           help="run the truncation/sprinkling comparison instead")
        if name == "verify":
            p.add_argument("--level", choices=LEVELS, default="exact")
            p.add_argument("--budget-seconds", type=float, default=300.0)
    return parser


def _config(args: argparse.Namespace):
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.output:
        overrides.append(f"run.output={args.output}")
    for dest, value in vars(args).items():
        if dest.startswith("cfg__") and value is not None:
            _, sec, key = dest.split("__")
            overrides.append(f"{sec}.{key}={value}")
    return load_config(args.config, overrides)


def _emit(rec: ResultRecord, output: str) -> None:
    csv_path, json_path = write_record(rec, output or None)
    print(json.dumps(rec.sidecar()["summary"], indent=2, sort_keys=True, default=str))
    verdict = {True: "PASS", False: "FAIL", None: "DONE"}[rec.passed]
    print(f"{verdict}  {rec.experiment}  rows={len(rec.rows)}  censored={rec.censored}  "
          f"hash={rec.config_hash}  {rec.wall_clock:.1f} s")
    print(f"wrote {csv_path} and {json_path}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        output = cfg.get("run", "output", "")
        cmd = args.command
        if cmd == "verify":
            report = verify_suite(args.level, cfg, args.budget_seconds)
            print(report.text())
            return 0 if report.passed else 1
        if cmd == "potential-check":
            rec = ex.run_potential_check(cfg)
        elif cmd == "walk-sim":
            rec = ex.run_walk_sim(cfg)
        elif cmd == "disconnect-sim":
            rec = ex.run_disconnect_sim(cfg)
        elif cmd == "interlace-sim":
            rec = ex.run_sprinkling(cfg) if args.sprinkling else ex.run_interlace_sim(cfg)
        elif cmd == "percolation-scan":
            rec, _ = ex.run_percolation_scan(cfg)
        elif cmd == "limitlaw-eval":
            rec = ex.run_limitlaw_eval(cfg)
        elif cmd == "theorem41":
            rec = ex.run_theorem41(cfg)
        else:
            rec = ex.run_corollary46(cfg)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _emit(rec, output)
    return 0 if rec.passed is not False else 1


if __name__ == "__main__":
    sys.exit(main())
