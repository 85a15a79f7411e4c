"""Command line entry point: ``lohe <subcommand> <config>``.

Exit status is 0 when every check of the scenario passes, 1 when a check
fails, and 2 for configuration or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import scenarios as sc
from .config import parse_config
from .errors import LoheError

OUTPUT_DIR_ENV = "LOHE_OUTPUT_DIR"


def _kappas(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("no coupling strengths given")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lohe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("config", type=Path, help="flat key = value configuration file")
        s.add_argument("-o", "--output", type=Path, help="output file (overrides output.path)")
        s.add_argument("--wall-clock", action="store_true", help="include run time in JSON reports")
        s.add_argument("-q", "--quiet", action="store_true", help="do not print check lines")
        return s

    add("simulate", "integrate a model and check its invariants")
    add("split-check", "check the splitting condition and the composed flow")
    add("svd-check", "compare the matrix model with its unitary reformulation")
    add("dual-check", "compare a solution with the solution of its dual system")
    sw = add("kappa-sweep", "tail diameter of the frustrated unitary model over coupling strengths")
    sw.add_argument("--kappas", type=_kappas, help="comma-separated coupling strengths, e.g. 10,20,40")
    sw.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
    add("validate", "parse the configuration and build the initial data")
    return p


def _output_path(args, cfg, default_ext: str) -> Path:
    if args.output is not None:
        return args.output
    if cfg["output.path"] is not None:
        return Path(cfg["output.path"])
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / f"{args.command}{default_ext}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        traj = None
        if args.command == "simulate":
            report, traj = sc.run_simulate(cfg)
        elif args.command == "split-check":
            report = sc.run_split_check(cfg)
        elif args.command == "svd-check":
            report = sc.run_svd_check(cfg)
        elif args.command == "dual-check":
            report = sc.run_dual_check(cfg)
        elif args.command == "kappa-sweep":
            report = sc.run_kappa_sweep(cfg, args.kappas, args.jobs)
        else:
            report = sc.run_validate(cfg)

        if args.command != "validate":
            if traj is not None and cfg["output.format"] == "csv":
                path = _output_path(args, cfg, ".csv")
                sc.emit_csv(traj, path)
            else:
                path = _output_path(args, cfg, ".json")
                if traj is not None:
                    report.data["records"] = [r.as_dict() for r in traj.records]
                sc.emit_json(report, path, include_wall_clock=args.wall_clock)
    except (LoheError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if not args.quiet:
        for line in report.summary_lines():
            print(line)
        if args.command == "validate":
            print("configuration is valid")
        else:
            print(f"wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
