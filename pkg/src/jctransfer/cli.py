"""Command-line front end: ``jctransfer run|validate|list``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import InvalidSpec, PreconditionError
from .experiments import DEFAULTS, EXPERIMENTS, ExperimentSpec, estimate_resources, run, validate


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    params = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidSpec(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            params[key.strip()] = value.strip()
    return params


def _overrides(pairs: Sequence[str]) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise InvalidSpec(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    params = read_config(args.config) if args.config else {}
    params.update(_overrides(args.param or []))
    return ExperimentSpec(args.experiment, params, getattr(args, "out", None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jctransfer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("experiment", choices=EXPERIMENTS)
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="override one parameter (repeatable)")
        p.add_argument("--config", help="file of key = value lines; --param wins")

    p_run = sub.add_parser("run", help="run an experiment and write CSV + JSON sidecar")
    common(p_run)
    p_run.add_argument("--out", default=".", help="output directory (default: current)")
    p_run.add_argument("--workers", type=int, default=1, help="process pool size for sweeps")

    p_val = sub.add_parser("validate", help="dry-run checks without computing")
    common(p_val)

    sub.add_parser("list", help="list experiments and their default parameters")
    return parser


def _show(value) -> str:
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in EXPERIMENTS:
            print(name)
            for key, value in DEFAULTS[name].items():
                print(f"  {key} = {_show(value)}")
        return 0
    try:
        spec = build_spec(args)
        if args.command == "validate":
            spec.resolved()
            print(f"resources: {estimate_resources(spec)}")
            warnings = validate(spec)
            for w in warnings:
                print(f"warning: {w}")
            if not warnings:
                print("no warnings")
            return 0
        table = run(spec, workers=args.workers)
    except InvalidSpec as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"{args.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(table.to_csv() if table.n_rows <= 20 else f"{table.n_rows} rows", end="")
    print(f"wrote {spec.out_dir}/{spec.name}.csv ({table.meta['wall_time_s']} s)")
    return 0
