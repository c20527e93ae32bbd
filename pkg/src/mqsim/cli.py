"""Command line entry point: ``mqsim run|resources|validate``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard breach
(grid boundary leakage), 4 oracle failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import resources as res
from .config import ConfigError, RunConfig, load
from .experiment import LeakageError, run_experiment, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_ORACLE = 4

log = logging.getLogger("mqsim")


def _load_config(path: str | None) -> RunConfig:
    return load(path) if path else RunConfig()


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg, args.output)
    except LeakageError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    print(f"wrote {len(result.rows)} rows to {result.path}")
    return EXIT_OK


def resources_report(query: res.ResourceQuery, note: str = "") -> dict:
    out = res.report(query)
    if note:
        out["note"] = note
    return out


def cmd_resources(args) -> int:
    note = ""
    try:
        if args.preset:
            overrides = {}
            if args.n_grid is not None:
                overrides["n_grid_quant"] = args.n_grid
            query = res.preset_query(args.preset, **overrides)
            note = res.PRESETS[args.preset].note
        else:
            if args.action_ratio is None or args.n_grid is None:
                print("resources: give a preset or both --action-ratio and --n-grid", file=sys.stderr)
                return EXIT_CONFIG
            query = res.ResourceQuery(
                action_ratio=args.action_ratio,
                n_grid_quant=args.n_grid,
                n_particles_q=args.n_q,
                n_particles_c=args.n_c,
                field_occupancy_q=args.occ_q,
                field_occupancy_c=args.occ_c,
            )
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"resources: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(resources_report(query, note), indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    checks = validate(cfg)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if c.failed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_ORACLE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mqsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate the quantum or KvN mediator model")
    r.add_argument("config", nargs="?", help="key = value config file (defaults if omitted)")
    r.add_argument("-o", "--output", help="override output_path")
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("resources", help="MQS vs fully-quantum qubit estimates")
    q.add_argument("preset", nargs="?", help=f"one of {sorted(res.PRESETS)}")
    q.add_argument("--action-ratio", type=float)
    q.add_argument("--n-grid", type=float)
    q.add_argument("--n-q", type=int, default=1)
    q.add_argument("--n-c", type=int, default=1)
    q.add_argument("--occ-q", type=int, default=2)
    q.add_argument("--occ-c", type=int, default=2)
    q.add_argument("-o", "--output", help="also write the JSON report here")
    q.set_defaults(func=cmd_resources)

    v = sub.add_parser("validate", help="run the oracle suite at reduced size")
    v.add_argument("config", nargs="?")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
