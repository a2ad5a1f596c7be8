"""Command-line entry point: ``tpslab run|sweep|validate|list-scenarios``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..errors import ConfigInvalid, TpsLabError
from .engine import run_scenario, sweep, validate
from .scenarios import list_scenarios, resolve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _apply_overrides(cfg, args):
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.max_dim is not None:
        update["max_dim"] = args.max_dim
    return cfg.model_copy(update=update) if update else cfg


def _parse_values(text: str) -> list:
    text = text.strip()
    if text.startswith("["):
        return json.loads(text)
    values = []
    for item in text.split(","):
        item = item.strip()
        try:
            values.append(json.loads(item))
        except json.JSONDecodeError:
            values.append(item)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario JSON file or bundled scenario name")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")
        p.add_argument("--max-dim", type=int, help="override the dimension cap")

    common(sub.add_parser("run", help="run one scenario"))
    p_sweep = sub.add_parser("sweep", help="run a scenario over values of one parameter")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, help="dotted config path, e.g. model.h")
    p_sweep.add_argument("--values", required=True, help="comma-separated values or a JSON list")
    common(sub.add_parser("validate", help="check a scenario without running it"))
    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in list_scenarios():
            print(name)
        return EXIT_OK
    try:
        cfg = _apply_overrides(resolve(args.config), args)
        if args.command == "validate":
            findings = validate(cfg)
            for f in findings:
                print(f"{f['code']}\t{f['field']}\t{f['message']}")
            if not findings:
                print("ok")
            return EXIT_CONFIG if findings else EXIT_OK
        if args.command == "run":
            record = run_scenario(cfg, args.out)
            print(json.dumps(record.scalars, sort_keys=True, indent=2))
            return EXIT_OK
        records = sweep(cfg, args.axis, _parse_values(args.values), args.out, workers=args.workers)
        failed = sum(r.status != "ok" for r in records)
        print(f"{len(records)} runs, {failed} failed")
        return EXIT_NUMERIC if failed else EXIT_OK
    except (ConfigInvalid, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TpsLabError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
