"""Command line entry point: ``univeig run|list|validate``.

Exit codes: 0 when every verdict in the run is satisfied, 1 when some
verdict fails, 2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .scenarios import (
    BUILTIN_SCENARIOS,
    ConfigError,
    ScenarioError,
    apply_overrides,
    list_scenarios,
    load_config,
    resolve_scenario,
    run_scenario,
    validate_config,
)

EXIT_OK, EXIT_UNSATISFIED, EXIT_ERROR = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="univeig", description="Check universal eigenvalue inequalities.")
    p.add_argument("--version", action="version", version=f"univeig {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run built-in scenarios or YAML configs")
    run.add_argument("targets", nargs="+", metavar="scenario|config-path", help="name, path, or 'all'")
    run.add_argument("--k-max", type=int, default=None)
    run.add_argument("--tol", type=float, default=None, help="relative tolerance for verdicts")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default="univeig-out", help="output directory (default: %(default)s)")
    run.add_argument("--resolution", type=int, default=None, help="mesh resolution, subdivisions, or grid nodes per axis")
    run.add_argument("--jobs", type=int, default=1, help="run independent scenarios concurrently")

    sub.add_parser("list", help="list built-in scenarios")

    val = sub.add_parser("validate", help="check a config file without solving")
    val.add_argument("config")
    return p


def _run_one(cfg: dict, out: str):
    manifest = run_scenario(cfg, out)
    return manifest.scenario["name"], manifest.satisfied, manifest.output_dir, manifest.wall_clock


def _cmd_run(args) -> int:
    targets = list(BUILTIN_SCENARIOS) if args.targets == ["all"] else args.targets
    try:
        configs = [
            apply_overrides(resolve_scenario(t), args.k_max, args.tol, args.seed, args.resolution) for t in targets
        ]
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_ERROR
    results, failed = [], False
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, cfg, args.out) for cfg in configs]
            for f in futures:
                try:
                    results.append(f.result())
                except ScenarioError as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    failed = True
    else:
        for cfg in configs:
            try:
                results.append(_run_one(cfg, args.out))
            except ScenarioError as exc:
                print(f"error: {exc}", file=sys.stderr)
                failed = True
    for name, ok, where, secs in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:32s} {secs:8.2f}s  {where}")
    if failed:
        return EXIT_ERROR
    return EXIT_OK if all(ok for _, ok, _, _ in results) else EXIT_UNSATISFIED


def _cmd_validate(args) -> int:
    try:
        raw, locator = load_config(args.config)
        cfg = validate_config(raw, locator)
    except FileNotFoundError:
        print(f"error: {args.config}: no such file", file=sys.stderr)
        return EXIT_ERROR
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"{args.config}: {line}", file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps(cfg, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_scenarios():
            print(f"{name:32s} {desc}")
        return EXIT_OK
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
