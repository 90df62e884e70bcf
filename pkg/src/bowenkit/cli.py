"""Command line interface: run experiment configs, list built-in systems,
validate configs without computing.

Exit codes: 0 success, 2 invalid usage or config, 3 numerical-resolution
failure (the config parsed but the requested quantity cannot be resolved,
for example a universal underflow)."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import systems as S
from ._version import __version__
from .config import ConfigError, parse_config
from .runner import ResolutionError, run_config


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bowenkit",
        description="Covering-complexity and local-entropy experiments "
                    "for low-dimensional dynamical systems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute an experiment config")
    runp.add_argument("config", help="path to a .cfg experiment file")
    runp.add_argument("--workers", type=int, default=1,
                      help="worker pool size (default 1); results are "
                           "byte-identical for any value")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the config seed")
    runp.add_argument("--output", default=None,
                      help="output directory (overrides OUTPUT_DIR and "
                           "the config)")

    lsp = sub.add_parser("list-systems", help="table of built-in systems")
    lsp.add_argument("--json", action="store_true", dest="as_json",
                     help="machine-readable output")

    valp = sub.add_parser("validate", help="parse and schema-check a "
                                           "config, no compute")
    valp.add_argument("config")
    return p


def _resolve_outdir(args, cfg) -> Path:
    if args.output:
        return Path(args.output)
    env = os.environ.get("OUTPUT_DIR")
    if env:
        return Path(env)
    if cfg.outdir:
        return Path(cfg.outdir)
    return Path("runs") / cfg.name


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    outdir = _resolve_outdir(args, cfg)
    try:
        manifest = run_config(cfg, outdir, workers=args.workers,
                              seed=args.seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ResolutionError as e:
        print(f"resolution failure: {e}", file=sys.stderr)
        return 3
    print(f"{cfg.name}: wrote {outdir / 'results.csv'} "
          f"({manifest.wall_time_s:.3f}s, seed {manifest.seed})")
    return 0


def _cmd_list_systems(args) -> int:
    if args.as_json:
        doc = {name: {"parameters": params, "description": desc}
               for name, (params, desc) in S.BUILTIN_DOC.items()}
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0
    width = max(len(n) for n in S.BUILTIN_DOC)
    pwidth = max(len(p) for p, _ in S.BUILTIN_DOC.values())
    print(f"{'system':<{width}}  {'parameters':<{pwidth}}  description")
    for name, (params, desc) in S.BUILTIN_DOC.items():
        print(f"{name:<{width}}  {params:<{pwidth}}  {desc}")
    return 0


def _cmd_validate(args) -> int:
    try:
        cfg = parse_config(args.config)
        cfg.build_system()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    print(f"ok: {cfg.name} ({cfg.kind} on {cfg.system_name})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-systems":
        return _cmd_list_systems(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
