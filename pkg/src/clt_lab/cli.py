"""``clt-lab`` command line: run, validate, schemes.

Exit codes: 0 ran, 2 validation failure, 3 engine failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import MODES, ConfigError, load_config
from .report import EngineFailure, emit, run
from .schemes import BUILTINS

EXIT_OK, EXIT_INVALID, EXIT_ENGINE = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clt-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment and write its report")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (default: config output.dir or '.')")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--seed", type=int)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("--config", required=True)

    sub.add_parser("schemes", help="list built-in schemes")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "schemes":
        for name, (_, desc) in BUILTINS.items():
            print(f"{name:18s} {desc}")
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            cfg = cfg.with_overrides(mode=args.mode, seed=args.seed)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "validate":
        print("ok")
        return EXIT_OK
    try:
        report = run(cfg)
    except EngineFailure as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    out = args.out or cfg.out_dir or "."
    for path in emit(report, out, cfg.formats):
        print(path)
    print(f"verdict: {report.verdict.tag}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
