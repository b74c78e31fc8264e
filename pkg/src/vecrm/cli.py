"""Command-line entry point: ``vecrm`` or ``python -m vecrm``."""
from __future__ import annotations

import argparse
import json
import sys

from .config import MODES, PRESETS, SOLVERS, ExperimentConfig, load_config, preset, validate
from .exceptions import ConfigError, EnumerationTooLarge, VecrmError
from .harness import OutputError, emit_outputs, run_experiment, summarize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENUMERATION = 3
EXIT_OUTPUT = 4
EXIT_OTHER = 5


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vecrm", description="Run task-assignment learning experiments.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="JSON experiment config")
    src.add_argument("--preset", choices=PRESETS, help="embedded experiment layout")
    p.add_argument("--solver", action="append", choices=SOLVERS, help="solver to run (repeatable)")
    p.add_argument("--seed", action="append", type=int, help="master seed (repeatable)")
    p.add_argument("--rounds", type=int, help="learning rounds per run")
    p.add_argument("--lambda", dest="lam", type=float, help="forgetting factor in [0, 1]")
    p.add_argument("--mode", choices=MODES, help="environment clock")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--quiet", action="store_true", help="do not print the summary")
    return p


def resolve_config(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig()
    if args.solver:
        cfg.solvers = list(dict.fromkeys(args.solver))
    if args.seed:
        cfg.seeds = list(args.seed)
    if args.rounds is not None:
        cfg.learner.rounds = args.rounds
    if args.lam is not None:
        cfg.learner.lam = args.lam
    if args.mode:
        cfg.learner.mode = args.mode
    if args.out:
        cfg.output_dir = args.out
    return validate(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = resolve_config(args)
        results = run_experiment(cfg, jobs=args.jobs)
        emit_outputs(results, cfg.output_dir)
    except ConfigError as exc:
        print(f"vecrm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationTooLarge as exc:
        print(f"vecrm: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION
    except OutputError as exc:
        print(f"vecrm: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (VecrmError, OSError) as exc:
        print(f"vecrm: {exc}", file=sys.stderr)
        return EXIT_OTHER
    if not args.quiet:
        print(json.dumps(summarize(results), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
