"""Command-line interface.

Subcommands mirror the pipeline stages; ``report`` runs the whole pipeline
(equivalent to ``run_experiment``) and ``repro <case>`` runs the bundled
canonical configuration for one of the published cases.

Exit codes: 0 success, 2 configuration error, 3 solver failure (with the
DOF in the message), 4 blow-up during data generation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BlowUpError, ConfigError, QPFailureError, SingularProblemError
from .simulate import CASES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_BLOWUP = 4


def _add_common(parser, config_required=True):
    parser.add_argument("--config", required=config_required, help="experiment config (INI)")
    parser.add_argument("--out", required=True, help="artifact output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-DOF solves")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stencilfit",
        description="Learn sparse, provably stable differential-operator stencils "
                    "from PDE snapshot data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("generate", "generate training snapshots"),
        ("learn", "learn operators for every configured sweep point"),
        ("analyze", "eigenvalue and Gershgorin reports for learned models"),
        ("forecast", "integrate learned models and emit error series"),
        ("report", "full pipeline: generate, learn, analyze, forecast, summarize"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("repro", help="run the canonical configuration of a published case")
    p.add_argument("case", choices=CASES)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    return parser


def _run_stages(args, upto: str) -> int:
    from .config import load_config
    from .runner import (
        run_experiment,
        stage_analyze,
        stage_forecast,
        stage_generate,
        stage_learn,
        write_manifest,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if upto == "report":
        run_experiment(args.config, out, seed=args.seed, threads=args.threads)
        return EXIT_OK
    config = load_config(args.config, seed_override=args.seed)
    snap = stage_generate(config, out)
    if upto == "generate":
        return EXIT_OK
    models = stage_learn(config, out, snap, threads=args.threads)
    if upto == "learn":
        return EXIT_OK
    if upto == "analyze":
        stage_analyze(config, out, models, threads=args.threads)
        return EXIT_OK
    stage_forecast(config, out, snap, models)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "repro":
            from .runner import repro

            repro(args.case, args.out, seed=args.seed, threads=args.threads)
            return EXIT_OK
        return _run_stages(args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularProblemError, QPFailureError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BlowUpError as exc:
        print(f"data generation blew up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
