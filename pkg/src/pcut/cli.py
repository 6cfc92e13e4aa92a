"""Command-line entry point: ``pcut --input data.csv --label-col 0 ...``."""
from __future__ import annotations

import argparse
import logging
import sys

from pcut.experiment import (
    CRITERIA,
    ROUNDINGS,
    ConfigError,
    ExperimentConfig,
    RunFailure,
    emit,
    execute,
)
from pcut.rounding import INIT_STRATEGIES


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _betas(text: str) -> list[float]:
    try:
        return [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad beta list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pcut", description="Spectral clustering experiments scored by Rand index.")
    p.add_argument("--input", required=True, help="CSV dataset")
    p.add_argument("--label-col", type=int, default=None, help="0-based column holding ground-truth labels")
    p.add_argument("--criterion", choices=CRITERIA, default="ncut")
    p.add_argument("--rounding", choices=ROUNDINGS, default="procrustes")
    p.add_argument("--init", choices=INIT_STRATEGIES, default="orthogonal")
    p.add_argument("--beta", type=_betas, default=[1.0], help="comma-separated kernel widths")
    p.add_argument("--classes", type=int, default=None, help="class count (default: from labels)")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        input=args.input,
        label_column=args.label_col,
        criterion=args.criterion,
        rounding=args.rounding,
        init=args.init,
        betas=args.beta,
        c=args.classes,
        replicates=args.replicates,
        seed=args.seed,
        output=args.out,
        fmt=args.format,
        max_iter=args.max_iter,
        workers=args.workers,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        config = config_from_args(args)
        config.validate()
        summary = execute(config)
        text = emit(summary, config.output, config.fmt)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"pcut: config error: {exc}", file=sys.stderr)
        return 1
    except (RunFailure, ValueError, RuntimeError) as exc:
        print(f"pcut: {exc}", file=sys.stderr)
        return 2
    if config.output in (None, "-"):
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
