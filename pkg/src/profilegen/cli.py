"""Command-line surface: corpus | prepare | train | generate | evaluate | plot.

Exit codes: 0 success, 2 config error, 3 missing artifact, 4 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .common import ConfigError, DataError, MissingArtifactError
from .config import load_config
from .pipeline import (
    PLOT_FIGURES,
    run_corpus,
    run_evaluate,
    run_generate,
    run_plot,
    run_prepare,
    run_train,
)

EXIT_CONFIG = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_DATA = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profilegen",
        description="Generate realistic residential PV, load and EV daily profiles.",
    )
    parser.add_argument("--config", help="TOML run configuration", default=None)
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("corpus", help="write the synthetic reference corpus")
    sub.add_parser("prepare", help="raw CSVs to cluster models, profiles and matrices")
    sub.add_parser("train", help="train one generator per behaviour group")
    gen = sub.add_parser("generate", help="emit multi-day per-home profile CSVs")
    gen.add_argument("--homes", type=int, default=None, help="number of homes")
    gen.add_argument("--days", type=int, default=None, help="days per home")
    sub.add_parser("evaluate", help="TSTR/TRTS classifier evaluation")
    plot = sub.add_parser("plot", help="emit figure-analogue CSV and SVG files")
    plot.add_argument("figure", choices=PLOT_FIGURES)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "corpus":
            files = run_corpus(cfg)
            print(f"corpus written to {files.out_dir}")
        elif args.command == "prepare":
            summary = run_prepare(cfg)
            print(f"prepared {sum(summary.day_counts.values())} home-days into {cfg.artifact_dir}")
        elif args.command == "train":
            trained = run_train(cfg)
            print(f"trained {len(trained)} generators into {cfg.artifact_dir}")
        elif args.command == "generate":
            written = run_generate(cfg, args.homes, args.days)
            print(f"generated {len(written)} home files into {cfg.output_dir}")
        elif args.command == "evaluate":
            report = run_evaluate(cfg)
            print(
                f"TSTR {report['tstr_accuracy']:.3f}  TRTS {report['trts_accuracy']:.3f}  "
                f"random {report['random_baseline']:.3f}"
            )
        elif args.command == "plot":
            made = run_plot(cfg, args.figure)
            print("wrote " + ", ".join(str(p) for p in made))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifactError as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except (DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
