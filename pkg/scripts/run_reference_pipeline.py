#!/usr/bin/env python3
"""Run the whole reference pipeline: corpus -> prepare -> train -> generate
-> evaluate -> every plot figure.

Usage:
    python scripts/run_reference_pipeline.py [--config configs/reference.toml]
"""

from __future__ import annotations

import argparse
import sys
import time

from profilegen.cli import main as cli_main
from profilegen.pipeline import PLOT_FIGURES


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/reference.toml")
    args = parser.parse_args()

    commands = [["corpus"], ["prepare"], ["train"], ["generate"], ["evaluate"]]
    commands += [["plot", figure] for figure in PLOT_FIGURES]
    for command in commands:
        started = time.monotonic()
        print(f"==> profilegen {' '.join(command)}")
        code = cli_main(["--config", args.config] + command)
        if code != 0:
            print(f"command {command} failed with exit code {code}", file=sys.stderr)
            return code
        print(f"    done in {time.monotonic() - started:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
