#!/usr/bin/env python3
"""Train one generator on a single synthetic behaviour cluster and report how
the losses and the generated percentile bands evolve.

Usage:
    python scripts/train_single_cluster.py [--homes 25] [--days 20] [--epochs 200]
"""

from __future__ import annotations

import argparse

import numpy as np

from profilegen.corpus import Archetype, CorpusSpec, synth_corpus
from profilegen.ingest import days_from_readings, parse_meter
from profilegen.neural import TrainConfig, population_stats, sample_population, train_gan
from profilegen.prep import normalise


def bump(t: int, center: float, width: float) -> tuple:
    hours = (np.arange(t) + 0.5) * (24.0 / t)
    return tuple((0.05 + np.exp(-0.5 * ((hours - center) / width) ** 2)).tolist())


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--homes", type=int, default=25)
    parser.add_argument("--days", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--out", default="/tmp/single_cluster_corpus")
    args = parser.parse_args()

    arch = Archetype("evening_peak", bump(24, 19.0, 2.0), 10.0, 0.8, 0.25, 0.15)
    spec = CorpusSpec(args.homes, args.days, 60, {"load": (arch,)}, seed=args.seed)
    files = synth_corpus(spec, args.out)

    by_home: dict[str, list] = {}
    for r in parse_meter(files.meter_paths["load"], "load").readings:
        by_home.setdefault(r.home_id, []).append(r)
    profiles = []
    for home_id in sorted(by_home):
        for day in days_from_readings(by_home[home_id], 60, 60):
            norm, _ = normalise(day)
            profiles.append(norm.values)
    profiles = np.array(profiles)
    print(f"training on {len(profiles)} unit-sum profiles (T=24)")

    cfg = TrainConfig(n_epochs=args.epochs, seed=args.seed)
    weights, trace = train_gan(profiles, cfg, "load", "wd", 0)

    print(f"{'epoch':>6} {'d_loss':>9} {'g_adv':>9} {'sum_pen':>10} {'pct_pen':>10}")
    for entry in trace[:: max(1, len(trace) // 10)] + [trace[-1]]:
        print(f"{entry.epoch:6d} {entry.d_loss:9.4f} {entry.g_adv:9.4f} "
              f"{entry.sum_pen:10.6f} {entry.pct_pen:10.4f}")

    population = sample_population(weights, 200, args.seed + 1)
    bands = population_stats(population)
    real = weights.real_stats
    coverage = float(np.mean((real[2] >= bands[0]) & (real[2] <= bands[4])))
    print(f"\nmean generated profile sum: {population.sum(axis=1).mean():.4f}")
    print(f"real median inside generated p10-p90 band: {coverage:.0%} of timesteps")
    print(f"final/initial percentile penalty: {trace[-1].pct_pen / trace[0].pct_pen:.5f}")


if __name__ == "__main__":
    main()
