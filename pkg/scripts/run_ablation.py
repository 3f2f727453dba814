#!/usr/bin/env python3
"""Unimodal-versus-fusion comparison on the synthetic benchmark.

Trains the three unimodal models and the four fusion models over repeated
seeds on one shared split, then writes mean/std R^2 reports, the
comparison table (CSV + JSON), and per-run curves.

    python scripts/run_ablation.py --out results/ablation --repeats 10
"""

import argparse
import json
import time
from pathlib import Path

from autorater.experiments import BenchmarkConfig, build_benchmark, run_comparison_suite
from autorater.training import ablation_table, ablation_to_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=10)
    parser.add_argument("--score", default="total")
    parser.add_argument("--shares", type=float, nargs=4, default=[0.6, 0.25, 0.15, 0.0],
                        help="variance shares: parametric text image noise")
    parser.add_argument("--corpus-seed", type=int, default=7)
    args = parser.parse_args()

    config = BenchmarkConfig(
        n=args.n, shares=tuple(args.shares), score_name=args.score, corpus_seed=args.corpus_seed
    )
    t0 = time.time()
    bench = build_benchmark(config)
    print(f"benchmark ready in {time.time() - t0:.1f}s "
          f"(n={args.n}, encoded_dim={bench.schema.encoded_dim})", flush=True)

    t0 = time.time()
    reports = run_comparison_suite(bench, n_repeats=args.repeats, verbose=True)
    print(f"comparison suite finished in {(time.time() - t0) / 60:.1f} min")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, report in reports.items():
        (out / f"report_{name}.json").write_text(json.dumps(report.to_json(), indent=2))
    table = ablation_table(list(reports.values()))
    (out / "comparison.json").write_text(json.dumps(table, indent=2))
    (out / "comparison.csv").write_text(ablation_to_csv(table))

    print(f"\n{'model':22s} {'mean R2':>8s} {'std':>7s} {'delta':>7s}")
    for row in table["rows"]:
        print(f"{row['model']:22s} {row['mean_r2']:8.3f} {row['std_r2']:7.3f} {row['delta_vs_best_unimodal']:7.3f}")
    print(f"\nartifacts in {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
