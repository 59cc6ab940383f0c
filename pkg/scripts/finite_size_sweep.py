"""Sweep N and tabulate how the escape statistics approach their large-N limits.

    python scripts/finite_size_sweep.py --dims 2 4 8 16 32 64 128 256 --trials 300
"""
import argparse
import math

from bhescape import stats
from bhescape.experiments import ExperimentConfig, run_experiment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256])
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print(f"large-N limits: sum(lambda)/sqrt(N) -> {stats.trace_norm_constant():.5f}, "
          f"fidelity -> {stats.asymptotic_fidelity():.5f}, "
          f"entropy deficit -> {stats.page_deficit_limit_bits():.4f} bits")
    print(f"{'N':>5} {'ratio':>9} {'banaszek':>9} {'typical':>9} {'exact':>9} "
          f"{'exact-ban':>10} {'deficit':>8}")
    for n in args.dims:
        s = run_experiment(ExperimentConfig("fidelity", dim=n, trials=args.trials, seed=args.seed))
        m = s.metrics
        deficit = math.log2(n) - m["entropy_bits"].mean
        print(f"{n:>5} {m['trace_norm_ratio'].mean:9.5f} {m['banaszek_f'].mean:9.5f} "
              f"{m['typical_f'].mean:9.5f} {m['mean_exact_f'].mean:9.5f} "
              f"{m['exact_minus_banaszek'].mean:10.5f} {deficit:8.4f}")


if __name__ == "__main__":
    main()
