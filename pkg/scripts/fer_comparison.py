#!/usr/bin/env python3
"""BER/FER comparison of the 4x4 flagship construction against the 2x2 one.

Both codes use N = 1024, K = 256, frozen sets designed at eps = 0.5; the
channel sweeps eps in {0.30, 0.35, 0.40, 0.45, 0.50}. Points below the
design rate have FERs far beyond Monte Carlo reach, so the trial cap rules
there and zero-error points report one-sided intervals. At eps = 0.5 the two
codes' intervals are compared.
"""

import argparse
import time

from polarkit import PolarCode, StopRule, compare_reports, parse_kernel, run_monte_carlo
from polarkit.ioutil import atomic_write_text
from polarkit.sim import sim_csv_text

SWEEP = (0.30, 0.35, 0.40, 0.45, 0.50)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20240509)
    parser.add_argument("--min-frame-errors", type=int, default=100)
    parser.add_argument("--max-trials", type=int, default=80_000_000)
    parser.add_argument("--out", default="fer_comparison.csv")
    args = parser.parse_args()

    stop = StopRule(args.min_frame_errors, args.max_trials)
    codes = {
        "4x4": PolarCode.construct(parse_kernel("1000,1001,0101,1111"), 5, 256, 0.5),
        "2x2": PolarCode.construct(parse_kernel("10,11"), 10, 256, 0.5),
    }
    reports = []
    at_half = {}
    for label, code in codes.items():
        for eps in SWEEP:
            start = time.perf_counter()
            report = run_monte_carlo(code, eps, stop, master_seed=args.seed)
            reports.append(report)
            print(
                f"{label} eps={eps:.2f}: trials={report.trials} "
                f"frame_errors={report.frame_errors} fer={report.fer:.3g} "
                f"ber={report.ber:.3g} ({time.perf_counter() - start:.0f}s)"
            )
            if eps == 0.50:
                at_half[label] = report
    atomic_write_text(args.out, sim_csv_text(reports))
    verdict = compare_reports(at_half["4x4"], at_half["2x2"])
    print(f"eps=0.50 comparison: {verdict.message}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
