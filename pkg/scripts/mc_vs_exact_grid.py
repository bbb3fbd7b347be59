#!/usr/bin/env python3
"""Desk-scale grid comparing the trial estimator with the exact fold.

Runs the bench harness over a small size grid, prints the per-cell table,
and fits the estimator's time-versus-size exponent.  The exact fold is given
a short wall cap so infeasible cells show up as "capped" rather than hanging
the run; the estimator keeps going far past that point.
"""

from __future__ import annotations

import argparse

from beliefmc.bench import run_bench


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="5,10,20,40", help="comma-separated grid sizes")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--target-conflict", type=float, default=0.5)
    ap.add_argument("--exact-cap", type=float, default=5.0, help="seconds")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    report = run_bench(
        sizes,
        sizes,
        trials=args.trials,
        seed=args.seed,
        target_conflict=args.target_conflict,
        exact_cap_s=args.exact_cap,
    )
    print(f"{'m':>4} {'n':>4} {'kappa':>6} {'draws':>6} {'mc_ms':>9} {'exact_ms':>10} {'abs_err':>8}")
    for c in report.cells:
        exact_ms = "capped" if c.exact_capped else (
            "-" if c.exact_wall_ms is None else f"{c.exact_wall_ms:.1f}"
        )
        err = "-" if c.abs_error is None else f"{c.abs_error:.4f}"
        note = f"  [{c.note}]" if c.note else ""
        print(
            f"{c.source_count:>4} {c.element_count:>4} {c.kappa_hat:>6.3f}"
            f" {c.draws_per_trial:>6.2f} {c.mc_wall_ms:>9.2f} {exact_ms:>10} {err:>8}{note}"
        )
    if report.time_exponent is None:
        print("not enough cells to fit a time exponent")
    else:
        print(f"estimator wall time ~ (m*n)^{report.time_exponent:.2f} at N={args.trials}")


if __name__ == "__main__":
    main()
