"""Kolmogorov distance to the MP law across n, with both rate envelopes.

    python3 scripts/rate_sweep.py scripts/configs/default.json
    python3 scripts/rate_sweep.py scripts/configs/near_critical.json --workers 4
"""

import argparse
import time

from qspectra.experiments import ExperimentConfig, envelope_ratio, rate_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()

    cfg = ExperimentConfig.from_json(args.config)
    if args.workers:
        cfg = ExperimentConfig.from_dict(dict(cfg.to_dict(), workers=args.workers))

    t0 = time.perf_counter()
    rep = rate_sweep(cfg)
    elapsed = time.perf_counter() - t0

    r2 = envelope_ratio(rep.column("mean_ks"), rep.column("bound_thm2"))
    r1 = envelope_ratio(rep.column("pooled_ks"), rep.column("bound_thm1"))
    print(f"{cfg.distribution}  y={cfg.y}  reps={cfg.replications}  ({elapsed:.1f}s)")
    print(f"{'n':>6} {'p':>5} {'a_n':>8} {'mean_ks':>9} {'std':>8} {'pooled':>9} {'env2':>6} {'env1':>6}")
    for row, e2, e1 in zip(rep.rows, r2, r1):
        print(f"{row.n:6d} {row.p:5d} {row.a_n:8.4f} {row.mean_ks:9.5f} {row.ks_std:8.5f} {row.pooled_ks:9.5f} {e2:6.2f} {e1:6.2f}")
    print(f"slope mean_ks {rep.slope_mean_ks:.3f}   slope pooled_ks {rep.slope_pooled_ks:.3f}")
    if rep.ordering_violations:
        print("pooled > mean at n =", rep.ordering_violations)


if __name__ == "__main__":
    main()
