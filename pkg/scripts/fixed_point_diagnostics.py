"""Measured delta_n and b_n on a line z = u + iv, averaged over replications.

Reports how often the small-delta condition holds and whether the
|b_n| <= 2/sqrt(y|z|) bound holds, for each n in the config grid.
"""

import argparse

import numpy as np

from qspectra.experiments import ExperimentConfig, run_replications
from qspectra.fixed_point import diagnostics, mean_stieltjes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--v", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=21)
    args = ap.parse_args()

    cfg = ExperimentConfig.from_json(args.config)
    for n in cfg.n_grid:
        spectra = run_replications(cfg, n)
        y_p = cfg.p_for(n) / n
        rows = [diagnostics(mean_stieltjes(spectra, complex(u, args.v)), complex(u, args.v), y_p) for u in np.linspace(0.0, 3.0, args.points)]
        deltas = np.array([abs(d.delta_n) for d in rows])
        print(
            f"n={n:5d}  max|delta|={deltas.max():.2e}  threshold~{rows[0].leb_threshold:.2e}  "
            f"condition {sum(d.leb_condition for d in rows)}/{len(rows)}  "
            f"b_n bound {sum(d.leb_bound_holds for d in rows)}/{len(rows)}"
        )


if __name__ == "__main__":
    main()
