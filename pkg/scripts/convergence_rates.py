"""Exceedance frequencies of the noisy iteration, plus per-step fluctuations."""

import argparse
import sys
from pathlib import Path

import numpy as np

from wavepeel.benchlab import ConvergenceConfig, fluctuation_profile, parse_config, rows_to_csv, run_convergence_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--fluctuations", type=int, default=0, metavar="K",
                    help="also print median |eps_k| for k < K per N (supercritical only)")
    args = ap.parse_args()

    cfg = parse_config(Path(args.config).read_text(), ConvergenceConfig)
    rows = run_convergence_experiment(cfg, workers=args.workers)
    sys.stdout.write(rows_to_csv(rows, sorted({k for r in rows for k in r})))
    if args.fluctuations and cfg.F_factor > 1:
        for N in cfg.N_grid:
            prof = fluctuation_profile(cfg.u, cfg.F_factor, N, args.fluctuations, cfg.replications,
                                       cfg.base_seed, cfg.sigma)
            med = np.median(prof, axis=0)
            print(f"N={N} median |eps_k|: " + " ".join(f"{v:.3g}" for v in med), file=sys.stderr)


if __name__ == "__main__":
    main()
