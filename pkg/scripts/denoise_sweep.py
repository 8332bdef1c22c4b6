"""Mean output SNR per method over a grid of noise shapes and input SNRs."""

import argparse
import dataclasses
import sys
from pathlib import Path

from wavepeel.benchlab import parse_config, rows_to_csv, run_denoise_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", help="base experiment config")
    ap.add_argument("--shapes", default="0.2,0.4,0.6,0.8,1,1.5,2")
    ap.add_argument("--snr-db", default="0,3,4.8")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    base = parse_config(Path(args.config).read_text())
    rows = []
    for snr in (float(v) for v in args.snr_db.split(",")):
        for u in (float(v) for v in args.shapes.split(",")):
            cfg = dataclasses.replace(base, noise_shape=u, snr_in=snr, snr_in_db=True)
            rep = run_denoise_experiment(cfg, workers=args.workers)
            rows += rep.csv_rows()
            print(f"snr={snr:g} dB u_n={u:g} done", file=sys.stderr)
    sys.stdout.write(rows_to_csv(rows))


if __name__ == "__main__":
    main()
