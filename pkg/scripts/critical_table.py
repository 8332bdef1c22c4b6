"""Critical constant, critical fixed point and the F_m bound over a shape grid."""

import argparse
import sys

import numpy as np

from wavepeel.benchlab import rows_to_csv
from wavepeel.cli import fc_table_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--u-min", type=float, default=0.1)
    ap.add_argument("--u-max", type=float, default=4.0)
    ap.add_argument("--step", type=float, default=0.1)
    args = ap.parse_args()
    grid = np.round(np.arange(args.u_min, args.u_max + args.step / 2, args.step), 10)
    rows = fc_table_rows([float(u) for u in grid])
    sys.stdout.write(rows_to_csv(rows, ["u", "F_c", "x_star_c", "F_m", "error"]))


if __name__ == "__main__":
    main()
