"""Write a synthetic 200-row file with the power-plant schema (AT, V, AP, RH, PE).

Rows are Gaussian with means, standard deviations and correlations close to
the published summary statistics of the real data set, rounded to two
decimals like the original.  It exists so the CLI path can be exercised
without the real file; MI values computed on it mean nothing.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

COLUMNS = ("AT", "V", "AP", "RH", "PE")
MEANS = np.array([19.65, 54.31, 1013.26, 73.31, 454.37])
SDS = np.array([7.45, 12.71, 5.94, 14.60, 17.07])
CORR = np.array(
    [
        [1.000, 0.844, -0.508, -0.543, -0.948],
        [0.844, 1.000, -0.414, -0.312, -0.870],
        [-0.508, -0.414, 1.000, 0.100, 0.518],
        [-0.543, -0.312, 0.100, 1.000, 0.390],
        [-0.948, -0.870, 0.518, 0.390, 1.000],
    ]
)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default=Path(__file__).resolve().parents[1] / "tests" / "data" / "ccpp_synthetic.csv")
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--seed", type=int, default=20240)
    args = p.parse_args(argv)

    cov = CORR * np.outer(SDS, SDS)
    rows = np.random.default_rng(args.seed).multivariate_normal(MEANS, cov, size=args.rows)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        w.writerows([f"{v:.2f}" for v in row] for row in rows)
    print(f"wrote {args.rows} rows to {args.out}")


if __name__ == "__main__":
    main()
