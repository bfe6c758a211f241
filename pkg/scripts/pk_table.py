"""Table of |||(P_k - lam R_k) u||| / |||u||| for u = e_1 + ... + e_(k+1).

Also prints the hand-expanded difference of squares so the sign can be read off.
"""

import argparse
import csv
import sys

from dentlab.norms import LurRenormConfig
from dentlab.witnesses import pk_witness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=20)
    ap.add_argument("--functionals", choices=("coordinate", "zero"), default="coordinate")
    args = ap.parse_args()
    cfg = LurRenormConfig(functionals=args.functionals)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["k", "lam", "ratio", "closed_form_diff"])
    for k in range(1, args.kmax + 1):
        for i in range(1, 11):
            lam = i / 10
            r = pk_witness(k, lam, cfg)
            diff = (1 - 2.0 ** (1 - k)) * (2 * lam + lam * lam) - 1.5 * 2.0**-k * (1 - lam * lam)
            w.writerow([k, lam, repr(r["ratio"]), repr(diff) if args.functionals == "coordinate" else ""])


if __name__ == "__main__":
    main()
