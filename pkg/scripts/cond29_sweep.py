"""cond29 estimates for P_n under the default LUR renorm, plus the f_m
non-denting control on the MLUR3 ball; both written as CSV."""

import argparse
from pathlib import Path

from dentlab.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", default="0")
    ap.add_argument("--restarts", default="32")
    ap.add_argument("--iters", default="300")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    common = ["--seed", args.seed, "--restarts", args.restarts, "--iters", args.iters]
    cli(["sweep", "cond29", "--n", "1,2,5,10,20,40", "--eps", "1e-4,1e-3,1e-2,1e-1", "--out", str(out / "cond29.csv")] + common)
    cli(["sweep", "fn", "--n", "4,8,16", "--eps", "1e-8,1e-6,1e-4,1e-2", "--out", str(out / "fn.csv")] + common)
    print(f"wrote {out / 'cond29.csv'} and {out / 'fn.csv'}")


if __name__ == "__main__":
    main()
