"""Run the default verification suite and write report.json / report.csv."""

import argparse
import sys
import time

from weighted_robin.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/default")
    args = ap.parse_args()
    t = time.perf_counter()
    code = main(["verify", "--default", "--out", args.out])
    print(f"elapsed {time.perf_counter() - t:.1f} s")
    sys.exit(code)
