"""Mesh convergence of lambda_2 and sigma_1 on a domain, with observed orders.

Prints one row per refinement level; the last column is the order estimated
from three consecutive levels.
"""

import argparse
import csv
import math
import sys

from weighted_robin.fem2d import solve_robin, solve_steklov
from weighted_robin.mesh import parse_domain, triangulate
from weighted_robin.weights import parse_profile


def study(domain, profile, alpha, levels, steklov=False):
    rows = []
    for k in levels:
        mesh = triangulate(domain, k)
        if steklov:
            val = solve_steklov(mesh, profile, 3).eigenvalues[1]
        else:
            val = solve_robin(mesh, profile, alpha, 3).eigenvalues[1]
        rows.append((k, mesh.n_nodes, mesh.h, val))
    out = []
    for i, (k, n, h, val) in enumerate(rows):
        order = math.nan
        if i >= 2:
            d1, d2 = rows[i - 2][3] - rows[i - 1][3], rows[i - 1][3] - val
            if d1 * d2 > 0:
                order = math.log2(d1 / d2)
        out.append((k, n, h, val, order))
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--domain", default="disk:1")
    ap.add_argument("--profile", default="zero")
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--levels", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--steklov", action="store_true")
    args = ap.parse_args()
    rows = study(parse_domain(args.domain), parse_profile(args.profile), args.alpha, args.levels, args.steklov)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["level", "nodes", "h", "sigma1" if args.steklov else "lambda2", "order"])
    for k, n, h, val, order in rows:
        w.writerow([k, n, f"{h:.6g}", f"{val:.12g}", f"{order:.3f}"])
