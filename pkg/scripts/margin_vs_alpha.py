"""Tabulate lambda_2(B) - lambda_2(Omega) across alpha in [-sigma_1(B), 0] for one domain.

Emits CSV suitable for plotting; the ball is volume-matched to the mesh.
"""

import argparse
import sys

import numpy as np

from weighted_robin.fem2d import assemble_parts, integrate_over_domain, solve_robin
from weighted_robin.mesh import parse_domain, triangulate
from weighted_robin.radial import lambda2_ball, steklov_ball
from weighted_robin.weights import parse_profile, radius_for_volume

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--domain", default="ellipse:1.5,0.8")
    ap.add_argument("--profile", default="linear:1")
    ap.add_argument("--refine", type=int, default=3)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    profile = parse_profile(args.profile)
    mesh = triangulate(parse_domain(args.domain), args.refine)
    parts = assemble_parts(mesh, profile)
    R = radius_for_volume(profile, 2, integrate_over_domain(mesh, profile, lambda r: 1.0))
    sigma = steklov_ball(profile, 2, R)
    print(f"# {args.domain} {profile.spec} R={R:.10g} sigma1(B)={sigma:.10g}", file=sys.stderr)
    print("alpha,lambda2_ball,lambda2_domain,margin")
    for alpha in np.linspace(-sigma, 0.0, args.points):
        ball = lambda2_ball(profile, 2, R, alpha).value
        dom = solve_robin(mesh, profile, alpha, 3, parts).eigenvalues[1]
        print(f"{alpha:.10g},{ball:.10g},{dom:.10g},{ball - dom:.10g}")
