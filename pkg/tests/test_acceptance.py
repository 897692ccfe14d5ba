"""Acceptance criteria, one check per criterion.

Run `python tests/test_acceptance.py` for a plain PASS/FAIL listing, or via
pytest where each criterion is a separate test that also prints its line.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import DISK_NEUMANN_LAMBDA2  # noqa: E402
from weighted_robin.cli import main  # noqa: E402
from weighted_robin.fem2d import solve_robin  # noqa: E402
from weighted_robin.mesh import parse_domain, triangulate  # noqa: E402
from weighted_robin.radial import (N_GRID, TOL_MONO, RadialProblem, extend_g, f_profile, lambda2_ball,  # noqa: E402
                                   solve_radial, solve_radial_fd_oracle, steklov_ball)
from weighted_robin.verify import SuiteConfig, check_propositions, run_suite  # noqa: E402
from weighted_robin.weights import built_in_profiles  # noqa: E402

PROFILES = built_in_profiles()
DOMAINS = ["ellipse:1.5,0.8", "rectangle:1.2,0.8", "stadium:0.5,0.7", "perturbed_disk:1,0.15,2"]


def criterion_1():
    t = time.perf_counter()
    worst = 0.0
    for m, R in [(2, 1.0), (2, 2.0), (3, 1.0), (3, 2.0)]:
        s = steklov_ball(PROFILES[0], m, R)
        worst = max(worst, abs(s * R - 1.0))
    dt = time.perf_counter() - t
    return worst <= 1e-8 and dt < 1.0, f"max rel err {worst:.2e}, {dt:.2f} s"


def criterion_2():
    worst = -math.inf
    for p in PROFILES:
        for m in (2, 3):
            for R in (0.5, 1.0, 2.0):
                worst = max(worst, steklov_ball(p, m, R) - 1.0 / R)
    return worst <= 1e-8, f"max sigma1 - 1/R = {worst:.2e}"


def criterion_3():
    t = time.perf_counter()
    lam = lambda2_ball(PROFILES[0], 2, 1.0, 0.0).value
    rel = abs(lam - DISK_NEUMANN_LAMBDA2) / DISK_NEUMANN_LAMBDA2
    disk = parse_domain("disk:1")
    fem = [solve_robin(triangulate(disk, k), PROFILES[0], 0.0, 3).eigenvalues[1] for k in (1, 2, 3)]
    # three-level Richardson order estimate, no exact value needed
    slope = math.log2((fem[0] - fem[1]) / (fem[1] - fem[2]))
    dt = time.perf_counter() - t
    ok = rel <= 1e-7 and abs(slope - 2.0) <= 0.3 and dt < 60
    return ok, f"rel err {rel:.2e} vs Bessel oracle, FEM slope {slope:.3f}, {dt:.1f} s"


def criterion_4():
    worst = 0.0
    for p in PROFILES:
        for m in (2, 3):
            sigma = steklov_ball(p, m, 1.0)
            worst = max(worst, abs(lambda2_ball(p, m, 1.0, -sigma).value))
    return worst <= 1e-6, f"max |lambda2(-sigma1)| = {worst:.2e}"


def criterion_5():
    checks = []
    for p in PROFILES:
        for m in (2, 3):
            checks += check_propositions(p, m, 1.0, f_alphas_fractions=())
    failed = [c for c in checks if not c.passed]
    gap = min(c.margin for c in checks if c.check_id == "mu1_below_tau2")
    ok = not failed and gap > 0
    return ok, f"{len(checks)} checks, {len(failed)} failed, min tau2 - mu1 = {gap:.3g}"


def criterion_6():
    worst = 0.0
    for p in PROFILES:
        for m in (2, 3):
            sigma = steklov_ball(p, m, 1.0)
            for alpha in (0.0, -sigma / 2, -sigma):
                g = solve_radial(RadialProblem(p, m, 1.0, alpha, 1), 1)[0]
                ext = extend_g(g, 2.0)
                F = f_profile(ext, alpha, np.linspace(g.problem.eps, 2.0, N_GRID))
                worst = max(worst, F.max_increment / F.scale)
    return worst <= TOL_MONO, f"max increment / max|F| = {worst:.2e}"


def criterion_7():
    t = time.perf_counter()
    rep = run_suite(SuiteConfig(domains=DOMAINS, suites=["theorem"], refinement=3))
    dt = time.perf_counter() - t
    failed = [c for c in rep.checks if not c.passed]
    strict_profiles = {p.spec for p in PROFILES if p.strictly_increasing()}
    not_strict = [c for c in rep.checks if c.params["profile"] in strict_profiles and c.margin <= c.tolerance]
    ratio = min(c.margin / c.tolerance for c in rep.checks)
    ok = len(rep.checks) == 48 and not failed and not not_strict and dt < 600
    return ok, (f"{len(rep.checks)} cases, {len(failed)} failed, {len(not_strict)} not strict, "
                f"min margin/tol {ratio:.1f}, {dt:.0f} s")


def criterion_8():
    rep = run_suite(SuiteConfig(domains=DOMAINS, suites=["chain"], refinement=3))
    by = {}
    for c in rep.checks:
        by.setdefault(c.check_id, []).append(c)
    ratio_err = max(abs(c.lhs - c.rhs) / max(abs(c.rhs), 1.0) for c in by["ball_ratio_identity"])
    wanted = ("rearrangement_g2", "rearrangement_F", "symmetrization_decreasing", "ball_ratio_identity")
    failed = [c for k in wanted for c in by[k] if not c.passed]
    ok = not failed and ratio_err <= 1e-6 and len(by["symmetrization_decreasing"]) == 3 * 16
    return ok, f"{sum(len(by[k]) for k in wanted)} chain checks, {len(failed)} failed, ratio err {ratio_err:.1e}"


def criterion_9():
    worst = 0.0, None
    for p in PROFILES:
        for mode in (0, 1):
            prob = RadialProblem(p, 2, 1.0, 0.0, mode)
            exact = np.array([s.eigenvalue for s in solve_radial(prob, 3)])
            for n in (250, 500, 1000, 2000):
                fd = np.array(solve_radial_fd_oracle(prob, n, 3))
                c = np.max(np.abs(fd - exact)) * n**2
                if c > worst[0]:
                    worst = c, (p.spec, mode, n)
    return worst[0] <= 5.0, f"max n^2 |fd - shooting| = {worst[0]:.1f} (bound 5) at {worst[1]}"


def criterion_10():
    with tempfile.TemporaryDirectory() as d:
        bodies = []
        for k in range(2):
            out = Path(d) / f"run{k}"
            code = main(["verify", "--default", "--out", str(out), "--quiet"])
            bodies.append((out / "report.csv").read_bytes())
    n = bodies[0].count(b"\n") - 1
    return code == 0 and bodies[0] == bodies[1] and n >= 60, f"exit {code}, {n} rows, identical={bodies[0] == bodies[1]}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, len(CRITERIA) + 1))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        results.append(ok)
        print(_line(k, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
