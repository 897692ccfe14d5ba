"""Command line front end: `wrobin ball | domain | verify`."""

from __future__ import annotations

import argparse
import os
import sys

from .fem2d import AssemblyError, solve_robin, solve_steklov, write_spectrum
from .mesh import DomainParameterError, MeshError, parse_domain, triangulate, write_mesh
from .radial import ConvergenceError, DomainError, lambda1_ball, lambda2_ball, steklov_ball, write_radial_csv
from .verify import (ConfigError, SuiteConfig, _Cache, check_weinberger_chain, parse_config_text,
                     resolve_alphas, run_suite)
from .weights import ProfileError, UnboundedSearchError, parse_profile

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wrobin", description="Weighted Robin/Steklov eigenvalues on balls and planar domains.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("ball", help="radial eigenvalues of a ball")
    b.add_argument("--profile", default="zero")
    b.add_argument("--m", type=int, default=2)
    b.add_argument("--R", type=float, required=True)
    b.add_argument("--alpha", type=float, default=0.0)
    b.add_argument("--csv", help="write r, g, g_prime, F samples of the mode-1 solution")

    d = sub.add_parser("domain", help="FEM eigenvalues of a planar domain")
    d.add_argument("--kind", required=True, help="e.g. disk:1, ellipse:1.5,0.8, perturbed_disk:1,0.15,2")
    d.add_argument("--profile", default="zero")
    d.add_argument("--alpha", type=float, default=0.0)
    d.add_argument("--refine", type=int, default=3)
    d.add_argument("--count", type=int, default=3)
    d.add_argument("--steklov", action="store_true")
    d.add_argument("--out", help="directory for mesh.txt and spectrum.csv")

    v = sub.add_parser("verify", help="run verification checks")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--default", action="store_true")
    g.add_argument("--config")
    g.add_argument("--suite", choices=["chain"])
    v.add_argument("--domain")
    v.add_argument("--profile", default="zero")
    v.add_argument("--alpha", type=float)
    v.add_argument("--refine", type=int, default=3)
    v.add_argument("--out", default="out")
    v.add_argument("--quiet", action="store_true")
    return p


def _ball(args):
    profile = parse_profile(args.profile)
    if not args.R > 0:
        raise ValueError("--R must be positive")
    sigma1 = steklov_ball(profile, args.m, args.R)
    lam1 = lambda1_ball(profile, args.m, args.R, args.alpha)
    res = lambda2_ball(profile, args.m, args.R, args.alpha)
    print(f"profile   {profile.spec}  m={args.m}  R={args.R:g}  alpha={args.alpha:g}")
    print(f"lambda1   {lam1:.12g}")
    print(f"lambda2   {res.value:.12g}   (mu1={res.mu1:.12g}, tau2={res.tau2:.12g})")
    print(f"sigma1    {sigma1:.12g}")
    if args.csv:
        from .radial import RadialProblem, solve_radial
        g = solve_radial(RadialProblem(profile, args.m, args.R, args.alpha, 1), 1)[0]
        write_radial_csv(args.csv, g, args.alpha)
    return EXIT_OK


def _domain(args):
    profile = parse_profile(args.profile)
    domain = parse_domain(args.kind)
    mesh = triangulate(domain, args.refine)
    if args.steklov:
        res = solve_steklov(mesh, profile, args.count)
    else:
        res = solve_robin(mesh, profile, args.alpha, args.count)
    label = "sigma" if args.steklov else "lambda"
    print(f"{domain.spec}  profile={profile.spec}  nodes={mesh.n_nodes}  refine={args.refine}")
    for i, val in enumerate(res.eigenvalues):
        print(f"{label}_{i}  {val:.12g}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_mesh(os.path.join(args.out, "mesh.txt"), mesh)
        write_spectrum(os.path.join(args.out, "spectrum.csv"), res)
    return EXIT_OK


def _write_report(report, out):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out, "report.csv"), "w") as fh:
        fh.write(report.to_csv())


def _verify(args):
    say = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    if args.suite == "chain":
        if not args.domain:
            raise ValueError("--suite chain needs --domain")
        profile = parse_profile(args.profile)
        domain = parse_domain(args.domain)
        cache = _Cache()
        from .verify import VerificationReport
        R = cache.matched_radius(domain, profile, args.refine)
        sigma1 = cache.steklov(profile, 2, R)
        alpha = -0.5 * sigma1 if args.alpha is None else args.alpha
        resolve_alphas(sigma1, [alpha])
        report = VerificationReport("chain", [profile.spec], [domain.spec], [alpha],
                                    settings={"refinement": args.refine})
        report.add(check_weinberger_chain(profile, domain, alpha, args.refine, _cache=cache))
    else:
        if args.default:
            config = SuiteConfig()
        else:
            with open(args.config) as fh:
                config = parse_config_text(fh.read())
        report = run_suite(config, progress=say)
    _write_report(report, args.out)
    s = report.summary
    print(f"{s['total']} checks, {s['passed']} passed, {s['failed']} failed "
          f"({s['exploratory']} exploratory); report in {args.out}/")
    for c in report.checks:
        if not c.passed:
            print(f"FAIL {c.check_id} {c.params} margin={c.margin:.3g} tol={c.tolerance:.3g} {c.notes}")
    return EXIT_OK if report.ok else EXIT_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"ball": _ball, "domain": _domain, "verify": _verify}[args.command]
    try:
        return handler(args)
    except (ConvergenceError, UnboundedSearchError, AssemblyError) as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ProfileError, DomainParameterError, ConfigError, DomainError, MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
