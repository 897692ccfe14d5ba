"""Verification harness: ball-maximality of the second Robin eigenvalue and its supporting facts.

Every check produces a CheckResult with a signed margin (positive means the
inequality holds with room to spare) and a tolerance; a check passes iff
margin >= -tolerance.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from . import radial
from .fem2d import assemble_parts, integrate_over_domain, solve_robin, solve_steklov
from .mesh import StarDomain, parse_domain, rings_for, triangulate
from .radial import RadialProblem, extend_g, f_profile, f_values, lambda2_ball, solve_radial, steklov_ball
from .weights import ProfileError, WeightProfile, parse_profile, radial_integral, radius_for_volume

TOL_FLOOR = 1e-6
BAND_FACTOR = 3.0
EQUALITY_FACTOR = 5.0
LAMBDA2_FLOOR = 1e-9
BC_FLOOR = 1e-8
STEKLOV_FLOOR = 1e-8
RATIO_REL = 1e-6


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    params: dict
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    notes: str = ""

    @classmethod
    def make(cls, check_id, params, lhs, rhs, tolerance, notes="", margin=None):
        margin = rhs - lhs if margin is None else margin
        return cls(check_id, dict(params), float(lhs), float(rhs), float(margin), float(tolerance),
                   bool(margin >= -tolerance), notes)

    @property
    def asserted(self) -> bool:
        return not self.params.get("exploratory", False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = bool(self.margin >= -self.tolerance)
        return d


@dataclass
class VerificationReport:
    suite: str
    profiles: list[str]
    domains: list[str]
    alpha_grid: list[float]
    checks: list[CheckResult] = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def add(self, results: CheckResult | Iterable[CheckResult]):
        if isinstance(results, CheckResult):
            results = [results]
        self.checks.extend(results)

    @property
    def summary(self) -> dict:
        asserted = [c for c in self.checks if c.asserted]
        return {
            "total": len(self.checks),
            "passed": sum(c.passed for c in self.checks),
            "failed": sum(not c.passed for c in self.checks),
            "asserted_failed": sum(not c.passed for c in asserted),
            "exploratory": len(self.checks) - len(asserted),
        }

    @property
    def ok(self) -> bool:
        return self.summary["asserted_failed"] == 0

    def to_json(self) -> str:
        body = {
            "suite": self.suite,
            "profiles": self.profiles,
            "domains": self.domains,
            "alpha_grid": self.alpha_grid,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
            "settings": self.settings,
        }
        return json.dumps(body, indent=2, sort_keys=False)

    def to_csv(self) -> str:
        keys = sorted({k for c in self.checks for k in c.params})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_id", *keys, "lhs", "rhs", "margin", "tol", "passed"])
        for c in self.checks:
            d = c.to_dict()
            w.writerow([c.check_id, *(_fmt(c.params.get(k, "")) for k in keys),
                        _fmt(c.lhs), _fmt(c.rhs), _fmt(c.margin), _fmt(c.tolerance), d["passed"]])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool) or not isinstance(v, float):
        return v
    return f"{v:.12g}"


def _flags(margin, tol, strict_expected):
    notes = []
    if abs(margin) <= EQUALITY_FACTOR * tol:
        notes.append("equality-candidate")
    if strict_expected:
        notes.append("strict" if margin > tol else "not-strict")
    return ";".join(notes)


class _Cache:
    """Memoises meshes, assembled matrices and radial solves within one run."""

    def __init__(self):
        self.meshes = {}
        self.parts = {}
        self.radial = {}

    def mesh(self, domain: StarDomain, level: int):
        key = (domain.spec, level)
        if key not in self.meshes:
            self.meshes[key] = triangulate(domain, level)
        return self.meshes[key]

    def assembled(self, domain, profile, level):
        key = (domain.spec, profile.spec, level)
        if key not in self.parts:
            self.parts[key] = assemble_parts(self.mesh(domain, level), profile)
        return self.parts[key]

    def matched_radius(self, domain, profile, level, m=2):
        mesh = self.mesh(domain, level)
        volume = integrate_over_domain(mesh, profile, lambda r: 1.0)
        return radius_for_volume(profile, m, volume)

    def steklov(self, profile, m, R):
        key = ("steklov", profile.spec, m, R)
        if key not in self.radial:
            self.radial[key] = steklov_ball(profile, m, R)
        return self.radial[key]

    def lambda2(self, profile, m, R, alpha):
        key = ("lambda2", profile.spec, m, R, alpha)
        if key not in self.radial:
            self.radial[key] = lambda2_ball(profile, m, R, alpha)
        return self.radial[key]

    def mode1(self, profile, m, R, alpha):
        res = self.lambda2(profile, m, R, alpha)
        if res.solution.problem.angular_mode == 1:
            return res.solution
        key = ("mode1", profile.spec, m, R, alpha)
        if key not in self.radial:
            self.radial[key] = solve_radial(RadialProblem(profile, m, R, alpha, 1), 1)[0]
        return self.radial[key]


def _is_ball(domain: StarDomain) -> bool:
    return domain.name == "disk"


def _fem_pair(cache, domain, profile, refinement, fn):
    """fn(mesh, parts) at the chosen level and one level coarser."""
    out = []
    for level in (refinement - 1, refinement):
        out.append(fn(cache.mesh(domain, level), cache.assembled(domain, profile, level)))
    return out


def _band(coarse, fine):
    # h^2 convergence and halving h: error(fine) ~ |fine - coarse| / 3
    return max(TOL_FLOOR, BAND_FACTOR * abs(fine - coarse) / 3.0)


def resolve_alphas(sigma1, alpha_grid=None, alpha_fractions=None):
    if alpha_fractions is not None:
        return [-float(f) * sigma1 if f else 0.0 for f in alpha_fractions]
    alphas = [float(a) for a in alpha_grid]
    for a in alphas:
        if a > 0 or a < -sigma1 * (1 + 1e-12):
            raise ValueError(f"alpha={a} outside [-sigma1(B), 0] = [{-sigma1:.6g}, 0]")
    return alphas


def check_theorem_1(profile: WeightProfile, domain: StarDomain, alpha_grid=None, refinement: int = 3,
                    alpha_fractions=None, _cache=None) -> list[CheckResult]:
    """lambda_2(Omega) <= lambda_2(B) over an alpha grid, B volume-matched to the mesh."""
    cache = _cache or _Cache()
    R = cache.matched_radius(domain, profile, refinement)
    sigma1 = cache.steklov(profile, 2, R)
    alphas = resolve_alphas(sigma1, alpha_grid, alpha_fractions)
    strict = (not _is_ball(domain)) and profile.strictly_increasing()
    out = []
    for k, alpha in enumerate(alphas):
        params = {"profile": profile.spec, "domain": domain.spec, "alpha": alpha, "R": R,
                  "refinement": refinement}
        if alpha_fractions is not None:
            params["alpha_fraction"] = float(alpha_fractions[k])
        if profile.exploratory:
            params["exploratory"] = True
        try:
            coarse, fine = _fem_pair(cache, domain, profile, refinement,
                                     lambda mesh, parts: solve_robin(mesh, profile, alpha, 3, parts).eigenvalues[1])
            ball = cache.lambda2(profile, 2, R, alpha).value
        except (RuntimeError, ArithmeticError) as exc:
            out.append(CheckResult("robin_ball_maximal", params, math.nan, math.nan, -math.inf, 0.0, False,
                                   f"solver error: {exc}"))
            continue
        tol = _band(coarse, fine)
        margin = ball - fine
        out.append(CheckResult.make("robin_ball_maximal", params, fine, ball, tol,
                                    _flags(margin, tol, strict)))
    return out


def check_corollary(profile: WeightProfile, domain: StarDomain, refinement: int = 3, _cache=None) -> CheckResult:
    """sigma_1(Omega) <= sigma_1(B)."""
    cache = _cache or _Cache()
    R = cache.matched_radius(domain, profile, refinement)
    params = {"profile": profile.spec, "domain": domain.spec, "R": R, "refinement": refinement}
    if profile.exploratory:
        params["exploratory"] = True
    try:
        coarse, fine = _fem_pair(cache, domain, profile, refinement,
                                 lambda mesh, parts: solve_steklov(mesh, profile, 3, parts).eigenvalues[1])
        ball = cache.steklov(profile, 2, R)
    except (RuntimeError, ArithmeticError) as exc:
        return CheckResult("steklov_ball_maximal", params, math.nan, math.nan, -math.inf, 0.0, False,
                           f"solver error: {exc}")
    tol = _band(coarse, fine)
    return CheckResult.make("steklov_ball_maximal", params, fine, ball, tol,
                            _flags(ball - fine, tol, not _is_ball(domain)))


def default_alpha_grid(sigma1: float, n: int = 11) -> list[float]:
    return [-sigma1 * (1 - k / (n - 1)) for k in range(n)]


def check_propositions(profile: WeightProfile, m: int = 2, R: float = 1.0, alpha_grid=None,
                       f_alphas_fractions=(0.0, 0.5, 1.0), _cache=None) -> list[CheckResult]:
    """Ball-side facts: Steklov bound 1/R, monotonicity of g, mu1 < tau2, lambda2 >= 0, F decreasing."""
    cache = _cache or _Cache()
    out = []
    base = {"profile": profile.spec, "m": m, "R": R}
    sigma1 = cache.steklov(profile, m, R)
    out.append(CheckResult.make("steklov_upper_bound", base, sigma1, 1.0 / R, STEKLOV_FLOOR))
    alphas = default_alpha_grid(sigma1) if alpha_grid is None else [float(a) for a in alpha_grid]
    strict_h = profile.strictly_increasing(r_max=R)
    for alpha in alphas:
        p = {**base, "alpha": alpha}
        res = cache.lambda2(profile, m, R, alpha)
        g = cache.mode1(profile, m, R, alpha)
        interior = g.grid < R
        gp_min = float(np.min(g.g_prime_values[interior]))
        out.append(CheckResult.make("g_increasing", p, 0.0, gp_min, 0.0))
        if alpha >= -2.0 / R:
            robin = g.g_prime_values + alpha * g.g_values
            out.append(CheckResult.make("g_prime_dominates_alpha_g", p, 0.0, float(np.min(robin)), BC_FLOOR))
        else:
            out.append(CheckResult.make("g_prime_dominates_alpha_g", p, 0.0, 0.0, 0.0,
                                        "skipped: alpha < -2/R outside hypothesis"))
        note = "" if strict_h else "h' > 0 not satisfied; classical case"
        out.append(CheckResult.make("mu1_below_tau2", p, res.mu1, res.tau2, 0.0, note))
        if alpha >= -sigma1 * (1 + 1e-12):
            out.append(CheckResult.make("lambda2_ball_nonnegative", p, 0.0, res.value, LAMBDA2_FLOOR))
    for frac in f_alphas_fractions:
        alpha = -frac * sigma1 if frac else 0.0
        g = extend_g(cache.mode1(profile, m, R, alpha), 2 * R)
        grid = np.linspace(g.problem.eps, 2 * R, radial.N_GRID)
        F = f_profile(g, alpha, grid)
        out.append(CheckResult.make("F_decreasing", {**base, "alpha": alpha, "alpha_fraction": float(frac)},
                                    F.max_increment, 0.0, radial.TOL_MONO * F.scale))
    return out


DECREASING_TEST_FUNCTIONS = {
    "exp(-r)": lambda r: np.exp(-np.asarray(r, dtype=float)),
    "1/(1+r^2)": lambda r: 1.0 / (1.0 + np.asarray(r, dtype=float) ** 2),
    "-r^2": lambda r: -np.asarray(r, dtype=float) ** 2,
}


def _chain_level(cache, profile, domain, alpha, level):
    mesh = cache.mesh(domain, level)
    R = cache.matched_radius(domain, profile, level)
    g = cache.mode1(profile, 2, R, alpha)
    r_max = max(float(np.max(np.linalg.norm(mesh.nodes, axis=1))), R) * 1.01
    ext = extend_g(g, r_max)
    g2 = lambda r: ext.g(r) ** 2
    F = lambda r: f_values(ext, alpha, r)
    vals = {
        "g2_omega": integrate_over_domain(mesh, profile, g2),
        "g2_ball": radial_integral(lambda r: float(g2(r)), profile, 2, R),
        "F_omega": integrate_over_domain(mesh, profile, F),
        "F_ball": radial_integral(lambda r: float(F(r)), profile, 2, R),
    }
    for name, fn in DECREASING_TEST_FUNCTIONS.items():
        vals[f"{name}_omega"] = integrate_over_domain(mesh, profile, fn)
        vals[f"{name}_ball"] = radial_integral(lambda r: float(fn(r)), profile, 2, R)
    return R, ext, vals


def check_weinberger_chain(profile: WeightProfile, domain: StarDomain, alpha: float, refinement: int = 3,
                           _cache=None) -> list[CheckResult]:
    """Rearrangement inequalities for g^2 and F, the ball ratio identity, and the trial quotient bound."""
    cache = _cache or _Cache()
    R = cache.matched_radius(domain, profile, refinement)
    sigma1 = cache.steklov(profile, 2, R)
    resolve_alphas(sigma1, [alpha])
    _, _, coarse = _chain_level(cache, profile, domain, alpha, refinement - 1)
    R, ext, fine = _chain_level(cache, profile, domain, alpha, refinement)
    base = {"profile": profile.spec, "domain": domain.spec, "alpha": alpha, "R": R, "refinement": refinement}
    out = []

    def rearr(check_id, small, big, extra=None):
        m_f = fine[big] - fine[small]
        m_c = coarse[big] - coarse[small]
        scale = max(abs(fine[big]), abs(fine[small]), 1e-300)
        tol = max(1e-10 * scale, abs(m_f - m_c))
        p = {**base, **(extra or {})}
        return CheckResult.make(check_id, p, fine[small], fine[big], tol,
                                _flags(m_f, tol, False), margin=m_f)

    out.append(rearr("rearrangement_g2", "g2_ball", "g2_omega"))
    out.append(rearr("rearrangement_F", "F_omega", "F_ball"))
    for name in DECREASING_TEST_FUNCTIONS:
        out.append(rearr("symmetrization_decreasing", f"{name}_omega", f"{name}_ball", {"function": name}))

    lam_ball = cache.mode1(profile, 2, R, alpha).eigenvalue
    ratio = fine["F_ball"] / fine["g2_ball"]
    tol = RATIO_REL * max(abs(lam_ball), 1.0)
    out.append(CheckResult.make("ball_ratio_identity", base, ratio, lam_ball, tol,
                                margin=-abs(ratio - lam_ball)))

    lam_c, lam_f = _fem_pair(cache, domain, profile, refinement,
                             lambda mesh, parts: solve_robin(mesh, profile, alpha, 3, parts).eigenvalues[1])
    quotient = fine["F_omega"] / fine["g2_omega"]
    out.append(CheckResult.make("trial_quotient_bound", base, lam_f, quotient, _band(lam_c, lam_f)))

    grid = np.linspace(ext.grid[0], ext.r_max, radial.N_GRID)
    F = f_profile(ext, alpha, grid)
    out.append(CheckResult.make("F_decreasing", base, F.max_increment, 0.0, radial.TOL_MONO * F.scale))
    gp = ext.g_prime(grid)
    out.append(CheckResult.make("g_nondecreasing", base, 0.0, float(np.min(gp)), 0.0))
    return out


@dataclass
class SuiteConfig:
    profiles: list[str] = field(default_factory=lambda: ["zero", "linear:1", "quadratic:1", "quadlin:0.5,0.5"])
    domains: list[str] = field(default_factory=lambda: [
        "ellipse:1.5,0.8", "rectangle:1.2,0.8", "stadium:0.5,0.7", "perturbed_disk:1,0.15,2"])
    alpha_fractions: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0])
    alphas: list[float] | None = None
    chain_alpha_fractions: list[float] = field(default_factory=lambda: [0.5])
    m_values: list[int] = field(default_factory=lambda: [2, 3])
    R: float = 1.0
    refinement: int = 3
    suites: list[str] = field(default_factory=lambda: ["propositions", "theorem", "corollary", "chain"])
    exploratory: list[str] = field(default_factory=list)
    tol_floor: float = TOL_FLOOR
    band_factor: float = BAND_FACTOR
    name: str = "default"


SUITES = ("propositions", "theorem", "corollary", "chain")


def validate(config: SuiteConfig):
    """Parse every spec string up front; raises ConfigError naming the culprit."""
    errors = []
    profiles, domains, exploratory = [], [], []
    for spec in config.profiles:
        try:
            p = parse_profile(spec)
        except ProfileError as exc:
            errors.append(f"profile {spec!r}: {exc}")
            continue
        if p.exploratory or not p.is_valid():
            errors.append(f"profile {spec!r} violates h' >= 0, h'' >= 0 (list it under exploratory)")
        profiles.append(p)
    for spec in config.exploratory:
        try:
            p = parse_profile(spec)
        except ProfileError as exc:
            errors.append(f"exploratory profile {spec!r}: {exc}")
            continue
        exploratory.append(WeightProfile(p.name, p.h, p.h_prime, p.h_double_prime, p.family_params, True))
    for spec in config.domains:
        try:
            domains.append(parse_domain(spec))
        except ValueError as exc:
            errors.append(f"domain {spec!r}: {exc}")
    fracs = config.alpha_fractions or []
    if config.alphas is None and not fracs:
        errors.append("empty alpha grid")
    for f in fracs:
        if not (math.isfinite(f) and 0.0 <= f <= 1.0):
            errors.append(f"alpha fraction {f} outside [0, 1]")
    for f in config.chain_alpha_fractions:
        if not (math.isfinite(f) and 0.0 <= f <= 1.0):
            errors.append(f"chain alpha fraction {f} outside [0, 1]")
    if config.alphas is not None:
        for a in config.alphas:
            if not (math.isfinite(a) and a <= 0):
                errors.append(f"alpha {a} must be <= 0")
    if config.refinement < 2:
        errors.append("refinement must be >= 2 (the error band uses one coarser level)")
    if not config.R > 0:
        errors.append("R must be positive")
    for m in config.m_values:
        if int(m) != m or m < 2:
            errors.append(f"dimension {m} must be an integer >= 2")
    for s in config.suites:
        if s not in SUITES:
            errors.append(f"unknown suite {s!r}")
    if errors:
        raise ConfigError("; ".join(errors))
    return profiles, domains, exploratory


def run_suite(config: SuiteConfig | None = None, progress=None) -> VerificationReport:
    config = config or SuiteConfig()
    profiles, domains, exploratory = validate(config)
    global TOL_FLOOR, BAND_FACTOR
    saved = TOL_FLOOR, BAND_FACTOR
    TOL_FLOOR, BAND_FACTOR = config.tol_floor, config.band_factor
    try:
        return _run(config, profiles, domains, exploratory, progress)
    finally:
        TOL_FLOOR, BAND_FACTOR = saved


def _run(config, profiles, domains, exploratory, progress):
    report = VerificationReport(
        config.name,
        [p.spec for p in profiles] + [f"{p.spec} (exploratory)" for p in exploratory],
        [d.spec for d in domains],
        list(config.alphas if config.alphas is not None else config.alpha_fractions),
        settings={
            "refinement": config.refinement,
            "rings": rings_for(config.refinement),
            "alpha_grid_kind": "absolute" if config.alphas is not None else "fraction_of_sigma1",
            "ode_rtol": radial.ODE_RTOL,
            "radial_grid": radial.N_GRID,
            "series_start": radial.EPS_FACTOR,
            "tol_floor": config.tol_floor,
            "band_factor": config.band_factor,
            "suites": list(config.suites),
            "m_values": list(config.m_values),
            "R": config.R,
        },
    )
    cache = _Cache()
    say = progress or (lambda msg: None)
    if "propositions" in config.suites:
        for p in profiles:
            for m in config.m_values:
                say(f"propositions {p.spec} m={m}")
                report.add(check_propositions(p, m, config.R, _cache=cache))
    for p in profiles + exploratory:
        for d in domains:
            if "theorem" in config.suites:
                say(f"theorem {p.spec} {d.spec}")
                if config.alphas is not None:
                    report.add(check_theorem_1(p, d, config.alphas, config.refinement, _cache=cache))
                else:
                    report.add(check_theorem_1(p, d, refinement=config.refinement,
                                               alpha_fractions=config.alpha_fractions, _cache=cache))
            if "corollary" in config.suites:
                say(f"corollary {p.spec} {d.spec}")
                report.add(check_corollary(p, d, config.refinement, _cache=cache))
            if "chain" in config.suites and not p.exploratory:
                R = cache.matched_radius(d, p, config.refinement)
                sigma1 = cache.steklov(p, 2, R)
                alphas = config.alphas if config.alphas is not None else \
                    resolve_alphas(sigma1, alpha_fractions=config.chain_alpha_fractions)
                for a in alphas:
                    say(f"chain {p.spec} {d.spec} alpha={a:.6g}")
                    report.add(check_weinberger_chain(p, d, a, config.refinement, _cache=cache))
    return report


def parse_config_text(text: str) -> SuiteConfig:
    """Flat `key = value` lines; lists are whitespace separated; '#' starts a comment."""
    cfg = SuiteConfig()
    list_str = {"profiles", "domains", "suites", "exploratory"}
    list_float = {"alpha_fractions", "alphas", "chain_alpha_fractions"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        items = value.split()
        try:
            if key in list_str:
                setattr(cfg, key, items)
            elif key in list_float:
                setattr(cfg, key, [float(v) for v in items])
            elif key == "m_values":
                setattr(cfg, key, [int(v) for v in items])
            elif key == "refinement":
                cfg.refinement = int(value)
            elif key in ("R", "tol_floor", "band_factor"):
                setattr(cfg, key, float(value))
            elif key == "name":
                cfg.name = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return cfg
