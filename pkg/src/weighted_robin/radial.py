"""Radial eigenproblems on origin-centred balls.

Robin eigenfunctions on B(R) separate as w(r) T(theta).  Only the angular
modes 0 (radial functions) and 1 (w(r) x_i / r) matter for the second Robin
eigenvalue, so every routine here works with

    w'' + ((m-1)/r + h'(r)) w' + (lam - mode (m-1)/r^2) w = 0,
    w'(R) + alpha w(R) = 0,

with w'(0) = 0 for mode 0 and w(0) = 0 for mode 1.  Eigenvalues are located
by shooting from a series start near the origin, counting interior zeros to
pin the index, then polishing with a bracketed root find on the Robin
residual.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from .weights import WeightProfile, radial_integral

EPS_FACTOR = 1e-6
N_GRID = 1024
ODE_RTOL = 1e-11
TOL_BC = 1e-7
TOL_ODE = 1e-5
TOL_MONO = 1e-8
MAX_BRACKET_ITER = 200


class ConvergenceError(RuntimeError):
    """Eigenvalue search or ODE integration failed."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class RadialProblem:
    profile: WeightProfile
    m: int
    R: float
    alpha: float
    angular_mode: int = 1

    def __post_init__(self):
        if self.angular_mode not in (0, 1):
            raise ValueError(f"angular_mode must be 0 or 1, got {self.angular_mode}")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")

    @property
    def eps(self) -> float:
        return EPS_FACTOR * self.R


@dataclass(frozen=True)
class RadialSolution:
    """Sampled eigenfunction.  Samples beyond problem.R (after extend_g) follow
    g(R) exp(-alpha (r - R))."""

    eigenvalue: float
    grid: np.ndarray = field(repr=False)
    g_values: np.ndarray = field(repr=False)
    g_prime_values: np.ndarray = field(repr=False)
    problem: RadialProblem
    normalization: str = "g'(0)=1"

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    def _spline(self):
        core = self.grid <= self.problem.R * (1 + 1e-14)
        return CubicHermiteSpline(self.grid[core], self.g_values[core], self.g_prime_values[core])

    def g(self, r):
        return self._evaluate(r)[0]

    def g_prime(self, r):
        return self._evaluate(r)[1]

    def _evaluate(self, r):
        r = np.asarray(r, dtype=float)
        R, alpha = self.problem.R, self.problem.alpha
        spline = self._spline()
        inside = np.clip(r, self.grid[0], R)
        g = spline(inside)
        gp = spline.derivative()(inside)
        # below the series start point: w ~ w(eps) behaviour continued linearly
        low = r < self.grid[0]
        if np.any(low):
            g = np.where(low, self.g_values[0] + self.g_prime_values[0] * (r - self.grid[0]), g)
            gp = np.where(low, self.g_prime_values[0], gp)
        out = r > R
        if np.any(out):
            gR = float(spline(R))
            ext = gR * np.exp(-alpha * (r - R))
            g = np.where(out, ext, g)
            gp = np.where(out, -alpha * ext, gp)
        return g, gp


@dataclass(frozen=True)
class FSamples:
    grid: np.ndarray = field(repr=False)
    F_values: np.ndarray = field(repr=False)
    alpha: float
    problem: RadialProblem

    @property
    def max_increment(self) -> float:
        return float(max(np.max(np.diff(self.F_values), initial=0.0), 0.0))

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.F_values)))


def _rhs(problem: RadialProblem, lam: float):
    m, mode = problem.m, problem.angular_mode
    hp = problem.profile.h_prime
    pot = mode * (m - 1)

    def f(r, y):
        w, dw = y
        return [dw, -((m - 1) / r + float(hp(r))) * dw - (lam - pot / (r * r)) * w]

    return f


def _initial_data(problem: RadialProblem, lam: float):
    eps, m = problem.eps, problem.m
    if problem.angular_mode == 0:
        return [1.0 - lam * eps**2 / (2 * m), -lam * eps / m]
    h1 = float(problem.profile.h_prime(0.0))
    a = -h1 / (m + 1)
    return [eps + a * eps**2, 1.0 + 2 * a * eps]


def _integrate(problem: RadialProblem, lam: float, t_eval=None):
    sol = integrate.solve_ivp(
        _rhs(problem, lam),
        (problem.eps, problem.R),
        _initial_data(problem, lam),
        method="DOP853",
        rtol=ODE_RTOL,
        atol=1e-14,
        t_eval=t_eval,
    )
    if sol.status != 0:
        raise ConvergenceError(f"radial ODE integration failed at lam={lam}: {sol.message}")
    return sol


class _Shot(NamedTuple):
    w: float
    dw: float
    zeros: int
    below: int  # number of eigenvalues strictly below lam


def _shoot(problem: RadialProblem, lam: float) -> _Shot:
    sol = _integrate(problem, lam)
    w = sol.y[0]
    s = np.sign(w)
    s = s[s != 0]
    zeros = int(np.count_nonzero(s[1:] != s[:-1]))
    wR, dwR = float(w[-1]), float(sol.y[1][-1])
    res = dwR + problem.alpha * wR
    below = zeros + (1 if res * wR < 0 else 0)
    return _Shot(wR, dwR, zeros, below)


def _robin_residual(problem: RadialProblem, lam: float) -> float:
    sol = _integrate(problem, lam)
    return float(sol.y[1][-1] + problem.alpha * sol.y[0][-1])


def _locate(problem: RadialProblem, k: int, lo, hi, shots: dict) -> float:
    """k-th eigenvalue (1-based) given below(lo) <= k-1 < k <= below(hi)."""

    def shot(lam):
        if lam not in shots:
            shots[lam] = _shoot(problem, lam)
        return shots[lam]

    for _ in range(MAX_BRACKET_ITER):
        slo, shi = shot(lo), shot(hi)
        if slo.below == k - 1 and shi.below == k and slo.zeros == shi.zeros:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            raise ConvergenceError(f"bracket for eigenvalue {k} collapsed", (lo, hi))
        if shot(mid).below >= k:
            hi = mid
        else:
            lo = mid
    else:
        raise ConvergenceError(f"no clean bracket for eigenvalue {k}", (lo, hi))
    try:
        return optimize.brentq(
            lambda lam: _robin_residual(problem, lam), lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200
        )
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"root polish failed for eigenvalue {k}: {exc}", (lo, hi)) from exc


def _sample(problem: RadialProblem, lam: float, n_grid: int) -> RadialSolution:
    grid = np.linspace(problem.eps, problem.R, n_grid)
    sol = _integrate(problem, lam, t_eval=grid)
    g, gp = sol.y[0].copy(), sol.y[1].copy()
    # g > 0 near the origin for both modes (g(0)=1 or g'(0)=1).
    norm = "g(0)=1" if problem.angular_mode == 0 else "g'(0)=1"
    return RadialSolution(float(lam), grid, g, gp, problem, norm)


def solve_radial(problem: RadialProblem, count: int = 1, n_grid: int = N_GRID) -> list[RadialSolution]:
    """The `count` smallest eigenvalues of the radial problem, ascending."""
    if count < 1:
        raise ValueError("count must be >= 1")
    shots: dict[float, _Shot] = {}

    def below(lam):
        if lam not in shots:
            shots[lam] = _shoot(problem, lam)
        return shots[lam].below

    lo = -1.0
    for _ in range(MAX_BRACKET_ITER):
        if below(lo) == 0:
            break
        lo *= 2.0
    else:
        raise ConvergenceError("no lower eigenvalue bound found", (lo, None))
    hi = 10.0 / problem.R**2
    for _ in range(MAX_BRACKET_ITER):
        if below(hi) >= count:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("no upper eigenvalue bound found", (lo, hi))

    out = []
    left = lo
    for k in range(1, count + 1):
        # tightest known brackets from the cached shots
        lo_k = max([lam for lam, s in shots.items() if s.below <= k - 1] + [left])
        hi_k = min(lam for lam, s in shots.items() if s.below >= k)
        lam_k = _locate(problem, k, lo_k, hi_k, shots)
        out.append(_sample(problem, lam_k, n_grid))
        left = lam_k
    return out


class Lambda2Ball(NamedTuple):
    value: float
    solution: RadialSolution
    mu1: float
    tau2: float


def lambda2_ball(profile: WeightProfile, m: int, R: float, alpha: float, n_grid: int = N_GRID) -> Lambda2Ball:
    """Second Robin eigenvalue of B(R): min of the first mode-1 and second mode-0 eigenvalues."""
    if alpha > 0:
        raise ValueError("lambda2_ball needs alpha <= 0")
    mode1 = solve_radial(RadialProblem(profile, m, R, alpha, 1), 1, n_grid)[0]
    mode0 = solve_radial(RadialProblem(profile, m, R, alpha, 0), 2, n_grid)[1]
    best = mode1 if mode1.eigenvalue <= mode0.eigenvalue else mode0
    return Lambda2Ball(best.eigenvalue, best, mode1.eigenvalue, mode0.eigenvalue)


def lambda1_ball(profile: WeightProfile, m: int, R: float, alpha: float) -> float:
    return solve_radial(RadialProblem(profile, m, R, alpha, 0), 1)[0].eigenvalue


def steklov_ball(profile: WeightProfile, m: int, R: float) -> float:
    """First nonzero Steklov eigenvalue of B(R) from the lam = 0 mode-1 solution."""
    problem = RadialProblem(profile, m, R, 0.0, 1)
    sol = _integrate(problem, 0.0)
    wR, dwR = sol.y[0][-1], sol.y[1][-1]
    if not (wR > 0 and math.isfinite(dwR)):
        raise ConvergenceError(f"Steklov shooting produced w(R)={wR}")
    return float(dwR / wR)


def extend_g(solution: RadialSolution, r_max: float) -> RadialSolution:
    """Continue g past R by g(R) exp(-alpha (r - R)); g and g' stay continuous at R."""
    R, alpha = solution.problem.R, solution.problem.alpha
    if r_max < R:
        raise ValueError(f"r_max={r_max} below R={R}")
    core = solution.grid <= R * (1 + 1e-14)
    grid, g, gp = solution.grid[core], solution.g_values[core], solution.g_prime_values[core]
    if r_max > R:
        step = (grid[-1] - grid[0]) / max(len(grid) - 1, 1)
        n_out = max(int(math.ceil((r_max - R) / step)), 1)
        outer = np.linspace(R, r_max, n_out + 1)[1:]
        gR = g[-1]
        ext = gR * np.exp(-alpha * (outer - R))
        grid = np.concatenate([grid, outer])
        g = np.concatenate([g, ext])
        gp = np.concatenate([gp, -alpha * ext])
    return replace(solution, grid=grid, g_values=g, g_prime_values=gp)


def f_profile(solution: RadialSolution, alpha: float, grid=None) -> FSamples:
    """Samples of F = g'^2 + (m-1) g^2/r^2 + 2 alpha g g' + alpha ((m-1)/r + h') g^2."""
    r = solution.grid if grid is None else np.asarray(grid, dtype=float)
    if np.any(r <= 0):
        raise DomainError("F is undefined at r = 0")
    return FSamples(r, f_values(solution, alpha, r), float(alpha), solution.problem)


def f_values(solution: RadialSolution, alpha: float, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    m = solution.problem.m
    hp = solution.problem.profile.h_prime(r)
    g, gp = solution._evaluate(r)
    return gp**2 + (m - 1) * g**2 / r**2 + 2 * alpha * g * gp + alpha * ((m - 1) / r + hp) * g**2


def ball_integral(solution: RadialSolution, f) -> float:
    """int_B f(r) dgamma_h over B(R) for a radial f."""
    p = solution.problem
    return radial_integral(f, p.profile, p.m, p.R)


def solve_radial_fd_oracle(problem: RadialProblem, n_points: int, count: int | None = None) -> list[float]:
    """Eigenvalues of a three-point discretisation on a uniform grid.

    Independent of the shooting path: linear elements for
    -(p w')' + q w = lam s w with p = s = r^{m-1} e^h and, for mode 1,
    q = (m-1) r^{m-3} e^h.  The mass matrix averages the consistent and the
    lumped mass, which cancels the leading lam^2 h^2 dispersion term.  The
    Robin condition enters the last diagonal entry as alpha p(R).
    """
    if n_points < 50:
        raise ValueError("n_points must be >= 50")
    m, R, mode = problem.m, problem.R, problem.angular_mode
    prof = problem.profile
    n = n_points
    r = np.linspace(0.0, R, n + 1)
    dr = R / n
    xg, wg = np.polynomial.legendre.leggauss(4)
    t = 0.5 * (xg + 1.0)
    wq = 0.5 * wg * dr
    rq = r[:-1, None] + dr * t[None, :]  # (n, 4)
    ew = np.exp(prof.h(rq)) * rq ** (m - 1)
    phi_l, phi_r = 1.0 - t, t
    diag = np.zeros(n + 1)
    off = np.zeros(n)
    mdiag = np.zeros(n + 1)
    moff = np.zeros(n)
    lump = np.zeros(n + 1)

    pint = (ew * wq).sum(axis=1) / dr**2
    diag[:-1] += pint
    diag[1:] += pint
    off -= pint
    if mode == 1:
        q = (m - 1) * ew / rq**2
        diag[:-1] += (q * phi_l**2 * wq).sum(axis=1)
        diag[1:] += (q * phi_r**2 * wq).sum(axis=1)
        off += (q * phi_l * phi_r * wq).sum(axis=1)
    mdiag[:-1] += (ew * phi_l**2 * wq).sum(axis=1)
    mdiag[1:] += (ew * phi_r**2 * wq).sum(axis=1)
    moff += (ew * phi_l * phi_r * wq).sum(axis=1)
    lump[:-1] += (ew * phi_l * wq).sum(axis=1)
    lump[1:] += (ew * phi_r * wq).sum(axis=1)
    diag[-1] += problem.alpha * math.exp(float(prof.h(R))) * R ** (m - 1)

    mdiag = 0.5 * (mdiag + lump)
    moff = 0.5 * moff
    start = 1 if mode == 1 else 0
    K = np.diag(diag[start:]) + np.diag(off[start:], 1) + np.diag(off[start:], -1)
    M = np.diag(mdiag[start:]) + np.diag(moff[start:], 1) + np.diag(moff[start:], -1)
    size = K.shape[0]
    subset = None if count is None else [0, min(count, size) - 1]
    vals = la.eigh(K, M, eigvals_only=True, subset_by_index=subset)
    return sorted(float(v) for v in vals)


def write_radial_csv(path, solution: RadialSolution, alpha: float | None = None) -> None:
    """CSV with columns r, g, g_prime, F (17 significant digits)."""
    a = solution.problem.alpha if alpha is None else alpha
    F = f_values(solution, a, solution.grid)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "g", "g_prime", "F"])
        for row in zip(solution.grid, solution.g_values, solution.g_prime_values, F):
            w.writerow([f"{v:.17g}" for v in row])
