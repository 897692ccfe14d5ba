"""Radial weight profiles h(r), the weighted measure e^{h(|x|)} dx, and matched balls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

TOL_VALID = 1e-12
R_MAX_CAP = 1e6


class ProfileError(ValueError):
    """Malformed profile spec string or parameters."""


class EvaluationError(ArithmeticError):
    """Non-finite weight or integrand."""


class UnboundedSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class WeightProfile:
    name: str
    h: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    h_prime: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    h_double_prime: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    family_params: tuple[float, ...] = ()
    exploratory: bool = False

    def weight(self, r):
        """e^{h(r)}, vectorised."""
        return np.exp(self.h(np.asarray(r, dtype=float)))

    def is_valid(self, r_max: float = 10.0, n: int = 2001, tol: float = TOL_VALID) -> bool:
        """Sampled check of h' >= 0 and h'' >= 0 on [0, r_max]."""
        r = np.linspace(0.0, r_max, n)
        hp = np.broadcast_to(self.h_prime(r), r.shape)
        hpp = np.broadcast_to(self.h_double_prime(r), r.shape)
        return bool(np.all(hp >= -tol) and np.all(hpp >= -tol))

    def strictly_increasing(self, r_max: float = 10.0, n: int = 2001) -> bool:
        """h' > 0 on (0, r_max]."""
        r = np.linspace(0.0, r_max, n)[1:]
        return bool(np.all(np.broadcast_to(self.h_prime(r), r.shape) > 0.0))

    @property
    def spec(self) -> str:
        if not self.family_params:
            return self.name
        return f"{self.name}:" + ",".join(f"{p:g}" for p in self.family_params)


def _const(value: float):
    return lambda r: np.zeros_like(np.asarray(r, dtype=float)) + value


def zero_profile() -> WeightProfile:
    return WeightProfile("zero", _const(0.0), _const(0.0), _const(0.0))


def linear_profile(c: float) -> WeightProfile:
    if c < 0:
        raise ProfileError(f"linear profile needs c >= 0, got {c}")
    return WeightProfile(
        "linear", lambda r: c * np.asarray(r, dtype=float), _const(c), _const(0.0), (c,)
    )


def quadratic_profile(c: float) -> WeightProfile:
    """h = c r^2 / 2; c = 1 gives the weight e^{|x|^2/2}."""
    if c < 0:
        raise ProfileError(f"quadratic profile needs c >= 0, got {c}")
    return WeightProfile(
        "quadratic",
        lambda r: 0.5 * c * np.asarray(r, dtype=float) ** 2,
        lambda r: c * np.asarray(r, dtype=float),
        _const(c),
        (c,),
    )


def quadlin_profile(a: float, b: float) -> WeightProfile:
    if a < 0 or b < 0:
        raise ProfileError(f"quadlin profile needs a, b >= 0, got {a}, {b}")
    return WeightProfile(
        "quadlin",
        lambda r: a * np.asarray(r, dtype=float) ** 2 + b * np.asarray(r, dtype=float),
        lambda r: 2.0 * a * np.asarray(r, dtype=float) + b,
        _const(2.0 * a),
        (a, b),
    )


def gauss_profile(c: float = 1.0) -> WeightProfile:
    """h = -c r^2 / 2. Violates h' >= 0; only usable as an exploratory profile."""
    return WeightProfile(
        "gauss",
        lambda r: -0.5 * c * np.asarray(r, dtype=float) ** 2,
        lambda r: -c * np.asarray(r, dtype=float),
        _const(-c),
        (c,),
        exploratory=True,
    )


def built_in_profiles() -> list[WeightProfile]:
    return [zero_profile(), linear_profile(1.0), quadratic_profile(1.0), quadlin_profile(0.5, 0.5)]


_FAMILIES = {
    "zero": (zero_profile, 0),
    "linear": (linear_profile, 1),
    "quadratic": (quadratic_profile, 1),
    "quadlin": (quadlin_profile, 2),
    "gauss": (gauss_profile, 1),
}


def parse_profile(spec: str) -> WeightProfile:
    """Build a profile from "zero", "linear:c", "quadratic:c", "quadlin:a,b" (or "gauss:c")."""
    name, _, rest = spec.strip().partition(":")
    if name not in _FAMILIES:
        raise ProfileError(f"unknown profile {spec!r}")
    factory, nparams = _FAMILIES[name]
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ProfileError(f"bad parameters in profile {spec!r}") from exc
    if len(params) != nparams:
        raise ProfileError(f"profile {name!r} takes {nparams} parameter(s), got {spec!r}")
    if not all(math.isfinite(p) for p in params):
        raise ProfileError(f"non-finite parameter in profile {spec!r}")
    return factory(*params)


@dataclass(frozen=True)
class BallSpec:
    m: int
    R: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"dimension m must be an integer >= 2, got {self.m}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError(f"radius must be positive, got {self.R}")

    @property
    def sphere_area(self) -> float:
        return unit_sphere_area(self.m)


def unit_sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^{m-1} in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def radial_integral(f, profile: WeightProfile, m: int, R: float) -> float:
    """omega_{m-1} * int_0^R f(r) e^{h(r)} r^{m-1} dr for a radial integrand f."""

    def integrand(r):
        try:
            val = f(r) * math.exp(float(profile.h(r))) * r ** (m - 1)
        except OverflowError as exc:
            raise EvaluationError(f"weight overflows at r={r}") from exc
        if not math.isfinite(val):
            raise EvaluationError(f"non-finite integrand at r={r}")
        return val

    val, _ = integrate.quad(integrand, 0.0, R, epsabs=0.0, epsrel=1e-12, limit=400)
    return unit_sphere_area(m) * val


def ball_gamma_volume(profile: WeightProfile, ball: BallSpec) -> float:
    return radial_integral(lambda r: 1.0, profile, ball.m, ball.R)


def radius_for_volume(profile: WeightProfile, m: int, target_volume: float) -> float:
    """Radius of the origin-centred ball with the given weighted volume."""
    if not target_volume > 0:
        raise ValueError(f"target volume must be positive, got {target_volume}")

    def excess(R):
        try:
            return ball_gamma_volume(profile, BallSpec(m, R)) - target_volume
        except EvaluationError:
            return math.inf

    # Euclidean guess brackets well for mild weights.
    guess = (target_volume * m / unit_sphere_area(m)) ** (1.0 / m)
    lo, hi = guess, guess
    while excess(lo) > 0:
        lo *= 0.5
    while excess(hi) < 0:
        hi *= 2.0
        if hi > R_MAX_CAP:
            raise UnboundedSearchError(f"no radius below {R_MAX_CAP} reaches volume {target_volume}")
    while not math.isfinite(excess(hi)):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)
