"""Maximal operator over the admissible rectangle and the phase-transition
thresholds defined as its first zero."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .duals import Family
from .errors import ConvergenceError, DomainError
from .exponents import (
    LOG2,
    internal_rate,
    psi_ext,
    psi_ext_nu_derivative,
    psi_face,
    psi_net,
)
from .specfun import SQRT_PI, entropy

__all__ = [
    "TransitionKind",
    "PhaseCurve",
    "BracketNotFound",
    "objective",
    "maximal",
    "edge_profile",
    "weak_nu_slope",
    "rho_threshold",
    "asymptotic_rho",
    "phase_curve",
]

ENDPOINT_GUARD = 1e-6
SCAN_STEP = 1.0 / 256.0
BACKOFF_LEVELS = 12  # first scan point 2^-20


class BracketNotFound(ConvergenceError):
    """No sign change of the threshold criterion was found on the scanned range."""


class TransitionKind(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"

    @classmethod
    def parse(cls, value) -> "TransitionKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown transition kind {value!r}") from None


@dataclass(frozen=True)
class PhaseCurve:
    """Sampled ``(delta, rho)`` curve for one family and kind.

    With ``strict`` (the default, used for thresholds) rho must be strictly
    increasing and positive; level curves of finite-N bounds relax both.
    """

    family: Family
    kind: TransitionKind
    samples: tuple
    strict: bool = True

    def __post_init__(self):
        deltas = [d for d, _ in self.samples]
        rhos = [r for _, r in self.samples]
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise DomainError("phase-curve deltas must be strictly increasing")
        if any(not 0.0 < d < 1.0 for d in deltas):
            raise DomainError("phase-curve deltas must lie in (0, 1)")
        if self.strict:
            if any(not 0.0 < r < 1.0 for r in rhos):
                raise DomainError("phase-curve rho values must lie in (0, 1)")
            if any(b <= a for a, b in zip(rhos, rhos[1:])):
                raise DomainError("phase-curve rho must increase strictly with delta")
        elif any(not 0.0 <= r < 1.0 for r in rhos):
            raise DomainError("level-curve rho values must lie in [0, 1)")

    @property
    def deltas(self) -> np.ndarray:
        return np.array([d for d, _ in self.samples])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([r for _, r in self.samples])


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return delta


def objective(family, kind, nu, gamma):
    """The exponent maximised by :func:`maximal` for the given kind."""
    kind = TransitionKind.parse(kind)
    value = psi_net(family, nu, gamma)
    if kind is TransitionKind.WEAK:
        value = value - psi_face(family, nu, gamma)
    return value


def _grid_values(family: Family, kind: TransitionKind, nus: np.ndarray, gammas: np.ndarray):
    nu = nus[:, None]
    g = gammas[None, :]
    rate = internal_rate(gammas)[None, :]
    vals = entropy(nu) + nu * entropy(g) - nu * rate - psi_ext(family, nus)[:, None]
    if family is Family.CROSS:
        vals = vals + nu * LOG2
    if kind is TransitionKind.WEAK:
        vals = vals - psi_face(family, nu, g)
    return np.where(np.isnan(vals), -np.inf, vals)


def maximal(family, kind, delta: float, rho: float, *, grid: int = 64) -> float:
    """Supremum of the kind's exponent over ``nu in [delta, 1)``, ``gamma in [0, rho]``.

    A ``grid x grid`` evaluation locates the best cell, then alternating
    bounded golden-section searches in each coordinate refine it.
    Returns ``-inf`` for ``rho = 0``.
    """
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    delta = _check_delta(delta)
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho!r}")
    if rho == 0.0:
        return -math.inf
    nu_hi = 1.0 - ENDPOINT_GUARD
    if delta >= nu_hi:
        delta = nu_hi
    nus = np.linspace(delta, nu_hi, grid)
    gammas = np.linspace(0.0, rho, grid)
    vals = _grid_values(family, kind, nus, gammas)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best = float(vals[i, j])
    nu_star, g_star = float(nus[i]), float(gammas[j])
    nu_lo, nu_up = float(nus[max(i - 1, 0)]), float(nus[min(i + 1, grid - 1)])
    g_lo, g_up = float(gammas[max(j - 1, 1)]) if j > 1 else gammas[1] * 1e-6, float(gammas[min(j + 1, grid - 1)])

    def f(nu, g):
        return float(objective(family, kind, nu, g))

    for _ in range(3):
        if nu_up > nu_lo:
            r = optimize.minimize_scalar(lambda v: -f(v, g_star), bounds=(nu_lo, nu_up),
                                         method="bounded", options={"xatol": 1e-10})
            if -r.fun > best:
                best, nu_star = -r.fun, float(r.x)
        if g_up > g_lo:
            r = optimize.minimize_scalar(lambda gg: -f(nu_star, gg), bounds=(g_lo, g_up),
                                         method="bounded", options={"xatol": 1e-10})
            if -r.fun > best:
                best, g_star = -r.fun, float(r.x)
    # the bounded search never lands exactly on an endpoint; the corners of the
    # refinement box often carry the supremum
    for v in (nu_lo, nu_up, nu_star):
        for gg in (g_up, g_star):
            if gg > 0.0:
                best = max(best, f(v, gg))
    return best


class _EdgeProfile:
    """``gamma -> max_nu psi_net(nu, gamma)`` over ``nu in [delta, 1)``.

    ``psi_net`` is ``g(nu) + nu a(gamma)`` with ``g = H - psi_ext`` independent
    of ``gamma``, so ``g`` is tabulated once and each profile value is a
    Legendre-type maximisation followed by a local bounded refinement.
    """

    def __init__(self, family: Family, delta: float, resolution: int):
        self.family = family
        self.delta = delta
        self.nus = np.linspace(delta, 1.0 - ENDPOINT_GUARD, resolution)
        self.g = entropy(self.nus) - psi_ext(family, self.nus)

    def slope(self, gamma: float) -> float:
        a = entropy(gamma) - float(internal_rate(gamma))
        if self.family is Family.CROSS:
            a += LOG2
        return a

    def __call__(self, gamma: float) -> float:
        a = self.slope(gamma)
        vals = self.g + self.nus * a
        i = int(np.argmax(vals))
        best = float(vals[i])
        lo, hi = self.nus[max(i - 1, 0)], self.nus[min(i + 1, len(self.nus) - 1)]

        def neg(v):
            return -(entropy(v) - float(psi_ext(self.family, v)) + v * a)

        r = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                                     options={"xatol": 1e-12})
        return max(best, -float(r.fun))


def edge_profile(family, delta: float, gamma: float, *, resolution: int = 512) -> float:
    """``max over nu in [delta, 1)`` of the strong exponent at fixed ``gamma``."""
    return _edge_profile_obj(Family.parse(family), _check_delta(delta), resolution)(gamma)


@lru_cache(maxsize=256)
def _edge_profile_obj(family: Family, delta: float, resolution: int) -> _EdgeProfile:
    return _EdgeProfile(family, delta, resolution)


def weak_nu_slope(family, delta: float, gamma: float) -> float:
    """Partial derivative in ``nu`` of the weak exponent at ``nu = delta``.

    The weak exponent touches zero from below as a function of ``nu``; the
    rectangle maximum first reaches zero exactly when this slope at the left
    edge turns non-negative.
    """
    family = Family.parse(family)
    delta = _check_delta(delta)
    d = (math.log1p(-delta) - math.log(delta) + entropy(gamma) - float(internal_rate(gamma))
         - float(psi_ext_nu_derivative(family, delta)))
    prod = delta * gamma
    d -= gamma * (math.log1p(-prod) - math.log(prod))
    if family is Family.CROSS:
        d += LOG2 - gamma * LOG2
    return d


def _scan_points():
    pts = [SCAN_STEP * 2.0 ** (-j) for j in range(BACKOFF_LEVELS, 0, -1)]
    k = 1
    while k * SCAN_STEP < 1.0 - ENDPOINT_GUARD:
        pts.append(k * SCAN_STEP)
        k += 1
    pts.append(1.0 - ENDPOINT_GUARD)
    return pts


def _first_crossing(fn, tol: float) -> float:
    pts = _scan_points()
    prev = None
    for p in pts:
        v = fn(p)
        if v >= 0.0:
            if prev is None:
                raise BracketNotFound(f"criterion already non-negative at rho={p:g}")
            return optimize.brentq(fn, prev, p, xtol=tol, rtol=4 * np.finfo(float).eps)
        prev = p
    raise BracketNotFound(f"no sign change for rho in [{pts[0]:g}, {pts[-1]:g}]")


def rho_threshold(family, kind, delta: float, *, resolution: int = 512, tol: float = 1e-9) -> float:
    """First ``rho`` at which the maximal function of the kind's exponent reaches zero.

    Strong: the maximal function over ``gamma <= rho`` is the running maximum
    of the edge profile, so its first zero is the first zero of the profile.
    Weak: the supremum over ``nu`` is identically zero along a tangency curve,
    so the first zero is located through :func:`weak_nu_slope`.
    Both scan ``rho`` upward (geometric back-off near 0, then steps of 1/256)
    for a sign change and finish with Brent's method.
    """
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    delta = _check_delta(delta)
    if kind is TransitionKind.STRONG:
        prof = _edge_profile_obj(family, delta, int(resolution))
        return _first_crossing(prof, tol)
    return _first_crossing(lambda g: weak_nu_slope(family, delta, g), tol)


def asymptotic_rho(family, kind, delta: float) -> float:
    """Small-``delta`` approximations of the thresholds.

    Weak: ``1/|2 log delta|``. Strong: ``1/|2e log(2 sqrt(pi) delta)|`` for the
    simplex and ``1/|2e log(sqrt(pi) delta)|`` for the cross-polytope.
    """
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    delta = _check_delta(delta)
    if kind is TransitionKind.WEAK:
        return 1.0 / abs(2.0 * math.log(delta))
    scale = 2.0 * SQRT_PI if family is Family.SIMPLEX else SQRT_PI
    arg = delta * scale
    if arg >= 1.0:
        raise DomainError(f"delta={delta!r} too large for the strong asymptote")
    return 1.0 / abs(2.0 * math.e * math.log(arg))


def phase_curve(family, kind, delta_grid) -> PhaseCurve:
    """Threshold evaluated at each ``delta`` of an increasing grid."""
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    deltas = [float(d) for d in delta_grid]
    if not deltas:
        raise DomainError("delta grid is empty")
    samples = tuple((d, rho_threshold(family, kind, d)) for d in deltas)
    return PhaseCurve(family, kind, samples)
