"""Exponent functions of the face-count asymptotics.

All functions accept scalars or numpy arrays for ``nu`` and ``gamma`` and
dispatch on :class:`Family`. At ``gamma = 0`` the internal exponent is
``+inf`` and the net exponent ``-inf``; these act as sentinels so that
maximisations over rectangles that touch ``gamma = 0`` stay well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .duals import Family, solve_external_argmin, solve_s_gamma
from .errors import DomainError
from .specfun import entropy

__all__ = [
    "Family",
    "ExponentPoint",
    "psi_com",
    "psi_int",
    "internal_rate",
    "psi_ext",
    "psi_ext_nu_derivative",
    "psi_ext_second_deriv",
    "psi_face",
    "psi_net",
    "weak_objective",
]

LOG2 = math.log(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ExponentPoint:
    """A point ``(nu, gamma)`` of the admissible rectangle."""

    nu: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise DomainError(f"nu must lie in (0, 1], got {self.nu!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma!r}")


def _key(x: float) -> float:
    # memo key on a 1e-14 grid; nearby scan points share solver work
    return round(float(x), 14)


def _scalar_or_array(fn, *args):
    arrays = [np.asarray(a, dtype=float) for a in args]
    if all(a.ndim == 0 for a in arrays):
        return fn(*(float(a) for a in arrays))
    return np.vectorize(fn, otypes=[float])(*arrays)


def psi_com(family, nu, gamma):
    """Combinatorial exponent ``H(nu) + nu H(gamma)``, plus ``nu log 2`` for the cross-polytope."""
    family = Family.parse(family)
    nu = np.asarray(nu, dtype=float)
    out = entropy(nu) + nu * entropy(gamma)
    if family is Family.CROSS:
        out = out + nu * LOG2
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=65536)
def _internal_rate(gamma: float) -> float:
    if gamma == 0.0:
        return math.inf
    dual = solve_s_gamma(gamma)
    y = dual.y_gamma
    return (1.0 - gamma) * (
        math.log(y / gamma) + _HALF_LOG_2PI + (gamma - 1.0) / (2.0 * gamma) * y * y
    )


def internal_rate(gamma):
    """Internal-angle exponent per unit ``nu``: ``psi_int(1, gamma)``."""

    def one(g):
        if not 0.0 <= g < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {g!r}")
        return _internal_rate(_key(g))

    return _scalar_or_array(one, gamma)


def psi_int(nu, gamma):
    """Internal-angle exponent; identical for both families and linear in ``nu``.

    ``(1-gamma) nu [log(y/gamma) + log(2 pi)/2 + (gamma-1) y^2/(2 gamma)]``
    with ``y`` the dual variable from :func:`duals.solve_s_gamma`.
    """
    return np.asarray(nu, dtype=float) * internal_rate(gamma) if np.ndim(nu) or np.ndim(gamma) \
        else float(nu) * internal_rate(gamma)


def _log_cdf(family: Family, t: float) -> float:
    if family is Family.SIMPLEX:
        return float(special.log_ndtr(_SQRT2 * t))
    if t <= 0.0:
        return -math.inf
    return math.log(special.erf(t)) if t < 0.5 else math.log1p(-special.erfc(t))


@lru_cache(maxsize=262144)
def _psi_ext(family: Family, nu: float) -> float:
    if nu >= 1.0:
        return 0.0
    t = solve_external_argmin(family, nu).argmin
    if t == 0.0:
        return 0.0 if family is Family.CROSS else (1.0 - nu) * LOG2
    return nu * t * t - (1.0 - nu) * _log_cdf(family, t)


def psi_ext(family, nu):
    """External-angle exponent ``min_t [nu t^2 - (1-nu) log CDF(t)]`` (non-negative)."""
    family = Family.parse(family)

    def one(v):
        if not 0.0 < v <= 1.0:
            raise DomainError(f"nu must lie in (0, 1], got {v!r}")
        return _psi_ext(family, _key(v))

    return _scalar_or_array(one, nu)


def psi_ext_nu_derivative(family, nu):
    """``d psi_ext / d nu = t^2 + log CDF(t)`` at the minimiser (envelope theorem)."""
    family = Family.parse(family)

    def one(v):
        t = solve_external_argmin(family, _key(v)).argmin
        return t * t + _log_cdf(family, t)

    return _scalar_or_array(one, nu)


def psi_ext_second_deriv(family, nu):
    """Curvature of the external objective at its minimiser ``t``.

    Equal to ``2 nu + 4 nu t^2/(1 - nu)`` for both families, since the
    log-density of either distribution has second derivative ``-2``.
    """
    family = Family.parse(family)

    def one(v):
        if not 0.0 < v < 1.0:
            raise DomainError(f"nu must lie in (0, 1), got {v!r}")
        t = solve_external_argmin(family, _key(v)).argmin
        return 2.0 * v + 4.0 * v * t * t / (1.0 - v)

    return _scalar_or_array(one, nu)


def psi_face(family, nu, gamma):
    """Face-count exponent ``H(nu gamma)``, plus ``nu gamma log 2`` for the cross-polytope."""
    family = Family.parse(family)
    prod = np.asarray(nu, dtype=float) * np.asarray(gamma, dtype=float)
    out = entropy(prod)
    if family is Family.CROSS:
        out = out + prod * LOG2
    return float(out) if np.ndim(out) == 0 else out


def psi_net(family, nu, gamma):
    """``psi_com - psi_int - psi_ext``; ``-inf`` where ``gamma = 0``."""
    family = Family.parse(family)
    com = psi_com(family, nu, gamma)
    with np.errstate(invalid="ignore"):
        out = com - psi_int(nu, gamma) - psi_ext(family, nu)
    return out


def weak_objective(family, nu, gamma):
    """``psi_net - psi_face``, the exponent governing the typical face."""
    return psi_net(family, nu, gamma) - psi_face(family, nu, gamma)
