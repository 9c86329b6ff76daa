"""Solvers for the implicit dual variables.

Every defining equation here is monotone in its unknown, so each solve runs a
Newton iteration that is kept inside a sign-change bracket and falls back to
bisection whenever a Newton step would leave it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError
from .specfun import SQRT_PI, Approximant, approximant, mills_R, mills_R_prime

__all__ = [
    "Family",
    "GammaDual",
    "NuDual",
    "SaddlePoint",
    "safeguarded_newton",
    "solve_s_gamma",
    "solve_external_argmin",
    "solve_saddlepoint_z",
    "external_objective",
]

MAX_ITER = 200
RESIDUAL_TOL = 1e-12
_SQRT2 = math.sqrt(2.0)


class Family(enum.Enum):
    """Polytope family: the simplex or the cross-polytope."""

    SIMPLEX = "simplex"
    CROSS = "cross"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "simplex": cls.SIMPLEX, "+": cls.SIMPLEX, "plus": cls.SIMPLEX,
            "cross": cls.CROSS, "crosspolytope": cls.CROSS, "cross-polytope": cls.CROSS,
            "pm": cls.CROSS, "±": cls.CROSS, "+-": cls.CROSS,
        }
        if key not in aliases:
            raise DomainError(f"unknown polytope family {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class GammaDual:
    gamma: float
    s_gamma: float
    y_gamma: float
    residual: float


@dataclass(frozen=True)
class NuDual:
    family: Family
    nu: float
    argmin: float
    residual: float


@dataclass(frozen=True)
class SaddlePoint:
    gamma: float
    z_gamma: float
    residual: float


def safeguarded_newton(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float | None = None,
    *,
    ftol: float = RESIDUAL_TOL,
    xtol: float = 4e-16,
    maxiter: int = MAX_ITER,
) -> tuple[float, float]:
    """Root of an increasing ``f`` on ``[lo, hi]`` with ``f(lo) < 0 < f(hi)``.

    Returns ``(root, residual)``. Newton steps are accepted only when they stay
    strictly inside the current bracket; otherwise the midpoint is used.
    """
    flo, fhi = f(lo), f(hi)
    if not (flo <= 0.0 <= fhi):
        raise ConvergenceError(f"no sign change on [{lo:g}, {hi:g}]: f={flo:g}, {fhi:g}")
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    best = (math.inf, x)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) < best[0]:
            best = (abs(fx), x)
        if abs(fx) <= ftol:
            return x, abs(fx)
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return best[1], best[0]
        d = fprime(x)
        step_ok = False
        if d > 0.0 and math.isfinite(d):
            xn = x - fx / d
            step_ok = lo < xn < hi
            if step_ok and abs(xn - x) <= xtol * max(1.0, abs(x)):
                fn = f(xn)
                return (xn, abs(fn)) if abs(fn) <= best[0] else (best[1], best[0])
        x = xn if step_ok else 0.5 * (lo + hi)
    if best[0] <= 10.0 * ftol:
        return best[1], best[0]
    raise ConvergenceError("iteration cap reached", best[0])


def _check_open_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    return value


@lru_cache(maxsize=65536)
def _s_gamma_cached(gamma: float) -> GammaDual:
    target = 1.0 - gamma
    if target >= 1.0:
        raise DomainError(f"gamma={gamma!r} too small to resolve in double precision")
    hi = max(2.0, 2.0 * approximant(Approximant.S_TILDE, gamma) + 2.0)
    while mills_R(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("could not bracket s_gamma")
    guess = approximant(Approximant.S_TILDE, gamma)
    # iterate to machine precision: R is nearly flat for small gamma, so a small
    # residual alone does not pin s down
    s, res = safeguarded_newton(
        lambda s: mills_R(s) - target, mills_R_prime, 0.0, hi, guess, ftol=0.0, xtol=1e-15
    )
    return GammaDual(gamma, s, gamma * s / (1.0 - gamma), res)


def solve_s_gamma(gamma: float) -> GammaDual:
    """Solve ``R(s) = 1 - gamma`` for the dual variable ``s``.

    The companion ``y = gamma*s/(1-gamma)`` is returned alongside.
    """
    return _s_gamma_cached(_check_open_unit("gamma", gamma))


def _log_cdf(family: Family, t: float) -> float:
    if family is Family.SIMPLEX:
        return float(special.log_ndtr(_SQRT2 * t))
    return math.log(special.erf(t)) if t < 0.5 else math.log1p(-special.erfc(t))


def _hazard(family: Family, t: float) -> float:
    """density / CDF for the family's distribution."""
    if family is Family.SIMPLEX:
        # q/Q with q = exp(-t^2)/sqrt(pi): Q = erfc(-t)/2 = erfcx(-t) e^{-t^2}/2
        return 2.0 / (SQRT_PI * special.erfcx(-t))
    return 2.0 * math.exp(-t * t) / (SQRT_PI * special.erf(t))


def _log_ratio_eq(family: Family, nu: float):
    # log(2 t CDF(t)/density(t)) - log(1/nu - 1), increasing in t
    rhs = math.log1p(-nu) - math.log(nu)

    def f(t: float) -> float:
        return math.log(2.0 * t) - math.log(_hazard(family, t)) - rhs

    def fp(t: float) -> float:
        return 1.0 / t + _hazard(family, t) + 2.0 * t

    return f, fp


def external_objective(family, nu: float, t):
    """``nu t^2 - (1-nu) log CDF(t)``, the function whose minimum is the external exponent."""
    family = Family.parse(family)
    t = np.asarray(t, dtype=float)
    if family is Family.SIMPLEX:
        logc = special.log_ndtr(_SQRT2 * t)
    else:
        logc = np.log(special.erf(t))
    out = nu * t * t - (1.0 - nu) * logc
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=262144)
def _external_cached(family: Family, nu: float) -> NuDual:
    f, fp = _log_ratio_eq(family, nu)
    lo = 1e-300
    guess = None
    try:
        which = Approximant.X_TILDE_PLUS if family is Family.SIMPLEX else Approximant.Y_TILDE_PM
        guess = approximant(which, nu)
    except DomainError:
        pass
    hi = 2.0 + (guess or 0.0)
    while f(hi) < 0.0:
        hi *= 2.0
    if f(lo) > 0.0:
        # nu so close to 1 that the root underflows
        return NuDual(family, nu, 0.0, 0.0)
    t, _ = safeguarded_newton(f, fp, lo, hi, guess, ftol=1e-14)
    # residual of 2 t CDF/density + 1 - 1/nu, relative to 1/nu
    ratio = 2.0 * t / _hazard(family, t)
    residual = abs(ratio + 1.0 - 1.0 / nu) * nu
    return NuDual(family, nu, t, residual)


def solve_external_argmin(family, nu: float) -> NuDual:
    """Minimiser of ``nu t^2 - (1-nu) log CDF(t)`` over ``t > 0``.

    For the simplex the CDF is the centred Gaussian ``Q``; for the
    cross-polytope it is ``erf``. The stationarity condition
    ``2 t CDF(t)/density(t) = 1/nu - 1`` is solved in logarithmic form. The
    reported residual is measured relative to ``1/nu``.
    """
    return _external_cached(Family.parse(family), _check_open_unit("nu", nu))


@lru_cache(maxsize=65536)
def _saddle_cached(gamma: float) -> SaddlePoint:
    log_c = math.log1p(-gamma)
    half_log = 0.5 * math.log(math.pi / 2.0)

    # with u = -z > 0 the condition reads log u + log(Phi(-u)/phi(u)) = log(1-gamma);
    # Phi(-u)/phi(u) = sqrt(pi/2) erfcx(u/sqrt 2) avoids the huge cancelling logs
    def f(u: float) -> float:
        return math.log(u) + half_log + math.log(special.erfcx(u / _SQRT2)) - log_c

    def fp(u: float) -> float:
        inv_mills = math.sqrt(2.0 / math.pi) / special.erfcx(u / _SQRT2)  # phi(u)/Phi(-u)
        return 1.0 / u + u - inv_mills

    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
    u, res = safeguarded_newton(f, fp, 1e-300, hi, None, ftol=0.0, xtol=1e-15)
    return SaddlePoint(gamma, -u, res)


def solve_saddlepoint_z(gamma: float) -> SaddlePoint:
    """Real negative saddlepoint of ``z^2/2 + (1-gamma) log(2 Phi(z))``.

    Solves ``-z/(1-gamma) = phi(z)/Phi(z)`` directly in the ``z`` variable and
    cross-checks the result against ``-solve_s_gamma(gamma).s_gamma``.
    """
    gamma = _check_open_unit("gamma", gamma)
    sp = _saddle_cached(gamma)
    s = solve_s_gamma(gamma).s_gamma
    # both equations lose about eps*s^3 to rounding of 1-gamma when gamma is tiny
    if abs(sp.z_gamma + s) > 1e-9 * max(1.0, s) + 1e-15 * s ** 3:
        raise ConvergenceError(
            f"saddlepoint {sp.z_gamma!r} disagrees with dual variable {-s!r}",
            abs(sp.z_gamma + s),
        )
    return sp
