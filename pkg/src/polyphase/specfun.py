"""Scalar special functions: entropy, Gaussian distribution helpers, the
Mills-type ratio and a few closed-form asymptotic approximants."""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "GaussKind",
    "Approximant",
    "entropy",
    "gauss_cdf",
    "gauss_log_cdf",
    "gauss_density",
    "mills_R",
    "mills_R_prime",
    "approximant",
]

SQRT_PI = math.sqrt(math.pi)
_SQRT2 = math.sqrt(2.0)


class GaussKind(enum.Enum):
    """Which Gaussian-type distribution function to evaluate.

    ``Q_CENTERED`` has density ``exp(-x**2)/sqrt(pi)`` (a normal with variance 1/2),
    ``G_HALFNORMAL`` is ``erf`` on ``[0, inf)`` and ``PHI_STANDARD`` is the
    standard normal CDF.
    """

    Q_CENTERED = "Q"
    G_HALFNORMAL = "G"
    PHI_STANDARD = "Phi"


class Approximant(enum.Enum):
    S_TILDE = "s_tilde"
    X_TILDE_PLUS = "x_tilde_plus"
    Y_TILDE_PM = "y_tilde_pm"
    R_STRONG_PLUS = "r_strong_plus"
    R_STRONG_PM = "r_strong_pm"
    R_WEAK = "r_weak"


def _check_probability(p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"entropy argument must lie in [0, 1], got {p!r}")
    return arr


def entropy(p):
    """Shannon entropy in nats of a Bernoulli(p) variable.

    Accepts scalars or arrays. Endpoints follow the ``0 log 0 = 0`` convention.
    """
    arr = _check_probability(p)
    out = special.entr(arr) + special.entr(1.0 - arr)
    return float(out) if out.ndim == 0 else out


def gauss_cdf(kind: GaussKind, x):
    """Distribution function of the given kind, vectorised over ``x``."""
    arr = np.asarray(x, dtype=float)
    if kind is GaussKind.Q_CENTERED:
        out = special.ndtr(_SQRT2 * arr)
    elif kind is GaussKind.PHI_STANDARD:
        out = special.ndtr(arr)
    elif kind is GaussKind.G_HALFNORMAL:
        if np.any(arr < 0.0):
            raise DomainError("half-normal CDF requires x >= 0")
        out = special.erf(arr)
    else:  # pragma: no cover - exhaustive enum
        raise DomainError(f"unknown kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def gauss_log_cdf(kind: GaussKind, x):
    """Logarithm of :func:`gauss_cdf`, accurate deep in the lower tail."""
    arr = np.asarray(x, dtype=float)
    if kind is GaussKind.Q_CENTERED:
        out = special.log_ndtr(_SQRT2 * arr)
    elif kind is GaussKind.PHI_STANDARD:
        out = special.log_ndtr(arr)
    elif kind is GaussKind.G_HALFNORMAL:
        if np.any(arr < 0.0):
            raise DomainError("half-normal CDF requires x >= 0")
        # erf(x) = 1 - erfc(x); log1p keeps precision for large x
        with np.errstate(divide="ignore"):
            out = np.where(arr < 0.5, np.log(special.erf(arr)), np.log1p(-special.erfc(arr)))
    else:  # pragma: no cover
        raise DomainError(f"unknown kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def gauss_density(kind: GaussKind, x):
    arr = np.asarray(x, dtype=float)
    if kind is GaussKind.Q_CENTERED:
        out = np.exp(-arr * arr) / SQRT_PI
    elif kind is GaussKind.PHI_STANDARD:
        out = np.exp(-0.5 * arr * arr) / math.sqrt(2.0 * math.pi)
    elif kind is GaussKind.G_HALFNORMAL:
        if np.any(arr < 0.0):
            raise DomainError("half-normal density requires x >= 0")
        out = 2.0 * np.exp(-arr * arr) / SQRT_PI
    else:  # pragma: no cover
        raise DomainError(f"unknown kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def _mills_ratio(s):
    # e^{s^2/2} * int_s^inf e^{-y^2/2} dy, through the scaled erfc
    return math.sqrt(math.pi / 2.0) * special.erfcx(np.asarray(s, dtype=float) / _SQRT2)


def mills_R(s):
    """``s * exp(s**2/2) * int_s^inf exp(-y**2/2) dy`` for ``s >= 0``.

    Evaluated through ``erfcx`` so that neither overflow nor cancellation occurs;
    the value increases from 0 at ``s = 0`` towards 1.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("mills_R requires s >= 0")
    out = arr * _mills_ratio(arr)
    return float(out) if out.ndim == 0 else out


def mills_R_prime(s):
    """Derivative of :func:`mills_R`: ``m(s)(1 + s^2) - s`` with ``m`` the Mills ratio."""
    arr = np.asarray(s, dtype=float)
    m = _mills_ratio(arr)
    out = m * (1.0 + arr * arr) - arr
    return float(out) if out.ndim == 0 else out


def _loglog_parts(z):
    if not z > math.e:
        raise DomainError(f"approximant needs z > e so that log log z is defined, got z={z!r}")
    lz = math.log(z)
    return lz, math.log(lz)


def _log_rate(delta, scale, tau):
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    if tau is None or not tau > 0.0:
        raise DomainError("tau must be positive")
    value = tau * math.log(delta * scale)
    if value == 0.0:
        raise DomainError("logarithm vanishes; approximant undefined")
    return 1.0 / abs(value)


def approximant(which, arg: float, tau: float | None = None) -> float:
    """Closed-form approximations used for initial guesses and asymptotics.

    Parameters
    ----------
    which : Approximant or str
        ``s_tilde`` takes ``gamma`` in (0, 1) and returns ``gamma**-0.5 - 1.5*gamma**0.5``.
        ``x_tilde_plus`` / ``y_tilde_pm`` take ``nu`` and return
        ``sqrt(log z - 0.5*log log z)`` with ``z = 1/(2 nu sqrt(pi))`` or
        ``z = 1/(nu sqrt(pi))`` respectively.
        ``r_strong_plus``, ``r_strong_pm`` and ``r_weak`` take ``delta`` plus ``tau``
        and return ``1/|tau log(2 sqrt(pi) delta)|``, ``1/|tau log(sqrt(pi) delta)|``
        and ``1/(tau log(1/delta))``.
    arg : float
        ``gamma``, ``nu`` or ``delta`` depending on ``which``.
    tau : float, optional
        Rate constant, required for the ``r_*`` forms.
    """
    which = Approximant(which)
    if which is Approximant.S_TILDE:
        if not 0.0 < arg < 1.0:
            raise DomainError("s_tilde requires gamma in (0, 1)")
        return arg ** -0.5 - 1.5 * arg ** 0.5
    if which in (Approximant.X_TILDE_PLUS, Approximant.Y_TILDE_PM):
        if not 0.0 < arg < 1.0:
            raise DomainError("nu must lie in (0, 1)")
        scale = 2.0 if which is Approximant.X_TILDE_PLUS else 1.0
        lz, llz = _loglog_parts(1.0 / (scale * arg * SQRT_PI))
        return math.sqrt(lz - 0.5 * llz)
    if which is Approximant.R_STRONG_PLUS:
        return _log_rate(arg, 2.0 * SQRT_PI, tau)
    if which is Approximant.R_STRONG_PM:
        return _log_rate(arg, SQRT_PI, tau)
    return _log_rate(arg, 1.0, tau)
