"""Internal and external angles of the regular simplex and cross-polytope,
exact face counts and the expected number of faces lost under projection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .duals import Family, solve_saddlepoint_z
from .errors import ConvergenceError, DomainError

__all__ = [
    "AngleKind",
    "AngleMethod",
    "AngleRequest",
    "InternalAngleParams",
    "internal_params",
    "external_angle",
    "internal_angle",
    "evaluate",
    "face_count",
    "log_face_count",
    "discrepancy_delta",
    "cross_full_internal_angle",
    "saddle_log_density",
]

_SQRT2 = math.sqrt(2.0)
_LEG_NODES, _LEG_WEIGHTS = np.polynomial.legendre.leggauss(200)
_ORACLE_PANELS = 50  # 200 nodes x 50 panels = 10^4 nodes
_CANCELLATION_LIMIT = 1e8


class AngleKind(enum.Enum):
    EXTERNAL_SIMPLEX = "external_simplex"
    EXTERNAL_CROSS = "external_cross"
    INTERNAL = "internal"


class AngleMethod(enum.Enum):
    QUADRATURE = "quadrature"
    SADDLEPOINT = "saddlepoint"
    ORACLE = "oracle"


@dataclass(frozen=True)
class AngleRequest:
    """``(a, b)`` is ``(ell, N)`` for external angles and ``(k, ell)`` for internal ones."""

    kind: AngleKind
    a: int
    b: int
    method: AngleMethod = AngleMethod.QUADRATURE

    def __post_init__(self):
        if self.kind is AngleKind.INTERNAL:
            if not 0 <= self.a < self.b:
                raise DomainError(f"internal angle needs 0 <= k < ell, got ({self.a}, {self.b})")
        elif not 0 <= self.a < self.b:
            raise DomainError(f"external angle needs 0 <= ell < N, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class InternalAngleParams:
    """Parameters of the internal angle of ``T^k`` inside ``T^ell``.

    ``m = ell - k`` is the number of extra vertices, ``theta = k + 1``,
    ``alpha = 1/(k + 2)`` and ``gamma = (k + 1)/(ell + 1)``.
    """

    m: int
    theta: int
    alpha: float
    gamma: float


def internal_params(k: int, ell: int) -> InternalAngleParams:
    if not 0 <= k < ell:
        raise DomainError(f"need 0 <= k < ell, got ({k}, {ell})")
    return InternalAngleParams(ell - k, k + 1, 1.0 / (k + 2), (k + 1) / (ell + 1))


# --- external angles -------------------------------------------------------


def _external_log_integrand(family: Family, ell: int, N: int):
    power = N - ell - 1
    if family is Family.SIMPLEX:
        def h(x):
            return -(ell + 1) * x * x + power * special.log_ndtr(_SQRT2 * x)
    else:
        def h(x):
            with np.errstate(divide="ignore"):
                return -(ell + 1) * x * x + power * np.log(special.erf(x))
    return h


def _log_integrand_peak(h, lo: float, hi: float) -> float:
    r = optimize.minimize_scalar(lambda x: -h(x), bounds=(lo, hi), method="bounded",
                                 options={"xatol": 1e-12})
    return float(r.x)


def _truncation(h, peak: float, hpeak: float, direction: float, floor: float) -> float:
    # walk away from the peak until the integrand falls below 1e-18 of its maximum
    cutoff = hpeak - 18.0 * math.log(10.0)
    step = 0.25
    x = peak
    while True:
        nxt = x + direction * step
        if direction < 0 and nxt <= floor:
            return floor
        if h(nxt) < cutoff:
            return nxt
        x = nxt
        step *= 1.5


@lru_cache(maxsize=4096)
def _external_quadrature(family: Family, ell: int, N: int) -> float:
    h = _external_log_integrand(family, ell, N)
    floor = -math.inf if family is Family.SIMPLEX else 0.0
    peak = 0.0 if ell == N - 1 and family is Family.SIMPLEX else None
    if peak is None:
        lo = -10.0 if family is Family.SIMPLEX else 1e-12
        peak = _log_integrand_peak(h, lo, 10.0)
    hpeak = float(h(peak)) if peak > 0.0 or family is Family.SIMPLEX else 0.0
    left = _truncation(h, peak, hpeak, -1.0, floor)
    right = _truncation(h, peak, hpeak, +1.0, floor)

    def f(x):
        return math.exp(float(h(x)) - hpeak) if x > 0.0 or family is Family.SIMPLEX else (
            1.0 if N - ell - 1 == 0 else 0.0)

    pts = [peak] if left < peak < right else None
    val, err = integrate.quad(f, left, right, points=pts, epsabs=0.0, epsrel=1e-11, limit=400)
    if not err <= 1e-9 * abs(val):
        raise ConvergenceError("external-angle quadrature did not converge", err / abs(val))
    return math.sqrt((ell + 1) / math.pi) * val * math.exp(hpeak)


def _external_laplace(family: Family, ell: int, N: int) -> float:
    h = _external_log_integrand(family, ell, N)
    lo = -10.0 if family is Family.SIMPLEX else 1e-12
    peak = _log_integrand_peak(h, lo, 10.0)
    eps = 1e-4 * max(1.0, abs(peak))
    curv = -(h(peak + eps) - 2.0 * h(peak) + h(peak - eps)) / eps ** 2
    if family is Family.CROSS and peak <= 10 * eps:
        # maximum at the boundary (facet case): half a Gaussian
        return 0.5
    return math.sqrt((ell + 1) / math.pi) * math.exp(h(peak)) * math.sqrt(2.0 * math.pi / curv)


def external_angle(kind, ell: int, N: int, method=AngleMethod.QUADRATURE) -> float:
    """External angle at an ``ell``-face of ``T^(N-1)`` or ``C^N``.

    Simplex: ``sqrt((ell+1)/pi) * int_R exp(-(ell+1)x^2) Q(x)^(N-ell-1) dx``
    where ``Q`` is the CDF with density ``exp(-x^2)/sqrt(pi)``; the integral
    runs over the whole real line, which makes the angle of the full simplex
    equal to 1. Cross-polytope: the same with ``erf`` in place of ``Q`` and
    integration over ``[0, inf)``.

    ``method`` is ``QUADRATURE`` (adaptive, relative tolerance 1e-10) or
    ``SADDLEPOINT`` (Laplace approximation at the peak of the integrand).
    """
    kind, method = AngleKind(kind), AngleMethod(method)
    AngleRequest(kind, ell, N, method)
    if kind is AngleKind.INTERNAL:
        raise DomainError("use internal_angle for internal angles")
    family = Family.SIMPLEX if kind is AngleKind.EXTERNAL_SIMPLEX else Family.CROSS
    if method is AngleMethod.QUADRATURE:
        return _external_quadrature(family, int(ell), int(N))
    if method is AngleMethod.SADDLEPOINT:
        return _external_laplace(family, int(ell), int(N))
    raise DomainError("no oracle method for external angles; use QUADRATURE")


# --- internal angles -------------------------------------------------------


def saddle_log_density(gamma: float, z: float) -> float:
    """``psi(z) = z^2/2 + (1 - gamma) log(2 Phi(z))`` on the real axis."""
    return 0.5 * z * z + (1.0 - gamma) * (math.log(2.0) + float(special.log_ndtr(z)))


def _internal_saddlepoint(k: int, ell: int) -> float:
    p = internal_params(k, ell)
    z = solve_saddlepoint_z(p.gamma).z_gamma
    curv = 1.0 - z * z * p.gamma / (1.0 - p.gamma)
    log_val = -p.m * math.log(2.0) + (ell + 1) * saddle_log_density(p.gamma, z) - 0.5 * math.log(curv)
    return math.exp(log_val)


@lru_cache(maxsize=4096)
def _internal_contour(k: int, ell: int) -> float:
    # beta = sqrt(ell+1) 2^-m / sqrt(2 pi) * int exp((ell+1) z^2/2) (2 Phi(z))^m dt
    # along z = c + i t, c the real saddlepoint; on this line
    # 2 Phi(z) = exp(-z^2/2) w((t - i c)/sqrt 2) with w the Faddeeva function,
    # evaluated in the upper half-plane where it is well conditioned
    p = internal_params(k, ell)
    c = solve_saddlepoint_z(p.gamma).z_gamma

    def log_f(t):
        z = complex(c, t)
        return (k + 1) * z * z / 2.0 + p.m * np.log(special.wofz(complex(t, -c) / _SQRT2))

    base = log_f(0.0).real

    def re_f(t):
        return math.exp((log_f(t) - base).real) * math.cos((log_f(t) - base).imag)

    # Gaussian envelope exp(-(k+1) t^2/2) bounds the integrand
    T = math.sqrt(2.0 * 46.0 / (k + 1))
    val, err = integrate.quad(re_f, 0.0, T, epsabs=0.0, epsrel=1e-12, limit=400)
    if not err <= 1e-9 * abs(val):
        raise ConvergenceError("internal-angle contour quadrature did not converge", err / abs(val))
    log_const = 0.5 * math.log(ell + 1) - p.m * math.log(2.0) - 0.5 * math.log(2.0 * math.pi)
    return 2.0 * val * math.exp(log_const + base)


@lru_cache(maxsize=4096)
def _internal_oracle(k: int, ell: int) -> float:
    # beta = theta^((m-1)/2) sqrt((m-1) alpha + 1) pi^(-m/2) alpha^(-1/2) J(m, theta),
    # J = pi^-1/2 int exp(-lam^2) [int_0^inf exp(-theta v^2 + 2 i v lam) dv]^m dlam,
    # the inner integral being sqrt(pi/(4 theta)) w(lam/sqrt theta)
    p = internal_params(k, ell)
    theta, m, alpha = p.theta, p.m, p.alpha
    L = math.sqrt(16.0 * math.log(10.0)) + 1.0
    edges = np.linspace(-L, L, _ORACLE_PANELS + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    lam = (mid[:, None] + half[:, None] * _LEG_NODES[None, :]).ravel()
    wts = (half[:, None] * _LEG_WEIGHTS[None, :]).ravel()
    inner = math.sqrt(math.pi / (4.0 * theta)) * special.wofz(lam / math.sqrt(theta))
    vals = np.exp(-lam * lam) * inner ** m / math.sqrt(math.pi)
    total = np.sum(wts * vals)
    if abs(total.imag) > 1e-10:
        raise ConvergenceError("oracle integral has a non-negligible imaginary part", abs(total.imag))
    scale = np.sum(wts * np.abs(vals))
    if scale > _CANCELLATION_LIMIT * abs(total.real) or total.real <= 0.0:
        raise ConvergenceError("oracle integral lost to cancellation; use QUADRATURE",
                               scale / max(abs(total.real), 1e-300))
    pref = theta ** ((m - 1) / 2.0) * math.sqrt((m - 1) * alpha + 1.0) * math.pi ** (-m / 2.0)
    return float(pref / math.sqrt(alpha) * total.real)


def internal_angle(k: int, ell: int, method=AngleMethod.QUADRATURE) -> float:
    """Internal angle ``beta(T^k, T^ell)`` of the regular simplex.

    ``ORACLE`` evaluates the classical real-axis double integral (reliable for
    small ``ell - k``; raises on cancellation). ``QUADRATURE`` integrates the
    same entire function along a vertical line through the real saddlepoint,
    which stays well conditioned for large faces. ``SADDLEPOINT`` returns the
    Laplace approximation
    ``2^-(ell-k) exp((ell+1) psi(z)) / sqrt(psi''(z))`` with
    ``gamma = (k+1)/(ell+1)``.
    """
    method = AngleMethod(method)
    AngleRequest(AngleKind.INTERNAL, k, ell, method)
    k, ell = int(k), int(ell)
    if method is AngleMethod.SADDLEPOINT:
        return _internal_saddlepoint(k, ell)
    if method is AngleMethod.ORACLE:
        return _internal_oracle(k, ell)
    return _internal_contour(k, ell)


@lru_cache(maxsize=4096)
def cross_full_internal_angle(k: int, N: int) -> float:
    """Internal angle of the cross-polytope ``C^N`` at one of its ``k``-faces.

    Modulo the face's own directions the tangent cone is
    ``{(u, w): sqrt(k+1) u + ||w||_1 <= 0}`` in ``R^(1 + m)``, ``m = N-k-1``, so
    the angle is ``P(sqrt(k+1) U + sum |W_i| <= 0)`` for iid standard normals.
    The characteristic function of ``|W|`` is ``w(t/sqrt 2)`` (Faddeeva), and
    Gil-Pelaez inversion gives a one-dimensional integral.
    """
    if not 0 <= k <= N - 1:
        raise DomainError(f"need 0 <= k <= N-1, got k={k}, N={N}")
    m = N - k - 1
    if m == 0:
        return 0.5
    c2 = float(k + 1)

    def f(t):
        return (math.exp(-c2 * t * t / 2.0) * special.wofz(t / _SQRT2) ** m).imag / t

    # envelope exp(-(k+1) t^2/2) < 1e-20 beyond T
    T = math.sqrt(2.0 * 46.0 / c2)
    val, err = integrate.quad(f, 0.0, T, epsabs=1e-15, epsrel=1e-12, limit=400)
    if not err <= 1e-10:
        raise ConvergenceError("cross-polytope internal angle did not converge", err)
    return 0.5 - val / math.pi


def evaluate(request: AngleRequest) -> float:
    if request.kind is AngleKind.INTERNAL:
        return internal_angle(request.a, request.b, request.method)
    return external_angle(request.kind, request.a, request.b, request.method)


# --- face counts -----------------------------------------------------------


def face_count(family, k: int, N: int) -> int:
    """Exact number of ``k``-faces: ``C(N, k+1)``, times ``2^(k+1)`` for the cross-polytope."""
    family = Family.parse(family)
    if not 0 <= k <= N - 1:
        raise DomainError(f"need 0 <= k <= N-1, got k={k}, N={N}")
    count = math.comb(N, k + 1)
    return count << (k + 1) if family is Family.CROSS else count


def log_face_count(family, k: int, N: int) -> float:
    family = Family.parse(family)
    if not 0 <= k <= N - 1:
        raise DomainError(f"need 0 <= k <= N-1, got k={k}, N={N}")
    val = special.gammaln(N + 1) - special.gammaln(k + 2) - special.gammaln(N - k)
    return float(val + ((k + 1) * math.log(2.0) if family is Family.CROSS else 0.0))


def discrepancy_delta(family, k: int, n: int, N: int, *, method=AngleMethod.QUADRATURE) -> float:
    """Expected number of ``k``-faces lost when projecting onto ``n`` dimensions.

    Sums ``2 * (#incident pairs) * beta(F^k, G^ell) * alpha(G^ell, Q)`` over
    faces ``G`` of dimension ``ell = n+1, n+3, ...`` up to ``dim Q``, the
    polytope itself included (its external angle is 1). Proper faces are
    simplices; incident pairs number ``C(N, k+1) C(N-k-1, ell-k)`` for the
    simplex and ``2^(ell+1)`` times that for the cross-polytope. The
    cross-polytope has dimension ``N``, so its own term enters when
    ``N - n - 1`` is even.
    """
    family = Family.parse(family)
    if not 0 <= k < n:
        raise DomainError(f"need 0 <= k < n, got k={k}, n={n}")
    if n >= N:
        return 0.0
    kind = AngleKind.EXTERNAL_SIMPLEX if family is Family.SIMPLEX else AngleKind.EXTERNAL_CROSS
    total = 0.0
    for ell in range(n + 1, N, 2):
        pairs = math.comb(N, k + 1) * math.comb(N - k - 1, ell - k)
        if family is Family.CROSS:
            pairs <<= ell + 1
        beta = internal_angle(k, ell, method)
        alpha = external_angle(kind, ell, N)
        total += 2.0 * pairs * beta * alpha
    if family is Family.CROSS and (N - n - 1) % 2 == 0:
        total += 2.0 * face_count(family, k, N) * cross_full_internal_angle(k, N)
    return total
