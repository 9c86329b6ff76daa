"""Explicit finite-N bounds on lost faces, their level curves, and the
Rudelson-Vershynin comparison bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .duals import Family
from .errors import DomainError
from .exponents import internal_rate, psi_com, psi_ext, psi_face
from .thresholds import PhaseCurve, TransitionKind

__all__ = [
    "TripleKNN",
    "PerturbedVars",
    "FiniteBoundResult",
    "perturbed_vars",
    "admissible_ells",
    "ell_exponents",
    "strong_bound",
    "weak_bound",
    "level_curve",
    "rv_bound",
    "log_binomial",
    "log_pair_count",
]

RV_C1 = 6.0 + 4.0 * math.sqrt(2.0)
RV_C3 = math.exp(1.5)
RV_PREFACTOR = 3.5


@dataclass(frozen=True)
class TripleKNN:
    k: int
    n: int
    N: int

    def __post_init__(self):
        if not (1 <= self.k <= self.n <= self.N - 1):
            raise DomainError(f"need 1 <= k <= n <= N-1, got (k, n, N)=({self.k}, {self.n}, {self.N})")


@dataclass(frozen=True)
class PerturbedVars:
    nu_hat: float
    nu_tilde: float
    gamma_tilde: float


@dataclass(frozen=True)
class FiniteBoundResult:
    """A bound together with its logarithm; ``ell`` is the maximising face dimension."""

    family: Family
    kind: TransitionKind
    k: int
    n: int
    N: int
    log_value: float
    ell: int | None

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf


def perturbed_vars(k: int, ell: int, N: int) -> PerturbedVars:
    """``nu_hat = ell/N + 1/(2N)``, ``nu_tilde = (ell+2)/N``, ``gamma_tilde = (k+1)/(ell+2)``."""
    return PerturbedVars(ell / N + 0.5 / N, (ell + 2) / N, (k + 1) / (ell + 2))


def admissible_ells(n: int, N: int) -> np.ndarray:
    """Face dimensions ``n+1, n+3, ...`` below ``N``."""
    return np.arange(n + 1, N, 2)


def ell_exponents(family, kind, k: int, n: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-``ell`` exponents whose maximum enters the finite-N bounds.

    Simplex: ``(psi_com - psi_ext)(nu, gamma) - psi_int(nu_tilde, gamma_tilde)``.
    Cross-polytope: the external term is evaluated at ``nu_hat``. The weak
    kind further subtracts ``psi_face(nu, gamma)``. Here ``nu = ell/N`` and
    ``gamma = k/ell``.
    """
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    t = TripleKNN(k, n, N)
    ells = admissible_ells(t.n, t.N)
    if ells.size == 0:
        return ells, np.empty(0)
    nu = ells / N
    gamma = k / ells
    ext_arg = nu if family is Family.SIMPLEX else nu + 0.5 / N
    nu_t = (ells + 2) / N
    gamma_t = (k + 1) / (ells + 2)
    expo = psi_com(family, nu, gamma) - psi_ext(family, ext_arg) - nu_t * internal_rate(gamma_t)
    if kind is TransitionKind.WEAK:
        expo = expo - psi_face(family, nu, gamma)
    return ells, np.asarray(expo, dtype=float)


def _bound(family, kind, k, n, N, power) -> FiniteBoundResult:
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    ells, expo = ell_exponents(family, kind, k, n, N)
    if ells.size == 0:
        # no admissible ell: the discrepancy is an empty sum
        return FiniteBoundResult(family, kind, k, n, N, -math.inf, None)
    i = int(np.argmax(expo))
    log_value = power * math.log(N + 3) + N * float(expo[i])
    return FiniteBoundResult(family, kind, k, n, N, log_value, int(ells[i]))


def strong_bound(family, k: int, n: int, N: int) -> FiniteBoundResult:
    """Upper bound on ``f_k(Q) - E f_k(AQ)``: ``(N+3)^5 exp(N max_ell exponent)``.

    The value may exceed 1, in which case it is vacuous.
    """
    return _bound(family, TransitionKind.STRONG, k, n, N, 5.0)


def weak_bound(family, k: int, n: int, N: int) -> FiniteBoundResult:
    """``B`` with ``E f_k(AQ)/f_k(Q) >= 1 - B``: ``(N+3)^(11/2) exp(N max_ell exponent)``."""
    return _bound(family, TransitionKind.WEAK, k, n, N, 5.5)


def level_curve(family, kind, N: int, level: float, delta_grid) -> PhaseCurve:
    """For each ``delta``, the largest ``rho = k/n`` whose bound stays ``<= level``.

    Uses ``n = ceil(delta N)`` and ``k`` in ``1..n-1``; the bounds are
    nondecreasing in ``k``, so the search is a bisection. Cells where even
    ``k = 1`` fails report ``rho = 0``.
    """
    family, kind = Family.parse(family), TransitionKind.parse(kind)
    if not level > 0.0:
        raise DomainError("level must be positive")
    log_level = math.log(level) if math.isfinite(level) else math.inf
    fn = strong_bound if kind is TransitionKind.STRONG else weak_bound
    samples = []
    for delta in delta_grid:
        delta = float(delta)
        n = math.ceil(delta * N)
        if not 2 <= n <= N - 1:
            raise DomainError(f"delta={delta!r} gives n={n} outside [2, N-1]")

        def ok(k):
            return fn(family, k, n, N).log_value <= log_level

        if not ok(1):
            samples.append((delta, 0.0))
            continue
        lo, hi = 1, n - 1
        if ok(hi):
            lo = hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
        samples.append((delta, lo / n))
    return PhaseCurve(family, kind, tuple(samples), strict=False)


def rv_bound(k: int, n: int, N: int) -> float:
    """Rudelson-Vershynin failure-probability bound with the ``o(1)`` term set to zero.

    ``3.5 exp(-(sqrt n - sqrt m)^2 / 18)``, ``m = (6 + 4 sqrt 2) k log(e^1.5 N/k)``.
    Dropping the ``o(1)`` term makes this a lower bound on the published
    expression. Returns the vacuous 3.5 when ``sqrt n <= sqrt m``.
    """
    TripleKNN(k, n, N)
    m = RV_C1 * k * math.log(RV_C3 * N / k)
    gap = math.sqrt(n) - math.sqrt(m)
    if gap <= 0.0:
        return RV_PREFACTOR
    return RV_PREFACTOR * math.exp(-gap * gap / 18.0)


def log_binomial(n, k):
    """``log C(n, k)`` through log-gamma; valid far beyond factorial overflow."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    out = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return float(out) if out.ndim == 0 else out


def log_pair_count(k: int, ell: int, N: int, *, via: str = "faces") -> float:
    """Log of the number of (k-face, ell-face) incident pairs of the simplex.

    ``via="faces"`` counts ``C(N, ell+1) C(ell+1, k+1)``; ``via="supersets"``
    counts ``C(N, k+1) C(N-k-1, ell-k)``. The two agree identically.
    """
    if via == "faces":
        return log_binomial(N, ell + 1) + log_binomial(ell + 1, k + 1)
    if via == "supersets":
        return log_binomial(N, k + 1) + log_binomial(N - k - 1, ell - k)
    raise DomainError(f"unknown counting route {via!r}")
