"""Seeded Monte Carlo experiments: random ensembles, l1 recovery trials,
success grids, neighborliness certification, error-correction round trips and
small-scale face counting."""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .angles import face_count
from .duals import Family
from .errors import DomainError
from .linprog import LPInstance, Uniqueness, lp_solve, solve_LP_nonneg, solve_P1
from .thresholds import TransitionKind, rho_threshold

__all__ = [
    "ErrorModel",
    "TrialOutcome",
    "ExperimentConfig",
    "Cell",
    "GridResult",
    "EccConfig",
    "EccTrial",
    "Certified",
    "FailedAtFace",
    "SampledPass",
    "trial_rng",
    "gaussian_matrix",
    "haar_orthogonal",
    "sparse_vector",
    "recovery_outcome",
    "face_survival_trial",
    "face_is_preserved",
    "eleven_around_threshold",
    "success_grid",
    "neighborliness_check",
    "ecc_roundtrip",
    "mc_face_count",
]

SUCCESS_TOL = 1e-6
NEIGHBORLY_BUDGET = 100_000
ELEVEN = "eleven-around-threshold"


def trial_rng(*keys) -> np.random.Generator:
    """Generator seeded from an entropy tuple such as ``(master_seed, n, k, trial)``.

    Streams depend only on the keys, never on scheduling order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return trial_rng(*seed)
    return np.random.default_rng(seed)


def gaussian_matrix(n: int, N: int, seed) -> np.ndarray:
    """``n x N`` matrix with iid ``N(0, 1/n)`` entries."""
    if n < 1 or N < 1:
        raise DomainError("matrix dimensions must be positive")
    return _rng(seed).standard_normal((n, N)) / math.sqrt(n)


def haar_orthogonal(N: int, seed) -> np.ndarray:
    """Uniformly distributed ``N x N`` orthogonal matrix (QR with sign fix)."""
    if N < 1:
        raise DomainError("N must be positive")
    Z = _rng(seed).standard_normal((N, N))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def sparse_vector(N: int, k: int, signed: bool, seed) -> np.ndarray:
    """Vector with ``k`` unit-magnitude nonzeros on a uniformly random support."""
    if not 0 <= k <= N:
        raise DomainError(f"need 0 <= k <= N, got k={k}, N={N}")
    rng = _rng(seed)
    x = np.zeros(N)
    support = rng.choice(N, size=k, replace=False)
    x[support] = rng.choice([-1.0, 1.0], size=k) if signed else 1.0
    return x


class TrialOutcome(enum.Enum):
    SUCCESS = "success"
    AMBIGUOUS = "ambiguous"  # equals x0 but uniqueness not certified
    FAILURE = "failure"
    ERROR = "error"


def recovery_outcome(family, A: np.ndarray, x0: np.ndarray, success_tol: float = SUCCESS_TOL) -> TrialOutcome:
    """Solve the l1 problem for ``y = A x0`` and classify the result.

    The simplex family solves ``min 1.x, Ax = y, x >= 0``; the cross-polytope
    family solves ``min ||x||_1, Ax = y``.
    """
    family = Family.parse(family)
    y = A @ x0
    sol = solve_LP_nonneg(A, y) if family is Family.SIMPLEX else solve_P1(A, y)
    if not sol.optimal:
        return TrialOutcome.ERROR
    scale = max(1.0, float(np.abs(x0).max(initial=0.0)))
    if np.abs(sol.x - x0).max() > success_tol * scale:
        return TrialOutcome.FAILURE
    if sol.unique is Uniqueness.CERTIFIED_UNIQUE:
        return TrialOutcome.SUCCESS
    return TrialOutcome.AMBIGUOUS


def face_survival_trial(family, A: np.ndarray, k: int, seed, success_tol: float = SUCCESS_TOL) -> bool:
    """Draw a ``k``-sparse ``x0`` (nonnegative for the simplex, signed for the
    cross-polytope) and report whether it is the certified unique l1 solution."""
    family = Family.parse(family)
    n, N = A.shape
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    x0 = sparse_vector(N, k, family is Family.CROSS, seed)
    return recovery_outcome(family, A, x0, success_tol) is TrialOutcome.SUCCESS


def face_is_preserved(family, A: np.ndarray, support, signs=None, tol: float = 1e-9) -> bool:
    """Whether the projected face with the given vertex set is a face of ``AQ``.

    Simplex: the barycenter ``y`` of the face must admit no convex
    combination of the columns that puts weight outside the face, checked by
    maximising that weight. Cross-polytope: the signed barycenter must be the
    certified unique minimum-l1 preimage of ``y``.
    """
    family = Family.parse(family)
    n, N = A.shape
    support = np.asarray(support, dtype=int)
    x = np.zeros(N)
    if family is Family.SIMPLEX:
        x[support] = 1.0 / support.size
        lifted = np.vstack([A, np.ones((1, N))])
        if np.linalg.matrix_rank(lifted[:, support]) < support.size:
            return False  # collapsed vertices
        cost = np.ones(N)
        cost[support] = 0.0
        sol = lp_solve(LPInstance(-cost, lifted, lifted @ x))
        return sol.optimal and sol.objective >= -tol
    sg = np.ones(support.size) if signs is None else np.asarray(signs, dtype=float)
    x[support] = sg / support.size
    if np.linalg.matrix_rank(A[:, support]) < support.size:
        return False
    if n >= N:
        return np.linalg.matrix_rank(A) == N
    sol = solve_P1(A, A @ x)
    return (sol.optimal and np.abs(sol.x - x).max() <= 1e-7
            and sol.unique is Uniqueness.CERTIFIED_UNIQUE)


# --- success grids -------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    family: Family
    N: int
    n_list: tuple
    k_rule: object  # tuple of ints, or "eleven-around-threshold"
    trials_per_cell: int
    master_seed: int
    success_tol: float = SUCCESS_TOL

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if isinstance(self.k_rule, str):
            if self.k_rule != ELEVEN:
                raise DomainError(f"unknown k rule {self.k_rule!r}")
        else:
            object.__setattr__(self, "k_rule", tuple(int(k) for k in self.k_rule))
        if not self.n_list:
            raise DomainError("n_list is empty")
        if any(not 1 <= n < self.N for n in self.n_list):
            raise DomainError("every n must satisfy 1 <= n < N")
        if self.trials_per_cell < 1:
            raise DomainError("trials_per_cell must be at least 1")
        if not isinstance(self.k_rule, str):
            if any(not 0 <= k < n for n in self.n_list for k in self.k_rule):
                raise DomainError("every k must satisfy 0 <= k < n")
        if not 0 <= self.master_seed < 2 ** 64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")

    def ks_for(self, n: int) -> tuple:
        if isinstance(self.k_rule, str):
            return eleven_around_threshold(self.family, n, self.N)
        return self.k_rule


def eleven_around_threshold(family, n: int, N: int) -> tuple:
    """Eleven sparsities spread over ``[0.5, 1.5]`` times ``n rho_W(n/N)``."""
    center = n * rho_threshold(family, TransitionKind.WEAK, n / N)
    ks = {min(n - 1, max(1, int(round(center * f)))) for f in np.linspace(0.5, 1.5, 11)}
    return tuple(sorted(ks))


@dataclass(frozen=True)
class Cell:
    n: int
    k: int
    trials: int
    successes: int
    ambiguous: int
    errors: int

    @property
    def fraction(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.fraction
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


@dataclass(frozen=True)
class GridResult:
    family: Family
    N: int
    cells: tuple = field(default_factory=tuple)

    def cell(self, n: int, k: int) -> Cell:
        for c in self.cells:
            if c.n == n and c.k == k:
                return c
        raise KeyError((n, k))

    def rows(self) -> list[dict]:
        """Rows for the CSV schema ``family,N,n,k,trials,successes,ambiguous,errors``."""
        return [
            {"family": self.family.value, "N": self.N, "n": c.n, "k": c.k, "trials": c.trials,
             "successes": c.successes, "ambiguous": c.ambiguous, "errors": c.errors}
            for c in self.cells
        ]


def _run_trial(args) -> TrialOutcome:
    family, N, n, k, trial, master, tol = args
    rng = trial_rng(master, n, k, trial)
    A = gaussian_matrix(n, N, rng)
    x0 = sparse_vector(N, k, family is Family.CROSS, rng)
    return recovery_outcome(family, A, x0, tol)


def success_grid(cfg: ExperimentConfig, *, workers: int = 1) -> GridResult:
    """Run ``trials_per_cell`` independent recovery trials for every ``(n, k)`` cell.

    Each trial draws a fresh Gaussian matrix and sparse vector from a stream
    keyed by ``(master_seed, n, k, trial)``, so results do not depend on
    ``workers``.
    """
    jobs = []
    for n in cfg.n_list:
        for k in cfg.ks_for(n):
            for t in range(cfg.trials_per_cell):
                jobs.append((cfg.family, cfg.N, n, k, t, cfg.master_seed, cfg.success_tol))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(_run_trial, jobs, chunksize=16))
    else:
        outcomes = [_run_trial(j) for j in jobs]
    cells = []
    for key, group in itertools.groupby(zip(jobs, outcomes), key=lambda jo: (jo[0][2], jo[0][3])):
        res = [o for _, o in group]
        cells.append(Cell(key[0], key[1], len(res),
                          sum(o is TrialOutcome.SUCCESS for o in res),
                          sum(o is TrialOutcome.AMBIGUOUS for o in res),
                          sum(o is TrialOutcome.ERROR for o in res)))
    return GridResult(cfg.family, cfg.N, tuple(cells))


# --- neighborliness --------------------------------------------------------


@dataclass(frozen=True)
class Certified:
    k: int


@dataclass(frozen=True)
class FailedAtFace:
    dimension: int
    support: tuple
    signs: tuple

    @property
    def desc(self) -> str:
        return f"{self.dimension}-face on vertices {self.support} with signs {self.signs}"


@dataclass(frozen=True)
class SampledPass:
    rate: float
    trials: int


def _faces(family: Family, N: int, j: int):
    for support in itertools.combinations(range(N), j + 1):
        if family is Family.SIMPLEX:
            yield support, (1,) * (j + 1)
        else:
            # a face and its antipode survive together, so fix the first sign
            for rest in itertools.product((1, -1), repeat=j):
                yield support, (1,) + rest


def neighborliness_check(A: np.ndarray, k: int, mode="exhaustive", family=Family.SIMPLEX,
                         *, trials: int = 200, seed=0):
    """Check (central) ``k``-neighborliness of ``A T`` or ``A C``.

    ``mode="exhaustive"`` tests every face of dimension ``k, k-1, ..., 0`` and
    returns :class:`Certified` or the first :class:`FailedAtFace`.
    ``mode="sampled"`` tests ``trials`` random ``k``-faces and returns
    :class:`SampledPass` with the observed survival rate.
    """
    family = Family.parse(family)
    n, N = A.shape
    if not 0 <= k < N:
        raise DomainError(f"need 0 <= k < N, got k={k}")
    if mode == "sampled":
        rng = _rng(seed)
        passed = 0
        for _ in range(trials):
            support = np.sort(rng.choice(N, size=k + 1, replace=False))
            signs = rng.choice([-1, 1], size=k + 1) if family is Family.CROSS else None
            passed += face_is_preserved(family, A, support, signs)
        return SampledPass(passed / trials, trials)
    if mode != "exhaustive":
        raise DomainError(f"unknown mode {mode!r}")
    work = sum(face_count(family, j, N) for j in range(k + 1))
    if work > NEIGHBORLY_BUDGET:
        raise DomainError(f"exhaustive check needs {work} LP solves, budget is {NEIGHBORLY_BUDGET}")
    for j in range(k, -1, -1):
        for support, signs in _faces(family, N, j):
            if not face_is_preserved(family, A, support, signs):
                return FailedAtFace(j, support, signs)
    return Certified(k)


# --- error-correcting codes -----------------------------------------------


class ErrorModel(enum.Enum):
    RANDOM_SIGNED = "random_signed"
    ADVERSARIAL_FIXED_SUPPORT = "adversarial_fixed_support"


@dataclass(frozen=True)
class EccConfig:
    """``n`` checksum rows of an ``N x N`` random orthogonal matrix; the other
    ``N - n`` rows encode messages. ``k`` entries of each codeword are corrupted
    by gross errors of size ``error_scale``."""

    N: int
    n: int
    k: int
    error_model: ErrorModel = ErrorModel.RANDOM_SIGNED
    trials: int = 100
    master_seed: int = 0
    error_scale: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "error_model", ErrorModel(self.error_model))
        if not 1 <= self.n < self.N:
            raise DomainError("need 1 <= n < N")
        if not 0 <= self.k <= self.N:
            raise DomainError("need 0 <= k <= N")
        if self.trials < 1:
            raise DomainError("trials must be positive")


@dataclass(frozen=True)
class EccTrial:
    exact: bool
    error: float
    lp_failed: bool = False


def ecc_roundtrip(cfg: EccConfig) -> list[EccTrial]:
    """Encode, corrupt, and decode by l1 minimisation on the checksum.

    Per trial: ``U`` Haar orthogonal, ``A`` its first ``n`` rows, ``B`` the
    rest; ``w = B^T u + z``; ``x1`` solves ``min ||x||_1, A x = A w``; the
    decoded message is ``B (w - x1)``.
    """
    out = []
    m = cfg.N - cfg.n
    for t in range(cfg.trials):
        rng = trial_rng(cfg.master_seed, cfg.N, cfg.n, cfg.k, t)
        U = haar_orthogonal(cfg.N, rng)
        A, B = U[: cfg.n], U[cfg.n:]
        u = rng.standard_normal(m)
        if cfg.error_model is ErrorModel.RANDOM_SIGNED:
            z = cfg.error_scale * sparse_vector(cfg.N, cfg.k, True, rng)
        else:
            z = np.zeros(cfg.N)
            z[: cfg.k] = cfg.error_scale * rng.choice([-1.0, 1.0], size=cfg.k)
        w = B.T @ u + z
        sol = solve_P1(A, A @ w)
        if not sol.optimal:
            out.append(EccTrial(False, math.inf, True))
            continue
        u1 = B @ (w - sol.x)
        err = float(np.abs(u1 - u).max())
        out.append(EccTrial(err <= 1e-6 * float(np.abs(u).max()), err))
    return out


# --- face counting ---------------------------------------------------------


def mc_face_count(family, k: int, n: int, N: int, trials: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate of ``E f_k(A Q)`` for Gaussian ``A``: ``(mean, stderr)``.

    Every ``k``-face is tested exactly in each trial, so the cost is
    ``trials * f_k(Q)`` small linear programs.
    """
    family = Family.parse(family)
    if N > 12 or math.comb(N, k + 1) > 500:
        raise DomainError("mc_face_count is limited to N <= 12 and C(N, k+1) <= 500")
    if not 0 <= k < N:
        raise DomainError("need 0 <= k < N")
    if n >= N:
        return float(face_count(family, k, N)), 0.0
    counts = np.empty(trials)
    for t in range(trials):
        A = gaussian_matrix(n, N, trial_rng(seed, n, k, t))
        c = 0
        for support, signs in _faces(family, N, k):
            if face_is_preserved(family, A, support, signs):
                # antipodal faces survive together
                c += 1 if family is Family.SIMPLEX else 2
        counts[t] = c
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr
