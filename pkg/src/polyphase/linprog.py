"""Dense two-phase revised simplex for standard-form linear programs, with the
l1-minimisation reformulations used to test face survival."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "LPStatus",
    "Uniqueness",
    "LPInstance",
    "LPSolution",
    "lp_solve",
    "solve_P1",
    "solve_LP_nonneg",
]

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
UNIQ_TOL = 1e-8
PIVOT_TOL = 1e-11
BLAND_AFTER = 500
REFACTOR_EVERY = 64


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class Uniqueness(enum.Enum):
    CERTIFIED_UNIQUE = "certified_unique"
    POSSIBLY_NON_UNIQUE = "possibly_non_unique"


@dataclass(frozen=True)
class LPInstance:
    """``min c.x`` subject to ``A x = b``, ``x >= 0``."""

    costs: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        b = np.asarray(self.rhs, dtype=float).ravel()
        if A.shape != (b.size, c.size):
            raise DomainError(f"shape mismatch: A {A.shape}, b {b.size}, c {c.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise DomainError("LP data must be finite")
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray
    objective: float
    basis: tuple
    unique: Uniqueness
    duals: np.ndarray = field(default=None, repr=False)
    reduced_costs: np.ndarray = field(default=None, repr=False)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


class _Simplex:
    """Revised simplex on ``[A | I] (x; a) = b`` with an explicit basis inverse."""

    def __init__(self, A: np.ndarray, b: np.ndarray, max_iter: int):
        self.R, self.M = A.shape
        self.A = np.hstack([A, np.eye(self.R)])
        self.b = b
        self.basis = list(range(self.M, self.M + self.R))
        self.Binv = np.eye(self.R)
        self.xB = b.copy()
        self.active = np.ones(self.M + self.R, dtype=bool)  # columns allowed to enter
        self.max_iter = max_iter
        self.iterations = 0

    def refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xB = self.Binv @ self.b

    def run(self, c: np.ndarray) -> LPStatus:
        stalled = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return LPStatus.ITERATION_LIMIT
            cB = c[self.basis]
            y = cB @ self.Binv
            r = c - y @ self.A
            r[self.basis] = 0.0
            r[~self.active] = 0.0
            bland = stalled >= BLAND_AFTER
            if bland:
                cand = np.flatnonzero(r < -OPT_TOL)
                if cand.size == 0:
                    return LPStatus.OPTIMAL
                q = int(cand[0])
            else:
                q = int(np.argmin(r))
                if r[q] >= -OPT_TOL:
                    return LPStatus.OPTIMAL
            d = self.Binv @ self.A[:, q]
            rows = np.flatnonzero(d > PIVOT_TOL)
            if rows.size == 0:
                return LPStatus.UNBOUNDED
            ratios = np.maximum(self.xB[rows], 0.0) / d[rows]
            tmin = ratios.min()
            ties = rows[ratios <= tmin + 1e-12 * max(1.0, tmin)]
            if bland:
                p = int(min(ties, key=lambda i: self.basis[i]))
            else:
                p = int(ties[np.argmax(d[ties])])
            step = max(self.xB[p], 0.0) / d[p]
            stalled = stalled + 1 if step <= 1e-14 else 0
            self._pivot(p, q, d, step)
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0

    def _pivot(self, p: int, q: int, d: np.ndarray, step: float):
        self.xB -= step * d
        self.xB[p] = step
        piv = d[p]
        row = self.Binv[p] / piv
        self.Binv -= np.outer(d, row)
        self.Binv[p] = row
        self.basis[p] = q

    def drive_out_artificials(self) -> list[int]:
        """Pivot zero-level artificials out; return rows found to be redundant."""
        redundant = []
        for p in range(self.R):
            if self.basis[p] < self.M:
                continue
            row = self.Binv[p] @ self.A[:, : self.M]
            row[[j for j in self.basis if j < self.M]] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-9:
                d = self.Binv @ self.A[:, j]
                self._pivot(p, j, d, self.xB[p] / d[p])
            else:
                redundant.append(p)
        return redundant


def lp_solve(
    inst: LPInstance,
    *,
    feas_tol: float = FEAS_TOL,
    uniq_tol: float = UNIQ_TOL,
    max_iter: int | None = None,
) -> LPSolution:
    """Solve a standard-form LP by the two-phase revised simplex method.

    Rows are scaled to unit infinity norm and sign-flipped so that the
    right-hand side is non-negative. Dantzig pricing is used until 500
    consecutive degenerate pivots, after which Bland's rule takes over.
    The solution is flagged ``CERTIFIED_UNIQUE`` when every nonbasic reduced
    cost exceeds ``uniq_tol``.
    """
    A0, b0, c = inst.constraint_matrix, inst.rhs, inst.costs
    R, M = A0.shape
    scale = np.abs(A0).max(axis=1) if M else np.ones(R)
    zero_rows = scale == 0.0
    if np.any(zero_rows & (np.abs(b0) > feas_tol)):
        return _failed(LPStatus.INFEASIBLE, M)
    scale[zero_rows] = 1.0
    sign = np.where(b0 < 0.0, -1.0, 1.0)
    D = sign / scale
    A = A0 * D[:, None]
    b = b0 * D
    keep = ~zero_rows
    A, b, D = A[keep], b[keep], D[keep]
    rows = np.flatnonzero(keep)
    if max_iter is None:
        max_iter = 50 * (A.shape[0] + M) + 1000

    sx = _Simplex(A, b, max_iter)
    phase1_cost = np.concatenate([np.zeros(M), np.ones(A.shape[0])])
    status = sx.run(phase1_cost)
    if status is LPStatus.ITERATION_LIMIT:
        return _failed(status, M, sx.iterations)
    sx.refactor()
    if sx.xB[[i for i, j in enumerate(sx.basis) if j >= M]].sum() > feas_tol * max(1.0, np.abs(b).sum()):
        return _failed(LPStatus.INFEASIBLE, M, sx.iterations)

    redundant = sx.drive_out_artificials()
    if redundant:
        keep_rows = [i for i in range(sx.R) if i not in redundant]
        # the artificial left in a redundant row stays basic at zero; dropping the
        # row and that column leaves an equivalent, full-rank problem
        basis = [sx.basis[i] for i in keep_rows]
        A, b, D = A[keep_rows], b[keep_rows], D[keep_rows]
        rows = rows[keep_rows]
        iters = sx.iterations
        sx = _Simplex(A, b, max_iter)
        sx.iterations = iters
        sx.basis = basis
        # artificial column indices shift with the removed rows; none remain basic
        sx.refactor()
    sx.active[M:] = False
    phase2_cost = np.concatenate([c, np.zeros(sx.R)])
    status = sx.run(phase2_cost)
    sx.refactor()
    if status is not LPStatus.OPTIMAL:
        return _failed(status, M, sx.iterations)

    x = np.zeros(M)
    for i, j in enumerate(sx.basis):
        if j < M:
            x[j] = sx.xB[i]
    x[np.abs(x) < 1e-15] = 0.0
    y_scaled = phase2_cost[sx.basis] @ sx.Binv
    duals = np.zeros(R)
    duals[rows] = y_scaled * D
    reduced = c - A0.T @ duals
    nonbasic = np.ones(M, dtype=bool)
    nonbasic[[j for j in sx.basis if j < M]] = False
    unique = (
        Uniqueness.CERTIFIED_UNIQUE
        if np.all(reduced[nonbasic] > uniq_tol)
        else Uniqueness.POSSIBLY_NON_UNIQUE
    )
    return LPSolution(
        LPStatus.OPTIMAL, x, float(c @ x), tuple(sorted(j for j in sx.basis if j < M)),
        unique, duals, reduced, sx.iterations,
    )


def _failed(status: LPStatus, M: int, iterations: int = 0) -> LPSolution:
    return LPSolution(status, np.full(M, np.nan), float("nan"), (),
                      Uniqueness.POSSIBLY_NON_UNIQUE, None, None, iterations)


def _check_system(A, y):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if A.shape[0] != y.size:
        raise DomainError(f"A has {A.shape[0]} rows but y has {y.size} entries")
    if A.shape[0] > A.shape[1]:
        raise DomainError("need n <= N")
    return A, y


def solve_P1(A, y, **kwargs) -> LPSolution:
    """``min ||x||_1`` subject to ``A x = y`` via the split ``x = u - v``, ``u, v >= 0``.

    The returned solution lives in ``x``-space; ``basis`` indexes the split
    variables (``j < N`` for ``u_j``, ``j >= N`` for ``v_(j-N)``). Since the
    columns of ``u_j`` and ``v_j`` are negatives of each other, at most one of
    them is basic, and the split problem's reduced-cost certificate carries
    over to ``x``.
    """
    A, y = _check_system(A, y)
    N = A.shape[1]
    sol = lp_solve(LPInstance(np.ones(2 * N), np.hstack([A, -A]), y), **kwargs)
    if not sol.optimal:
        return LPSolution(sol.status, np.full(N, np.nan), sol.objective, (), sol.unique,
                          None, None, sol.iterations)
    x = sol.x[:N] - sol.x[N:]
    return LPSolution(sol.status, x, float(np.abs(x).sum()), sol.basis, sol.unique,
                      sol.duals, sol.reduced_costs, sol.iterations)


def solve_LP_nonneg(A, y, **kwargs) -> LPSolution:
    """``min 1.x`` subject to ``A x = y``, ``x >= 0``."""
    A, y = _check_system(A, y)
    return lp_solve(LPInstance(np.ones(A.shape[1]), A, y), **kwargs)
