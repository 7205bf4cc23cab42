"""Dense two-phase revised simplex for small linear programs.

Problems have the shape ``min c^T x  s.t.  A x (<=, >=, =) b,  x >= 0``.

Dual values follow the sensitivity convention ``y_i = d(objective)/d(b_i)``,
which makes strong duality read ``c^T x* = b^T y*`` with

* ``y_i <= 0`` on ``<=`` rows,
* ``y_i >= 0`` on ``>=`` rows,
* ``y_i`` free on equality rows.

Reduced costs ``c - A^T y`` are the duals of the implied ``x >= 0`` bounds and
are nonnegative at an optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

LE = "le"
GE = "ge"
EQ = "eq"
ROW_KINDS = (LE, GE, EQ)

TOL_FEAS = 1e-9
TOL_ACTIVE = 1e-7
TOL_DUALITY = 1e-8

_TOL_PIVOT = 1e-9
_TOL_REDUCED = 1e-10


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class CyclingError(RuntimeError):
    """Raised when the simplex exceeds its iteration guard."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LpStandardForm:
    """A min-cost LP instance.

    ``row_kind`` tags each row ``"le"``, ``"ge"`` or ``"eq"``; all variables are
    implicitly bounded below by zero.
    """

    cost: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    row_kind: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()
    col_names: tuple[str, ...] = ()

    def __post_init__(self):
        cost = _frozen(self.cost).reshape(-1)
        matrix = _frozen(self.matrix)
        rhs = _frozen(self.rhs).reshape(-1)
        if matrix.ndim != 2:
            matrix = _frozen(matrix.reshape(len(rhs), len(cost)))
        m, n = matrix.shape
        if cost.shape != (n,):
            raise ValueError(f"cost must have length {n}, got {cost.shape[0]}")
        if rhs.shape != (m,):
            raise ValueError(f"rhs must have length {m}, got {rhs.shape[0]}")
        kinds = tuple(self.row_kind) if self.row_kind else (LE,) * m
        if len(kinds) != m:
            raise ValueError(f"row_kind must have length {m}")
        bad = sorted(set(kinds) - set(ROW_KINDS))
        if bad:
            raise ValueError(f"unknown row kinds {bad}")
        for name, arr in (("cost", cost), ("matrix", matrix), ("rhs", rhs)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if self.row_names and len(self.row_names) != m:
            raise ValueError("row_names length mismatch")
        if self.col_names and len(self.col_names) != n:
            raise ValueError("col_names length mismatch")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "row_kind", kinds)
        object.__setattr__(self, "row_names", tuple(self.row_names))
        object.__setattr__(self, "col_names", tuple(self.col_names))

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def with_rhs(self, rhs) -> "LpStandardForm":
        """Same ``A``, ``c`` and row kinds with a new right-hand side."""
        return LpStandardForm(self.cost, self.matrix, rhs, self.row_kind,
                              self.row_names, self.col_names)


@dataclass(frozen=True)
class LpSolution:
    status: Status
    problem: LpStandardForm
    primal: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    objective: float = float("nan")
    iterations: int = 0
    degenerate: bool = False
    # infeasible: Farkas vector y with b^T y > 0 and A^T y <= 0 (same sign map)
    farkas: Optional[np.ndarray] = None
    farkas_row: Optional[int] = None
    # unbounded: feasible direction with negative cost
    ray: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def reduced_costs(self) -> np.ndarray:
        p = self.problem
        return p.cost - p.matrix.T @ self.dual

    @property
    def slack(self) -> np.ndarray:
        """``b - A x*`` row-wise."""
        p = self.problem
        return p.rhs - p.matrix @ self.primal

    @property
    def dual_objective(self) -> float:
        return float(self.problem.rhs @ self.dual)


@dataclass(frozen=True, order=True)
class ActiveSet:
    """Sorted indices of tight rows.

    Indices ``0..M-1`` refer to constraint rows; ``M + j`` marks ``x_j = 0``.
    """

    indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("ActiveSet indices must be strictly increasing")
        if idx and idx[0] < 0:
            raise ValueError("ActiveSet indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices

    def symmetric_difference(self, other: "ActiveSet") -> set[int]:
        return set(self.indices) ^ set(other.indices)


def _revised_simplex(A, b, c, basis, enterable, max_iter, degenerate_switch,
                     pin_artificials=False):
    """Iterate from a primal feasible basis.

    Returns ``(status, basis, iterations, entering, column)``; the last two are
    only set for an unbounded exit. ``basis`` is modified in place. With
    ``pin_artificials`` the zero-level artificials still basic may leave but
    never move off zero.
    """
    m = A.shape[0]
    enter_idx = np.flatnonzero(enterable)
    is_artificial = ~enterable if pin_artificials else np.zeros_like(enterable)
    scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    tol_d = _TOL_REDUCED * scale
    iters = 0
    degenerate_run = 0
    bland = False
    while True:
        B = A[:, basis]
        Binv = np.linalg.inv(B)
        x_b = Binv @ b
        y = c[basis] @ Binv
        d = c[enter_idx] - y @ A[:, enter_idx]
        in_basis = np.zeros(A.shape[1], dtype=bool)
        in_basis[basis] = True
        mask = (d < -tol_d) & ~in_basis[enter_idx]
        cand = enter_idx[mask]
        if cand.size == 0:
            return Status.OPTIMAL, basis, iters, None, None
        if bland:
            j = int(cand[0])
        else:
            dc = d[mask]
            alpha = Binv @ A[:, cand]
            score = dc * dc / (1.0 + np.einsum("ij,ij->j", alpha, alpha))
            j = int(cand[int(np.argmax(score))])
        col = Binv @ A[:, j]
        basis_arr = np.asarray(basis)
        art_rows = is_artificial[basis_arr] & (np.abs(col) > _TOL_PIVOT)
        pos = (col > _TOL_PIVOT) | art_rows
        if not pos.any():
            return Status.UNBOUNDED, basis, iters, j, col
        rows = np.flatnonzero(pos)
        ratios = np.zeros(rows.size)
        regular = ~art_rows[rows]
        ratios[regular] = np.maximum(x_b[rows[regular]], 0.0) / col[rows[regular]]
        theta = float(ratios.min())
        ties = rows[ratios <= theta + 1e-12 * (1.0 + abs(theta))]
        if bland:
            r = int(ties[np.argmin(basis_arr[ties])])
        else:
            r = int(ties[np.argmax(np.abs(col[ties]))])
        if theta <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= degenerate_switch:
                bland = True
        else:
            degenerate_run = 0
        basis[r] = j
        iters += 1
        if iters > max_iter:
            raise CyclingError(f"simplex exceeded {max_iter} iterations (m={m})")


def solve_lp(lp: LpStandardForm, *, max_iter: Optional[int] = None,
             degenerate_switch: int = 50) -> LpSolution:
    """Solve ``lp`` with a two-phase dense revised simplex.

    Pricing uses exact steepest-edge scores; after ``degenerate_switch``
    consecutive degenerate pivots it falls back to Bland's rule for the rest of
    the phase. Exceeding ``max_iter`` pivots raises :class:`CyclingError`.
    """
    m, n = lp.matrix.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 500
    kinds = lp.row_kind
    ineq = [i for i, k in enumerate(kinds) if k != EQ]
    slack = np.zeros((m, len(ineq)))
    for col, i in enumerate(ineq):
        slack[i, col] = 1.0 if kinds[i] == LE else -1.0
    sign = np.where(lp.rhs < 0, -1.0, 1.0)
    a_std = np.hstack([lp.matrix, slack]) * sign[:, None]
    b_std = lp.rhs * sign
    n_std = a_std.shape[1]

    basis: list[Optional[int]] = [None] * m
    for col, i in enumerate(ineq):
        if a_std[i, n + col] > 0:
            basis[i] = n + col
    art_rows = [i for i in range(m) if basis[i] is None]
    art = np.zeros((m, len(art_rows)))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
        basis[i] = n_std + k
    a_full = np.hstack([a_std, art])
    n_full = a_full.shape[1]
    enterable = np.ones(n_full, dtype=bool)
    enterable[n_std:] = False
    c_full = np.concatenate([lp.cost, np.zeros(n_full - n)])

    iterations = 0
    if art_rows:
        c1 = np.zeros(n_full)
        c1[n_std:] = 1.0
        status, basis, it, _, _ = _revised_simplex(
            a_full, b_std, c1, basis, enterable, max_iter, degenerate_switch)
        iterations += it
        B = a_full[:, basis]
        x_b = np.linalg.solve(B, b_std)
        infeas = float(c1[basis] @ x_b)
        if infeas > TOL_FEAS * max(1.0, float(np.max(np.abs(b_std)))):
            y1 = np.linalg.solve(B.T, c1[basis])
            farkas = y1 * sign
            return LpSolution(Status.INFEASIBLE, lp, iterations=iterations,
                              farkas=farkas,
                              farkas_row=int(np.argmax(np.abs(farkas))))
        _drive_out_artificials(a_full, basis, n_std)

    status, basis, it, j, col = _revised_simplex(
        a_full, b_std, c_full, basis, enterable, max_iter, degenerate_switch,
        pin_artificials=True)
    iterations += it
    if status is Status.UNBOUNDED:
        direction = np.zeros(n_full)
        direction[j] = 1.0
        direction[np.asarray(basis)] = -col
        return LpSolution(Status.UNBOUNDED, lp, iterations=iterations,
                          ray=direction[:n])

    B = a_full[:, basis]
    x_b = np.linalg.solve(B, b_std)
    x = np.zeros(n_full)
    x[np.asarray(basis)] = x_b
    y_std = np.linalg.solve(B.T, c_full[basis])
    primal = x[:n]
    dual = y_std * sign
    real = np.asarray(basis) < n_std
    degenerate = bool(np.any(np.abs(x_b[real]) <= TOL_FEAS * max(1.0, float(np.max(np.abs(b_std), initial=0.0)))))
    return LpSolution(Status.OPTIMAL, lp, primal=_frozen(primal), dual=_frozen(dual),
                      objective=float(lp.cost @ primal), iterations=iterations,
                      degenerate=degenerate)


def _drive_out_artificials(a_full, basis, n_std):
    """Pivot zero-level artificials out of the basis where a real column allows.

    Artificials left behind sit on linearly dependent rows; they keep value
    zero because no real column has weight on their row.
    """
    for r, var in enumerate(basis):
        if var < n_std:
            continue
        Binv = np.linalg.inv(a_full[:, basis])
        row = Binv[r] @ a_full[:, :n_std]
        row[_basis_mask(basis, n_std)] = 0.0
        k = int(np.argmax(np.abs(row)))
        if abs(row[k]) > 1e-7:
            basis[r] = k


def _basis_mask(basis, n):
    mask = np.zeros(n, dtype=bool)
    for v in basis:
        if v < n:
            mask[v] = True
    return mask


def extract_active_set(lp: LpStandardForm, sol: LpSolution,
                       tol_active: float = TOL_ACTIVE) -> ActiveSet:
    """Rows satisfied with equality at ``sol``, plus ``M + j`` for each ``x_j = 0``.

    Equality rows are always included; degenerate ties are kept.
    """
    if not sol.optimal:
        raise ValueError(f"active set needs an optimal solution, got {sol.status.value}")
    resid = np.abs(lp.matrix @ sol.primal - lp.rhs)
    tight = resid <= tol_active * np.maximum(1.0, np.abs(lp.rhs))
    tight |= np.array([k == EQ for k in lp.row_kind], dtype=bool)
    rows = np.flatnonzero(tight)
    bounds = np.flatnonzero(np.abs(sol.primal) <= tol_active) + lp.n_rows
    return ActiveSet(tuple(int(i) for i in np.concatenate([rows, bounds])))


def verify_strong_duality(sol: LpSolution, tol: float = TOL_DUALITY) -> bool:
    """Zero duality gap and complementary slackness, both recomputed from scratch."""
    if not sol.optimal:
        return False
    p = sol.problem
    primal_obj = float(p.cost @ sol.primal)
    scale = tol * max(1.0, abs(primal_obj))
    if abs(primal_obj - float(p.rhs @ sol.dual)) > scale:
        return False
    slack = p.rhs - p.matrix @ sol.primal
    if np.any(np.abs(sol.dual * slack) > scale):
        return False
    reduced = p.cost - p.matrix.T @ sol.dual
    return not np.any(np.abs(reduced * sol.primal) > scale)


def solve_equality_system(lp: LpStandardForm, active: ActiveSet, rhs: Sequence[float]) -> np.ndarray:
    """Primal point obtained by holding every row of ``active`` tight at ``rhs``.

    Overdetermined (degenerate) systems are solved in the least-squares sense.
    """
    m, n = lp.matrix.shape
    rhs = np.asarray(rhs, dtype=float)
    rows, targets = [], []
    for i in active:
        if i < m:
            rows.append(lp.matrix[i])
            targets.append(rhs[i])
        else:
            e = np.zeros(n)
            e[i - m] = 1.0
            rows.append(e)
            targets.append(0.0)
    if not rows:
        return np.zeros(n)
    x, *_ = np.linalg.lstsq(np.array(rows), np.array(targets), rcond=None)
    return x
