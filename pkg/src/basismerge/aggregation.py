"""Grouping timesteps by active constraint set and the aggregated LP."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from .lp import ActiveSet, LpSolution, LpStandardForm, solve_lp

SCHEMA_VERSION = 1


class DegenerateBasisWarning(UserWarning):
    pass


@dataclass
class BasisGroup:
    id: int
    active_set: ActiveSet
    members: np.ndarray
    centroid: np.ndarray
    member_dual: np.ndarray
    member_primal_mean: np.ndarray
    degenerate_members: int = 0
    dual_mismatch: float = 0.0
    primal_rep: Optional[np.ndarray] = None
    descriptor: dict = field(default_factory=dict)

    @property
    def weight(self) -> int:
        return int(self.members.size)

    @property
    def dual_rep(self) -> np.ndarray:
        """Dual of this basis' block in the aggregated LP (weight times timestep dual)."""
        return self.weight * self.member_dual

    @property
    def objective(self) -> float:
        """``OV^i`` read off the dual side."""
        return float(self.centroid @ self.dual_rep)


@dataclass
class BasisSet:
    groups: list[BasisGroup]
    horizon: int
    template: LpStandardForm
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen = np.zeros(self.horizon, dtype=int)
        for g in self.groups:
            seen[g.members] += 1
        if self.groups and not np.all(seen == 1):
            raise ValueError("basis members must partition the horizon")
        if len({g.active_set for g in self.groups}) != len(self.groups):
            raise ValueError("active sets must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def ids(self) -> list[int]:
        return [g.id for g in self.groups]

    def get(self, basis_id: int) -> BasisGroup:
        for g in self.groups:
            if g.id == basis_id:
                return g
        raise KeyError(f"unknown basis id {basis_id}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([g.weight for g in self.groups], dtype=float)

    @property
    def degeneracy_census(self) -> dict[int, int]:
        return {g.id: g.degenerate_members for g in self.groups}

    def lookup(self, active: ActiveSet) -> Optional[int]:
        for g in self.groups:
            if g.active_set == active:
                return g.id
        return None


class BasisGrouper:
    """Streaming reduction of per-timestep results into basis groups.

    Keeps only running sums per distinct active set, so memory is
    ``O(T + |I| * (M + N))``.
    """

    def __init__(self, template: LpStandardForm, dual_tol: float = 1e-7):
        self.template = template
        self.dual_tol = dual_tol
        self._acc: dict[ActiveSet, dict] = {}
        self._count = 0

    def add(self, t: int, rhs, sol: LpSolution, active: ActiveSet) -> None:
        if not sol.optimal:
            raise ValueError(f"timestep {t} is {sol.status.value}, expected optimal")
        acc = self._acc.get(active)
        if acc is None:
            acc = self._acc[active] = {
                "members": [], "rhs": np.zeros(self.template.n_rows),
                "primal": np.zeros(self.template.n_cols), "dual": np.array(sol.dual),
                "degenerate": 0, "mismatch": 0.0,
            }
        acc["members"].append(t)
        acc["rhs"] += rhs
        acc["primal"] += sol.primal
        if len(active) > self.template.n_cols or sol.degenerate:
            acc["degenerate"] += 1
        gap = float(np.max(np.abs(sol.dual - acc["dual"]), initial=0.0))
        acc["mismatch"] = max(acc["mismatch"], gap)
        self._count += 1

    def finish(self) -> BasisSet:
        if self._count == 0:
            raise ValueError("no timesteps to group")
        items = sorted(self._acc.items(), key=lambda kv: min(kv[1]["members"]))
        groups, flags = [], []
        for k, (active, acc) in enumerate(items, start=1):
            members = np.array(sorted(acc["members"]), dtype=int)
            w = members.size
            scale = max(1.0, float(np.max(np.abs(acc["dual"]), initial=0.0)))
            if acc["mismatch"] > self.dual_tol * scale:
                msg = f"basis {k}: member duals differ by up to {acc['mismatch']:.3g}"
                flags.append(msg)
                warnings.warn(msg, DegenerateBasisWarning, stacklevel=2)
            groups.append(BasisGroup(
                id=k, active_set=active, members=members,
                centroid=acc["rhs"] / w, member_dual=acc["dual"],
                member_primal_mean=acc["primal"] / w,
                degenerate_members=acc["degenerate"], dual_mismatch=acc["mismatch"]))
        return BasisSet(groups, self._count, self.template, flags)


def group_bases(per_timestep: Iterable[tuple[np.ndarray, LpSolution, ActiveSet]],
                template: Optional[LpStandardForm] = None) -> BasisSet:
    """One group per distinct active set, numbered by smallest member timestep.

    ``per_timestep`` yields ``(rhs, solution, active_set)`` in timestep order.
    """
    grouper = None
    for t, (rhs, sol, active) in enumerate(per_timestep):
        if grouper is None:
            grouper = BasisGrouper(template if template is not None else sol.problem)
        grouper.add(t, np.asarray(rhs, dtype=float), sol, active)
    if grouper is None:
        raise ValueError("no timesteps to group")
    return grouper.finish()


def build_block_lp(template: LpStandardForm, weights: Sequence[float],
                   rhs_blocks: Sequence[np.ndarray]) -> LpStandardForm:
    """Block-diagonal LP with cost ``w_k c`` and right-hand side ``b_k`` per block."""
    k = len(weights)
    cost = np.concatenate([w * template.cost for w in weights])
    matrix = block_diag(*([template.matrix] * k))
    rhs = np.concatenate([np.asarray(b, dtype=float) for b in rhs_blocks])
    kinds = template.row_kind * k
    return LpStandardForm(cost, matrix, rhs, kinds)


def build_aggregated_lp(bs: BasisSet) -> LpStandardForm:
    return build_block_lp(bs.template, [g.weight for g in bs], [g.centroid for g in bs])


@dataclass
class BlockSolution:
    """Per-block view of an optimal block LP."""

    primal: list[np.ndarray]
    dual: list[np.ndarray]
    ov: list[float]

    @property
    def objective(self) -> float:
        return float(sum(self.ov))


def solve_blocks(template: LpStandardForm, weights: Sequence[float],
                 rhs_blocks: Sequence[np.ndarray], joint: bool = False) -> BlockSolution:
    """Optimum of the block LP ``build_block_lp(template, weights, rhs_blocks)``.

    The blocks share no rows or columns, so by default each one is solved on
    its own; ``joint`` solves the assembled LP instead (same optimum, slower).
    """
    weights = [float(w) for w in weights]
    m, n = template.n_rows, template.n_cols
    if joint:
        sol = solve_lp(build_block_lp(template, weights, rhs_blocks))
        if not sol.optimal:
            raise RuntimeError(f"block LP is {sol.status.value}")
        primal = [np.array(sol.primal[k * n:(k + 1) * n]) for k in range(len(weights))]
        dual = [np.array(sol.dual[k * m:(k + 1) * m]) for k in range(len(weights))]
    else:
        primal, dual = [], []
        for k, (w, b) in enumerate(zip(weights, rhs_blocks)):
            block = LpStandardForm(w * template.cost, template.matrix, b, template.row_kind)
            sol = solve_lp(block)
            if not sol.optimal:
                raise RuntimeError(f"block {k + 1} of the block LP is {sol.status.value}")
            primal.append(np.array(sol.primal))
            dual.append(np.array(sol.dual))
    ov = [float(w * template.cost @ x) for w, x in zip(weights, primal)]
    return BlockSolution(primal, dual, ov)


def solve_aggregated(bs: BasisSet, joint: bool = False) -> BlockSolution:
    """Solve the aggregated LP and store each block's primal as ``primal_rep``."""
    res = solve_blocks(bs.template, [g.weight for g in bs], [g.centroid for g in bs], joint)
    for g, x in zip(bs, res.primal):
        g.primal_rep = x
    return res


@dataclass
class ExactnessReport:
    objective_residual: float
    primal_residual: dict[int, float]
    dual_residual: dict[int, float]
    degeneracy_census: dict[int, int]
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "objective_residual": self.objective_residual,
            "primal_residual": {str(k): v for k, v in self.primal_residual.items()},
            "dual_residual": {str(k): v for k, v in self.dual_residual.items()},
            "degeneracy_census": {str(k): v for k, v in self.degeneracy_census.items()},
            "tol": self.tol,
            "passed": self.passed,
        }


def check_exactness(full_ovs: Sequence[float], bs: BasisSet, agg: BlockSolution,
                    tol: float = 1e-9, primal_tol: float = 1e-8) -> ExactnessReport:
    """Compare the aggregated solve against the full per-timestep model.

    Objective residual is relative; primal and dual residuals are max-abs per
    basis, the dual one scaled by ``max(1, |y|)``.
    """
    full_ovs = np.asarray(full_ovs, dtype=float)
    if full_ovs.size != bs.horizon:
        raise ValueError(f"expected {bs.horizon} timestep objectives, got {full_ovs.size}")
    if len(agg.primal) != len(bs):
        raise ValueError(f"expected {len(bs)} blocks, got {len(agg.primal)}")
    total = float(full_ovs.sum())
    obj_res = abs(total - float(sum(agg.ov))) / max(1.0, abs(total))
    primal_res, dual_res = {}, {}
    for g, x, y in zip(bs, agg.primal, agg.dual):
        if x.shape != g.member_primal_mean.shape or y.shape != g.member_dual.shape:
            raise ValueError(f"basis {g.id}: block dimension mismatch")
        primal_res[g.id] = float(np.max(np.abs(g.member_primal_mean - x), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
        dual_res[g.id] = float(np.max(np.abs(y - g.dual_rep), initial=0.0)) / scale
    passed = (obj_res <= tol and all(v <= primal_tol for v in primal_res.values()))
    return ExactnessReport(obj_res, primal_res, dual_res, bs.degeneracy_census, tol, passed)


def run_length_encode(members: Sequence[int]) -> list[list[int]]:
    """``[[start, length], ...]`` over sorted timestep indices."""
    runs: list[list[int]] = []
    for t in members:
        t = int(t)
        if runs and runs[-1][0] + runs[-1][1] == t:
            runs[-1][1] += 1
        else:
            runs.append([t, 1])
    return runs


def run_length_decode(runs: Sequence[Sequence[int]]) -> list[int]:
    return [s + k for s, n in runs for k in range(n)]


def bases_document(bs: BasisSet) -> dict:
    """JSON-ready description of the basis set; timesteps are 1-based."""
    return {
        "schema_version": SCHEMA_VERSION,
        "horizon": bs.horizon,
        "flags": list(bs.flags),
        "bases": [{
            "basis_id": g.id,
            "active_rows": list(g.active_set.indices),
            "weight": g.weight,
            "centroid": [float(v) for v in g.centroid],
            "members_run_length_encoded": [[s + 1, n] for s, n in run_length_encode(g.members)],
            "degenerate_members": g.degenerate_members,
            "descriptor": g.descriptor,
        } for g in bs],
    }
