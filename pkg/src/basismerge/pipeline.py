"""Per-timestep solving and the basis analysis built on top of it."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .aggregation import BasisGrouper, BasisSet, BlockSolution, ExactnessReport, check_exactness, solve_aggregated
from .lp import ActiveSet, LpSolution, LpStandardForm, extract_active_set, solve_lp
from .merging import Partition, audit_host, com_partition, make_cluster, resolve_partition
from .metrics import describe_basis
from .transport import NetworkModel, TimestepData, build_template, check_timestep, timestep_rhs


class InfeasibleTimestep(RuntimeError):
    def __init__(self, t: int, status: str):
        super().__init__(f"timestep t={t + 1} is {status}")
        self.t = t
        self.status = status


def _solve_one(template: LpStandardForm, rhs: np.ndarray) -> tuple[LpSolution, ActiveSet]:
    sol = solve_lp(template.with_rhs(rhs))
    active = extract_active_set(sol.problem, sol) if sol.optimal else None
    return sol, active


def _solve_chunk(args):
    template, rhs_rows = args
    return [_solve_one(template, r) for r in rhs_rows]


def solve_timesteps(net: NetworkModel, data: Sequence[TimestepData], jobs: int = 1,
                    chunk: int = 256) -> Iterator[tuple[int, np.ndarray, LpSolution, ActiveSet]]:
    """Yield ``(t, rhs, solution, active_set)`` in timestep order (``t`` 0-based).

    Raises :class:`InfeasibleTimestep` at the first non-optimal timestep.
    """
    template = build_template(net)
    rhs_all = []
    for d in data:
        check_timestep(net, d)
        rhs_all.append(timestep_rhs(net, d))

    def checked(t, rhs, sol, active):
        if not sol.optimal:
            raise InfeasibleTimestep(t, sol.status.value)
        return t, rhs, sol, active

    if jobs <= 1:
        for t, rhs in enumerate(rhs_all):
            yield checked(t, rhs, *_solve_one(template, rhs))
        return
    chunks = [rhs_all[k:k + chunk] for k in range(0, len(rhs_all), chunk)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(_solve_chunk, [(template, c) for c in chunks])
        t = 0
        for c, res in zip(chunks, results):
            for rhs, (sol, active) in zip(c, res):
                yield checked(t, rhs, sol, active)
                t += 1


@dataclass
class Analysis:
    net: NetworkModel
    rhs: np.ndarray
    objectives: np.ndarray
    primal: np.ndarray
    duals: np.ndarray
    labels: np.ndarray
    bases: BasisSet
    aggregated: BlockSolution
    exactness: ExactnessReport

    @property
    def horizon(self) -> int:
        return self.rhs.shape[0]


def analyse(net: NetworkModel, data: Sequence[TimestepData], jobs: int = 1,
            exactness_tol: float = 1e-9) -> Analysis:
    """Solve every timestep, group by active set and verify the aggregated model."""
    template = build_template(net)
    grouper = BasisGrouper(template)
    T = len(data)
    rhs = np.empty((T, template.n_rows))
    obj = np.empty(T)
    primal = np.empty((T, template.n_cols))
    duals = np.empty((T, template.n_rows))
    keys: list[ActiveSet] = []
    for t, b, sol, active in solve_timesteps(net, data, jobs):
        grouper.add(t, b, sol, active)
        rhs[t], obj[t], primal[t], duals[t] = b, sol.objective, sol.primal, sol.dual
        keys.append(active)
    bs = grouper.finish()
    ids = {g.active_set: g.id for g in bs}
    labels = np.array([ids[a] for a in keys], dtype=int)
    agg = solve_aggregated(bs)
    report = check_exactness(obj, bs, agg, tol=exactness_tol)
    for g in bs:
        g.descriptor = describe_basis(g, net)
    return Analysis(net, rhs, obj, primal, duals, labels, bs, agg, report)


def verify_partition(p: Partition, bs: BasisSet) -> dict:
    """Analytical CoM against the re-solved merged LP, plus host audits."""
    ev = com_partition(p, bs)
    solved = resolve_partition(p, bs)
    resolved_com = ev.ov_I - solved.objective
    residual = abs(ev.com - resolved_com) / max(1.0, abs(ev.ov_I))
    audits = {}
    for block in p.blocks:
        if len(block) > 1:
            c = make_cluster(block, bs)
            audits[c.label] = audit_host(c, bs).to_dict()
    return {"partition": p.label(), "com": ev.com, "com_resolved": resolved_com,
            "relative_residual": residual, "hosts": ev.hosts, "host_audit": audits}


def pairwise_mergers(bs: BasisSet, verify: bool = True) -> list[dict]:
    """Every two-basis merge, optionally checked by re-solving."""
    out = []
    for a, b in itertools.combinations(bs.ids, 2):
        p = Partition.identity(bs.ids).merge((a,), (b,))
        if verify:
            out.append(verify_partition(p, bs))
        else:
            ev = com_partition(p, bs)
            out.append({"partition": p.label(), "com": ev.com, "hosts": ev.hosts})
    return out

