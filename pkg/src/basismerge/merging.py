"""Merging bases into clusters and the cost of misclassification (CoM).

A cluster replaces the points of several bases by their weighted centroid.
If the centroid falls into basis ``h``, the cluster's objective is
``b_k . (W_k / W_h) y_h`` where ``y_h`` is the aggregated dual of ``h``, so
the objective loss of a whole partition is available without solving an LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .aggregation import BasisGroup, BasisSet, BlockSolution, build_block_lp, solve_blocks
from .lp import ActiveSet, extract_active_set, solve_equality_system, solve_lp

TIE_TOL = 1e-9


def _tie_scale(values) -> float:
    return TIE_TOL * max(1.0, float(np.max(np.abs(values), initial=0.0)))


@dataclass(frozen=True)
class Cluster:
    basis_ids: tuple[int, ...]
    weight: int
    centroid: np.ndarray
    host: Optional[int] = None

    @property
    def label(self) -> str:
        return "{" + ",".join(str(i) for i in self.basis_ids) + "}"


@dataclass(frozen=True)
class Partition:
    """Canonical family of disjoint basis-id blocks.

    Ids are sorted inside each block and blocks are sorted by their smallest id.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = [tuple(sorted(int(i) for i in b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        if len(flat) != len(set(flat)):
            raise ValueError("partition blocks must be pairwise disjoint")
        object.__setattr__(self, "blocks", tuple(sorted(blocks)))

    @classmethod
    def identity(cls, ids: Iterable[int]) -> "Partition":
        return cls(tuple((i,) for i in ids))

    @classmethod
    def single(cls, ids: Iterable[int]) -> "Partition":
        return cls((tuple(ids),))

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def ids(self) -> list[int]:
        return sorted(i for b in self.blocks for i in b)

    def label(self) -> str:
        return ",".join("{" + ",".join(str(i) for i in b) + "}" for b in self.blocks)

    def covers(self, ids: Iterable[int]) -> bool:
        return self.ids == sorted(ids)

    def merge(self, a: tuple[int, ...], b: tuple[int, ...]) -> "Partition":
        rest = [blk for blk in self.blocks if blk != a and blk != b]
        return Partition(tuple(rest) + (a + b,))


def merged_centroid(groups: Sequence[BasisGroup]) -> tuple[int, np.ndarray]:
    """Total weight and weighted mean of the groups' centroids."""
    if not groups:
        raise ValueError("need at least one group")
    if len(groups) == 1:
        return groups[0].weight, np.array(groups[0].centroid)
    weight = sum(g.weight for g in groups)
    total = sum(g.weight * g.centroid for g in groups)
    return weight, total / weight


def make_cluster(basis_ids: Iterable[int], bs: BasisSet, host: Optional[int] = None) -> Cluster:
    ids = tuple(sorted(basis_ids))
    weight, centroid = merged_centroid([bs.get(i) for i in ids])
    return Cluster(ids, weight, centroid, host)


def candidate_com(cluster: Cluster, host: int, bs: BasisSet) -> float:
    """CoM of ``cluster`` assuming its centroid falls into basis ``host``."""
    h = bs.get(host)
    total = 0.0
    for i in cluster.basis_ids:
        g = bs.get(i)
        total += float(g.centroid @ (g.dual_rep - (g.weight / h.weight) * h.dual_rep))
    return total


def host_candidates(cluster: Cluster, bs: BasisSet) -> dict[int, float]:
    return {h: candidate_com(cluster, h, bs) for h in bs.ids}


def host_basis(cluster: Cluster, bs: BasisSet) -> tuple[int, float]:
    """Basis minimising the CoM over all of I; smallest id wins ties.

    A singleton is hosted by its own basis at zero cost.
    """
    if len(cluster.basis_ids) == 1:
        return cluster.basis_ids[0], 0.0
    cands = host_candidates(cluster, bs)
    best = min(cands.values())
    tol = _tie_scale(list(cands.values()))
    host = min(h for h, v in cands.items() if v <= best + tol)
    return host, cands[host]


def host_ties(cluster: Cluster, bs: BasisSet) -> list[int]:
    """All hosts within tie tolerance of the minimum CoM."""
    if len(cluster.basis_ids) == 1:
        return list(cluster.basis_ids)
    cands = host_candidates(cluster, bs)
    best = min(cands.values())
    tol = _tie_scale(list(cands.values()))
    return sorted(h for h, v in cands.items() if v <= best + tol)


@dataclass
class HostAudit:
    """Re-solve check of a cluster's analytical host."""

    basis_ids: tuple[int, ...]
    host: int
    solved_basis: Optional[int]
    solved_active_rows: tuple[int, ...]
    analytical_ov: float
    resolved_ov: float
    status: str  # match | tie | boundary | violation

    @property
    def value_residual(self) -> float:
        return abs(self.analytical_ov - self.resolved_ov) / max(1.0, abs(self.resolved_ov))

    @property
    def violation(self) -> bool:
        return self.status == "violation"

    def to_dict(self) -> dict:
        return {
            "cluster": list(self.basis_ids), "host": self.host,
            "solved_basis": self.solved_basis,
            "solved_active_rows": list(self.solved_active_rows),
            "analytical_ov": self.analytical_ov, "resolved_ov": self.resolved_ov,
            "value_residual": self.value_residual, "status": self.status,
        }


def audit_host(cluster: Cluster, bs: BasisSet, value_tol: float = 1e-8) -> HostAudit:
    """Solve the LP at the cluster centroid and compare with the CoM argmin.

    ``tie``: the solved basis differs but attains the same minimum CoM.
    ``boundary``: the solved active set is not one of I but the analytical
    objective still matches the re-solve.
    """
    host, _ = host_basis(cluster, bs)
    lp = bs.template.with_rhs(cluster.centroid)
    sol = solve_lp(lp)
    if not sol.optimal:
        raise RuntimeError(f"centroid LP of {cluster.label} is {sol.status.value}")
    active = extract_active_set(lp, sol)
    solved = bs.lookup(active)
    h = bs.get(host)
    analytical = float(cluster.centroid @ ((cluster.weight / h.weight) * h.dual_rep))
    resolved = cluster.weight * sol.objective
    value_ok = abs(analytical - resolved) <= value_tol * max(1.0, abs(resolved))
    if solved == host:
        status = "match" if value_ok else "violation"
    elif solved is not None and solved in host_ties(cluster, bs):
        status = "tie"
    elif solved is None and value_ok:
        status = "boundary"
    else:
        status = "violation"
    return HostAudit(cluster.basis_ids, host, solved, active.indices, analytical, resolved, status)


def host_primal(cluster: Cluster, bs: BasisSet, host: Optional[int] = None) -> np.ndarray:
    """Per-timestep primal at the centroid with the host's active rows held tight."""
    if host is None:
        host, _ = host_basis(cluster, bs)
    return solve_equality_system(bs.template, bs.get(host).active_set, cluster.centroid)


@dataclass
class MergeEvaluation:
    partition: Partition
    com: float
    ov_I: float
    ov_K: float
    per_cluster_ov: dict[str, float]
    hosts: dict[str, int]
    ties: dict[str, list[int]] = field(default_factory=dict)
    host_verified: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "partition": self.partition.label(),
            "blocks": [list(b) for b in self.partition.blocks],
            "com": self.com, "ov_I": self.ov_I, "ov_K": self.ov_K,
            "per_cluster_ov": self.per_cluster_ov, "hosts": self.hosts,
            "ties": self.ties, "host_verified": self.host_verified,
        }


def com_partition(p: Partition, bs: BasisSet, verify_hosts: bool = False) -> MergeEvaluation:
    """Objective loss of ``p`` relative to the per-basis aggregation, no LP solved.

    With ``verify_hosts`` each multi-basis cluster is additionally audited by
    solving the LP at its centroid.
    """
    if not p.covers(bs.ids):
        raise ValueError(f"partition {p.label()} does not cover bases {bs.ids}")
    ov_I = 0.0
    for g in bs:
        ov_I += g.objective
    ov_K = 0.0
    per_cluster, hosts, ties, verified = {}, {}, {}, {}
    for block in p.blocks:
        cluster = make_cluster(block, bs)
        h, _ = host_basis(cluster, bs)
        hg = bs.get(h)
        if len(block) == 1:
            ov_k = hg.objective
        else:
            ov_k = float(cluster.centroid @ ((cluster.weight / hg.weight) * hg.dual_rep))
            tied = host_ties(cluster, bs)
            if len(tied) > 1:
                ties[cluster.label] = tied
            if verify_hosts:
                verified[cluster.label] = not audit_host(cluster, bs).violation
        per_cluster[cluster.label] = ov_k
        hosts[cluster.label] = h
        ov_K += ov_k
    return MergeEvaluation(p, ov_I - ov_K, ov_I, ov_K, per_cluster, hosts, ties, verified)


def build_merged_lp(p: Partition, bs: BasisSet):
    clusters = [make_cluster(b, bs) for b in p.blocks]
    return build_block_lp(bs.template, [c.weight for c in clusters], [c.centroid for c in clusters])


def resolve_partition(p: Partition, bs: BasisSet, joint: bool = False) -> BlockSolution:
    """Solve the merged LP of ``p``; blocks follow ``p.blocks`` order."""
    clusters = [make_cluster(b, bs) for b in p.blocks]
    return solve_blocks(bs.template, [c.weight for c in clusters], [c.centroid for c in clusters], joint)


class ComEvaluator:
    """Cached cluster-level CoM for search strategies.

    ``cross[i, h] = W_i b_i . y_h`` with ``y_h`` the per-timestep dual of basis
    ``h``; a cluster's candidate objective under host ``h`` is the column sum
    over its members, and its CoM is ``sum_i cross[i, i]`` minus the best
    candidate.
    """

    def __init__(self, bs: BasisSet):
        self.bs = bs
        self.ids = list(bs.ids)
        self._pos = {b: k for k, b in enumerate(self.ids)}
        weighted = np.array([g.weight * g.centroid for g in bs])
        duals = np.array([g.member_dual for g in bs])
        self.cross = weighted @ duals.T
        self.ov_I = float(sum(g.objective for g in bs))
        self._cache: dict[tuple[int, ...], tuple[float, int]] = {}

    def cluster(self, block: tuple[int, ...]) -> tuple[float, int]:
        """``(com, host)`` of one block."""
        hit = self._cache.get(block)
        if hit is not None:
            return hit
        if len(block) == 1:
            res = (0.0, block[0])
        else:
            rows = [self._pos[i] for i in block]
            cand = self.cross[rows].sum(axis=0)
            own = float(self.cross[rows, rows].sum())
            best = float(cand.max())
            tol = _tie_scale(cand)
            k = int(np.flatnonzero(cand >= best - tol)[0])
            res = (own - float(cand[k]), self.ids[k])
        self._cache[block] = res
        return res

    def cluster_com(self, block: tuple[int, ...]) -> float:
        return self.cluster(block)[0]

    def partition_com(self, blocks: Iterable[tuple[int, ...]]) -> float:
        return float(sum(self.cluster(b)[0] for b in blocks))
