"""Search strategies over bases mergers.

All strategies start from the identity partition and report, for every
number of clusters ``k`` from ``|I|`` down to 1, the chosen partition, its
CoM and how many candidate mergers were evaluated at that level.

Any object with ``ids``, ``ov_I`` and ``partition_com(blocks)`` can stand
in for :class:`~basismerge.merging.ComEvaluator`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Literal, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .aggregation import BasisSet
from .combinatorics import enumerate_partitions
from .merging import ComEvaluator, Partition

EXHAUSTIVE_CAP = 12
EXHAUSTIVE, GREEDY, GREEDY_ADJACENT = "exhaustive", "greedy", "greedy_adjacent"


class ExhaustiveCapExceeded(ValueError):
    pass


@dataclass
class Level:
    partition: Partition
    com: float
    evaluated: int
    fallback: bool = False

    def to_dict(self) -> dict:
        return {"partition": self.partition.label(),
                "blocks": [list(b) for b in self.partition.blocks],
                "com": self.com, "evaluated": self.evaluated,
                "fallback": self.fallback}


@dataclass
class StrategyTrace:
    strategy: str
    per_k: dict[int, Level] = field(default_factory=dict)

    def counts(self) -> dict[int, int]:
        return {k: lvl.evaluated for k, lvl in sorted(self.per_k.items(), reverse=True)}

    def to_dict(self) -> dict:
        return {"strategy": self.strategy,
                "levels": [dict(k=k, **lvl.to_dict())
                           for k, lvl in sorted(self.per_k.items(), reverse=True)]}


@dataclass(frozen=True)
class AdjacencyList:
    pairs: frozenset

    def __init__(self, pairs: Iterable[Sequence[int]] = ()):
        norm = set()
        for a, b in pairs:
            if a == b:
                raise ValueError(f"adjacency must be irreflexive, got ({a}, {b})")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "pairs", frozenset(norm))

    def __contains__(self, pair) -> bool:
        a, b = pair
        return (min(a, b), max(a, b)) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)

    def connected(self, ids: Iterable[int]) -> bool:
        """Whether ``ids`` induce a connected subgraph."""
        ids = list(ids)
        if len(ids) <= 1:
            return True
        todo, seen = [ids[0]], {ids[0]}
        rest = set(ids)
        while todo:
            a = todo.pop()
            for b in rest - seen:
                if (a, b) in self:
                    seen.add(b)
                    todo.append(b)
        return len(seen) == len(rest)


def _as_evaluator(source):
    return ComEvaluator(source) if isinstance(source, BasisSet) else source


def _better(com, blocks, best_com, best_blocks, tol) -> bool:
    if best_blocks is None or com < best_com - tol:
        return True
    return abs(com - best_com) <= tol and blocks < best_blocks


def exhaustive_strategy(source, cap: int = EXHAUSTIVE_CAP, target_k: int = 1) -> StrategyTrace:
    """Best partition of every size down to ``target_k`` by full enumeration.

    Levels are independent of each other.
    """
    ev = _as_evaluator(source)
    ids = list(ev.ids)
    if len(ids) > cap:
        raise ExhaustiveCapExceeded(
            f"exhaustive search over {len(ids)} bases exceeds the cap of {cap}")
    tol = 1e-12 * max(1.0, abs(ev.ov_I))
    trace = StrategyTrace(EXHAUSTIVE)
    for k in range(len(ids), max(target_k, 1) - 1, -1):
        best_com, best_blocks, count = None, None, 0
        for blocks in enumerate_partitions(ids, k):
            count += 1
            com = ev.partition_com(blocks)
            canon = Partition(blocks).blocks
            if _better(com, canon, best_com, best_blocks, tol):
                best_com, best_blocks = com, canon
        trace.per_k[k] = Level(Partition(best_blocks), best_com, count)
    return trace


def _agglomerate(ev, name: str, allowed=None, target_k: int = 1) -> StrategyTrace:
    ids = list(ev.ids)
    tol = 1e-12 * max(1.0, abs(ev.ov_I))
    current = Partition.identity(ids)
    trace = StrategyTrace(name)
    trace.per_k[len(ids)] = Level(current, ev.partition_com(current.blocks), 1)
    while len(current) > max(target_k, 1):
        pairs = list(itertools.combinations(current.blocks, 2))
        fallback = False
        if allowed is not None:
            adjacent = [(a, b) for a, b in pairs if allowed(a, b)]
            if adjacent:
                pairs = adjacent
            else:
                fallback = True
        best_com, best_blocks = None, None
        for a, b in pairs:
            cand = current.merge(a, b)
            com = ev.partition_com(cand.blocks)
            if _better(com, cand.blocks, best_com, best_blocks, tol):
                best_com, best_blocks = com, cand.blocks
        current = Partition(best_blocks)
        trace.per_k[len(current)] = Level(current, best_com, len(pairs), fallback)
    return trace


def greedy_strategy(source, target_k: int = 1) -> StrategyTrace:
    """Merge the cheapest pair of clusters at each level; merges are never undone."""
    return _agglomerate(_as_evaluator(source), GREEDY, target_k=target_k)


def greedy_adjacent_strategy(source, adj: AdjacencyList, target_k: int = 1) -> StrategyTrace:
    """Greedy restricted to pairs whose union is connected in ``adj``.

    Levels without any adjacent pair fall back to all pairs and are flagged.
    """
    return _agglomerate(_as_evaluator(source), GREEDY_ADJACENT,
                        allowed=lambda a, b: adj.connected(a + b), target_k=target_k)


def adjacency_threshold(points: np.ndarray) -> float:
    """1.5 times the largest nearest-neighbour spacing among ``points``."""
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=2)
    return 1.5 * float(dist[:, 1].max())


def detect_adjacency(bs: BasisSet, raw_points: np.ndarray,
                     mode: Literal["input_space", "active_set"] = "input_space",
                     delta: Optional[float] = None) -> tuple[AdjacencyList, dict]:
    """Adjacent basis pairs plus an audit record of how they were found.

    ``input_space``: the varying right-hand-side coordinates are scaled to
    ``[0, 1]`` and two bases are adjacent when some of their points lie within
    ``delta`` of each other (default :func:`adjacency_threshold`, computed over
    distinct points).
    ``active_set``: adjacent when the active sets differ in exactly two rows.
    """
    if mode == "active_set":
        pairs = [(a.id, b.id) for a, b in itertools.combinations(bs.groups, 2)
                 if len(a.active_set.symmetric_difference(b.active_set)) == 2]
        return AdjacencyList(pairs), {"mode": mode, "pairs": sorted(pairs)}
    if mode != "input_space":
        raise ValueError(f"unknown adjacency mode {mode!r}")
    raw = np.asarray(raw_points, dtype=float)
    if raw.shape[0] != bs.horizon:
        raise ValueError(f"expected {bs.horizon} points, got {raw.shape[0]}")
    span = raw.max(axis=0) - raw.min(axis=0)
    cols = np.flatnonzero(span > 0)
    if cols.size == 0 or len(bs) < 2:
        return AdjacencyList(), {"mode": mode, "delta": 0.0, "columns": cols.tolist(), "pairs": []}
    pts = (raw[:, cols] - raw[:, cols].min(axis=0)) / span[cols]
    labels = np.empty(bs.horizon, dtype=int)
    for g in bs:
        labels[g.members] = g.id
    if delta is None:
        delta = adjacency_threshold(np.unique(pts, axis=0))
    close = cKDTree(pts).query_pairs(delta, output_type="ndarray")
    la, lb = labels[close[:, 0]], labels[close[:, 1]]
    diff = la != lb
    found = {(int(min(a, b)), int(max(a, b))) for a, b in zip(la[diff], lb[diff])}
    pairs = sorted(found)
    return AdjacencyList(pairs), {"mode": mode, "delta": float(delta),
                                  "columns": cols.tolist(), "pairs": pairs}


def greedy_count(n_clusters_before: int) -> int:
    """Candidate pairs greedy evaluates when reducing from ``n`` clusters."""
    return comb(n_clusters_before, 2)
