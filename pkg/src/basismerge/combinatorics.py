"""Exact set-partition counting and enumeration."""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterator, Sequence


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of partitions of an ``n``-set, ``B_{n+1} = sum_k C(n, k) B_k``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1
    return sum(comb(n - 1, k) * bell_number(k) for k in range(n))


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind via the inclusion-exclusion sum."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be >= 0")
    if k > n:
        return 0
    total = sum(comb(k, j) * (-1) ** (k - j) * j ** n for j in range(k + 1))
    return total // factorial(k)


def enumerate_partitions(ids: Sequence[int], k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every partition of ``ids`` into exactly ``k`` blocks, once each.

    Walks restricted growth strings in lexicographic order; blocks come out
    ordered by first occurrence, i.e. by smallest element for sorted ``ids``.
    """
    items = sorted(ids)
    n = len(items)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rgs = [0] * n

    def rec(pos: int, used: int):
        # used = number of distinct blocks among rgs[:pos]
        if n - pos < k - used:
            return
        if pos == n:
            if used == k:
                blocks = [[] for _ in range(k)]
                for item, b in zip(items, rgs):
                    blocks[b].append(item)
                yield tuple(tuple(b) for b in blocks)
            return
        for b in range(min(used + 1, k)):
            rgs[pos] = b
            yield from rec(pos + 1, max(used, b + 1))

    if n == 0:
        return
    rgs[0] = 0
    yield from rec(1, 1)
