"""Disjoint-set forest used for the connectivity scans behind reducibility and separability."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable


class DisjointSet:
    """Union-find with path compression and union by rank."""

    def __init__(self, size: int) -> None:
        self.parent = list(range(size))
        self.rank = [0] * size
        self.count = size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of x and y. Returns False if they were already joined."""
        xroot = self.find(x)
        yroot = self.find(y)
        if xroot == yroot:
            return False
        if self.rank[xroot] < self.rank[yroot]:
            xroot, yroot = yroot, xroot
        self.parent[yroot] = xroot
        if self.rank[xroot] == self.rank[yroot]:
            self.rank[xroot] += 1
        self.count -= 1
        return True

    def components(self) -> list[tuple[int, ...]]:
        """Components as sorted tuples, ordered by their smallest vertex."""
        groups: dict[int, list[int]] = {}
        for v in range(len(self.parent)):
            groups.setdefault(self.find(v), []).append(v)
        return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def split_witness(size: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...] | None:
    """Return one side of a disconnecting split of ``range(size)``, or None if connected.

    The side reported is the smallest component (ties go to the one holding the
    lowest vertex).
    """
    dsu = DisjointSet(size)
    for u, v in edges:
        dsu.union(u, v)
        if dsu.count == 1:
            return None
    if dsu.count == 1:
        return None
    return min(dsu.components(), key=len)
