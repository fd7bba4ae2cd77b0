from __future__ import annotations

from biquad.unionfind import DisjointSet, split_witness


class TestDisjointSet:
    def test_union_and_count(self) -> None:
        dsu = DisjointSet(5)
        assert dsu.union(0, 1)
        assert dsu.union(3, 4)
        assert not dsu.union(1, 0)
        assert dsu.count == 3
        assert dsu.find(0) == dsu.find(1)
        assert dsu.find(2) != dsu.find(3)

    def test_components_ordered_by_smallest_vertex(self) -> None:
        dsu = DisjointSet(5)
        dsu.union(4, 1)
        dsu.union(3, 2)
        assert dsu.components() == [(0,), (1, 4), (2, 3)]

    def test_long_chain(self) -> None:
        dsu = DisjointSet(1000)
        for v in range(999):
            dsu.union(v, v + 1)
        assert dsu.count == 1
        assert len({dsu.find(v) for v in range(1000)}) == 1


class TestSplitWitness:
    def test_connected(self) -> None:
        assert split_witness(3, [(0, 1), (1, 2)]) is None

    def test_isolated_vertex(self) -> None:
        assert split_witness(3, [(0, 1)]) == (2,)

    def test_no_edges_picks_lowest_singleton(self) -> None:
        assert split_witness(2, []) == (0,)

    def test_smallest_component(self) -> None:
        assert split_witness(5, [(0, 1), (1, 2), (3, 4)]) == (3, 4)
