import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mork.graph import (
    CycleError,
    Explicit,
    Implicit,
    build_weight_digraph,
    computation_plan,
    contract_graph,
    gabow_scc,
    graph_report,
    is_explicit,
    scc_priorities,
    topological_sort,
)
from mork.core import Kind, MethodTableau
from mork.methods import Permutation, as_gmork, catalog, permute, rk4_variant

from oracles import all_arcs_forward, longest_cost_paths, mutual_reachability_classes


@st.composite
def digraphs(draw, max_v=8):
    v = draw(st.integers(1, max_v))
    bits = draw(st.lists(st.booleans(), min_size=v * v, max_size=v * v))
    return np.array(bits, dtype=bool).reshape(v, v)


@st.composite
def dags(draw, max_v=8):
    adj = draw(digraphs(max_v))
    v = len(adj)
    perm = draw(st.permutations(range(v)))
    low = np.tril(adj, -1)
    return low[np.ix_(perm, perm)]


class TestDigraph:
    def test_rk4_arcs(self):
        adj = build_weight_digraph(as_gmork(catalog("rk4")), 1)
        arcs = {(j1 + 1, j + 1) for j, j1 in zip(*np.nonzero(adj))}
        assert arcs == {(1, 2), (2, 3), (3, 4), (1, 5), (2, 5), (3, 5), (4, 5)}

    def test_zero_method(self):
        m = MethodTableau(2, [0, 0], lambda N: np.zeros((3, 2)), kind=Kind.NODE_DETERMINED)
        assert not build_weight_digraph(m, 3).any()

    def test_implicit_midpoint(self):
        adj = build_weight_digraph(catalog("mork-implicit-midpoint"), 4)
        assert adj.tolist() == [[True, False], [True, False]]

    def test_tolerance(self):
        w = np.array([[0.0], [1.0]])
        w[0, 0] = 1e-18
        m = MethodTableau(1, [0.0], lambda N: w, kind=Kind.NODE_DETERMINED)
        assert build_weight_digraph(m, 1)[0, 0]
        assert not build_weight_digraph(m, 1, tol=1e-15)[0, 0]


class TestGabow:
    def test_no_arcs(self):
        assert sorted(gabow_scc(np.zeros((3, 3), bool))) == [(0,), (1,), (2,)]

    def test_cycle(self):
        adj = np.zeros((3, 3), bool)
        adj[1, 0] = adj[2, 1] = adj[0, 2] = True
        assert gabow_scc(adj) == [(0, 1, 2)]

    @given(digraphs())
    def test_matches_mutual_reachability(self, adj):
        got = {frozenset(c) for c in gabow_scc(adj)}
        assert got == mutual_reachability_classes(adj)

    @given(digraphs())
    def test_components_complete_in_dependency_order(self, adj):
        comps = gabow_scc(adj)
        owner = {x: k for k, c in enumerate(comps) for x in c}
        for j, j1 in zip(*np.nonzero(adj)):
            assert owner[j1] <= owner[j]

    def test_deep_chain_is_iterative(self):
        v = 3000
        adj = np.zeros((v, v), bool)
        adj[np.arange(1, v), np.arange(v - 1)] = True
        assert len(gabow_scc(adj)) == v


class TestContractAndSort:
    def test_singletons_drop_loops(self):
        adj = np.array([[True, False], [True, False]])
        out = contract_graph(adj, [(0,), (1,)])
        assert out.tolist() == [[False, False], [True, False]]

    def test_cycle_collapses(self):
        adj = np.zeros((3, 3), bool)
        adj[1, 0] = adj[2, 1] = adj[0, 2] = True
        assert contract_graph(adj, [(0, 1, 2)]).tolist() == [[False]]

    def test_bad_partition(self):
        with pytest.raises(ValueError):
            contract_graph(np.zeros((2, 2), bool), [(0,)])
        with pytest.raises(ValueError):
            contract_graph(np.zeros((2, 2), bool), [(0, 1), (1,)])

    def test_chain(self):
        dag = np.zeros((3, 3), bool)
        dag[1, 0] = dag[2, 1] = True
        assert topological_sort(dag) == [0, 1, 2]

    def test_diamond(self):
        dag = np.zeros((4, 4), bool)
        dag[1, 0] = dag[2, 0] = dag[3, 1] = dag[3, 2] = True
        order = topological_sort(dag)
        assert order[0] == 0 and order[-1] == 3

    def test_empty(self):
        assert sorted(topological_sort(np.zeros((4, 4), bool))) == [0, 1, 2, 3]

    @pytest.mark.parametrize("loop", [True, False])
    def test_cycles_rejected(self, loop):
        dag = np.zeros((2, 2), bool)
        if loop:
            dag[0, 0] = True
        else:
            dag[0, 1] = dag[1, 0] = True
        with pytest.raises(CycleError):
            topological_sort(dag)

    @given(dags())
    def test_all_arcs_forward(self, dag):
        order = topological_sort(dag)
        assert sorted(order) == list(range(len(dag)))
        assert all_arcs_forward(order, dag)


class TestPriorities:
    def test_chain(self):
        dag = np.zeros((3, 3), bool)
        dag[1, 0] = dag[2, 1] = True
        assert scc_priorities([2, 3, 1], dag) == [6, 4, 1]

    def test_diamond_unit(self):
        dag = np.zeros((4, 4), bool)
        dag[1, 0] = dag[2, 0] = dag[3, 1] = dag[3, 2] = True
        assert scc_priorities([1] * 4, dag)[0] == 3

    def test_no_arcs(self):
        assert scc_priorities([4, 7], np.zeros((2, 2), bool)) == [4, 7]

    def test_negative_cost(self):
        with pytest.raises(ValueError):
            scc_priorities([-1], np.zeros((1, 1), bool))

    @given(dags(max_v=6), st.data())
    def test_matches_path_enumeration(self, dag, data):
        costs = data.draw(st.lists(st.integers(0, 9), min_size=len(dag), max_size=len(dag)))
        assert scc_priorities(costs, dag) == longest_cost_paths(costs, dag)


class TestPlan:
    def test_rk4(self):
        plan = computation_plan(as_gmork(catalog("rk4")), 1)
        assert plan.blocks == tuple(Explicit(j) for j in range(5))
        assert not plan.implicit_ranks.any()

    def test_implicit_euler(self):
        plan = computation_plan(catalog("mork-implicit-euler"), 5)
        assert plan.blocks == (Implicit((0,), ()), Explicit(1))
        assert plan.implicit_ranks[:, 0].all()
        assert not plan.implicit_ranks[:, 1].any()

    def test_variant_is_explicit(self):
        v = as_gmork(rk4_variant())
        assert is_explicit(v, 1)
        order = computation_plan(v, 1).order()
        assert order == [3, 2, 0, 1, 4]

    def test_gauss_jacobi_single_block(self):
        plan = computation_plan(catalog("mork-gauss-jacobi-4"), 3)
        assert isinstance(plan.blocks[0], Implicit)
        assert plan.blocks[0].stages == (0, 1)

    @given(st.permutations(range(1, 5)))
    def test_permutation_preserves_explicitness(self, images):
        phi = Permutation(tuple(images) + (5,))
        assert is_explicit(permute(catalog("mork4"), phi), 4)

    def test_report_format(self):
        text = graph_report(as_gmork(catalog("rk4")), 1)
        assert "1 -> 2" in text
        assert "block 5: {5} explicit priority=1" in text
        text = graph_report(catalog("mork-implicit-midpoint"), 2)
        assert "block 1: {1} implicit" in text
        assert "implicit rank 2: stages {1}" in text
