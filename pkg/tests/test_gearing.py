import itertools
import random

import pytest

from mdag import (
    best_gearing,
    build_mdag,
    enumerate_gearings,
    find_gearing,
    function_space,
    geared_subgraph_for,
    is_bidirected_connected,
    is_geared,
    make_gearing,
    parametrizable_sets,
    pi_of,
    remainder_tree,
    verify_diffsets,
)
from mdag.errors import NotBidirectedConnectedError, NotGearedError
from mdag.gearing import validate_edge_order

from conftest import random_mdag


def test_find_gearing_fig4a(fig4a):
    gr = find_gearing(fig4a)
    assert gr is not None
    assert gr.edge_order[: gr.n_real] == (("1", "2"), ("2", "3", "4"), ("3", "4", "5"))
    assert gr.remainder_sets == (("1", "2"), ("3", "4"), ("5",))


def test_fig4a_first_gearing_pi(fig4a):
    gr = find_gearing(fig4a)
    assert pi_of(fig4a, gr, "2") == ("3", "4")
    assert pi_of(fig4a, gr, "1") == ()
    assert pi_of(fig4a, gr, "5") == ()
    assert pi_of(fig4a, gr, "3") == ("5",)
    assert pi_of(fig4a, gr, "4") == ("5",)


def test_fig4a_alternative_gearing_pi(fig4a):
    gr = make_gearing(fig4a, [("2", "3", "4"), ("1", "2"), ("3", "4", "5")])
    assert gr.remainder_sets == (("2", "3", "4"), ("1",), ("5",))
    assert pi_of(fig4a, gr, "2") == ("1",)
    assert pi_of(fig4a, gr, "3") == ("5",)
    assert pi_of(fig4a, gr, "4") == ("5",)


def test_three_cycle_not_geared(cycle3):
    assert find_gearing(cycle3) is None
    assert not is_geared(cycle3)


def test_single_edge_trivially_geared(fig8a):
    gr = find_gearing(fig8a)
    assert gr.edge_order[0] == ("2", "3")
    assert gr.remainder_sets[0] == ("2", "3")


def test_invalid_edge_order_rejected(fig4a):
    with pytest.raises(NotGearedError):
        make_gearing(fig4a, [("1", "2"), ("3", "4", "5"), ("2", "3", "4")])
    with pytest.raises(NotGearedError):
        validate_edge_order(fig4a, [("1", "2")])


def _brute_force_geared(g):
    """Independent running-intersection check over all edge permutations."""
    edges = [frozenset(e) for e in g.bidirected_edges]
    for perm in itertools.permutations(edges):
        ok = True
        for j in range(1, len(perm)):
            inter = perm[j] & set().union(*perm[:j])
            if inter and not any(inter <= perm[i] for i in range(j)):
                ok = False
                break
        if ok:
            return True
    return not edges


def test_gearedness_matches_brute_force():
    rng = random.Random(99)
    for _ in range(40):
        g = random_mdag(rng, rng.randint(2, 6), n_bi=rng.randint(0, 4))
        assert is_geared(g) == _brute_force_geared(g)


def test_gearing_invariants(fig3, fig4a, fig7a, fig8a):
    for g in (fig3, fig4a, fig7a, fig8a):
        for gr in enumerate_gearings(g):
            # remainder sets partition the random vertices
            union = [v for r in gr.remainder_sets for v in r]
            assert sorted(union) == list(g.random_vertices)
            # running intersection witness for each later edge
            placed: set = set()
            for j, e in enumerate(gr.edge_order):
                inter = set(e) & placed
                if j > 0 and inter:
                    assert any(inter <= set(gr.edge_order[i]) for i in range(j))
                placed |= set(e)
            # every pi-argument precedes its vertex
            pos = {v: i for i, v in enumerate(gr.vertex_order)}
            for v in g.random_vertices:
                for w in gr.pi(v):
                    assert pos[w] < pos[v]


def test_function_space_fig4a_sizes(fig4a):
    gr = find_gearing(fig4a)
    f5 = function_space(fig4a, gr, "5")
    assert f5.observed_args == ("3",)
    assert f5.functional_args == ()
    assert f5.size == 4
    f4 = function_space(fig4a, gr, "4")
    assert f4.observed_args == ("2", "3", "6")
    assert f4.functional_args == ("5",)
    assert f4.size == 2 ** 32
    f3 = function_space(fig4a, gr, "3")
    assert f3.observed_args == ("1",)
    assert f3.functional_args == ("5",)
    assert f3.size == 2 ** 8
    f1 = function_space(fig4a, gr, "1")
    assert f1.size == 2


def test_function_space_isolated_vertex():
    g = build_mdag(["v"], cards={"v": 5})
    gr = best_gearing(g)
    desc = function_space(g, gr, "v")
    assert desc.size == 5
    assert desc.input_cells == 1


def test_best_gearing_on_chain_fits_budget(fig5a):
    gr = best_gearing(fig5a)
    from mdag.gearing import assignment_budget

    assert assignment_budget(gr) == 131072
    # the lexicographically first gearing explodes instead
    first = find_gearing(fig5a)
    from mdag.gearing import log2_assignment_budget

    assert log2_assignment_budget(first) > 60


def test_geared_subgraph_fig9a_full(fig9a):
    sub = geared_subgraph_for(fig9a, ("1", "2", "3", "4"))
    assert len(sub.bidirected_edges) == 3
    for e in sub.bidirected_edges:
        assert len(e) == 2
        assert any(set(e) <= set(b) for b in fig9a.bidirected_edges)
    assert is_geared(sub)
    assert is_bidirected_connected(sub, ("1", "2", "3", "4"))
    assert sub.directed_edges == fig9a.directed_edges


def test_geared_subgraph_pair(fig4a):
    sub = geared_subgraph_for(fig4a, ("3", "4"))
    assert ("3", "4") in sub.bidirected_edges


def test_geared_subgraph_fig9a_triple(fig9a):
    sub = geared_subgraph_for(fig9a, ("1", "2", "4"))
    assert set(sub.bidirected_edges) == {("1", "2"), ("1", "4")}


def test_geared_subgraph_rejects_disconnected(fig9a):
    with pytest.raises(NotBidirectedConnectedError):
        geared_subgraph_for(fig9a, ("1", "3"))


def test_geared_subgraph_preserves_parametrizable_sets(fig9a, cycle3):
    # every parametrizable set stays parametrizable in the subgraph built
    # from its own symmetric-difference witness
    for g in (fig9a, cycle3):
        for a in parametrizable_sets(g).sets:
            w = verify_diffsets(g, a)
            assert w is not None
            sub = geared_subgraph_for(g, w.connected_set)
            assert a in parametrizable_sets(sub).sets


def test_remainder_tree_fig4a(fig4a):
    gr = find_gearing(fig4a)
    tree = remainder_tree(fig4a, gr, ("2", "3", "5"))
    assert tree.nodes == (0, 1, 2)
    assert tree.root == 0
    assert tree.edges == ((0, 1), (1, 2))


def test_remainder_tree_single_slot(fig4a):
    gr = find_gearing(fig4a)
    tree = remainder_tree(fig4a, gr, ("1", "2"))
    assert tree.nodes == (0,)
    assert tree.edges == ()


def test_remainder_tree_chain_is_path(fig5a):
    gr = make_gearing(fig5a, [("4", "5"), ("3", "4"), ("2", "3")])
    tree = remainder_tree(fig5a, gr, ("2", "3", "4", "5"))
    assert tree.nodes == (0, 1, 2)
    assert tree.edges == ((0, 1), (1, 2))


def test_remainder_tree_structure_invariants(fig4a, fig7a):
    for g, gr in ((fig4a, find_gearing(fig4a)), (fig7a, find_gearing(fig7a))):
        verts = g.random_vertices
        for r in range(1, len(verts) + 1):
            for c in itertools.combinations(verts, r):
                if not is_bidirected_connected(g, c):
                    continue
                tree = remainder_tree(g, gr, c)
                assert len(tree.edges) == len(tree.nodes) - 1
                assert tree.root == min(tree.nodes)
                for i, j in tree.edges:
                    assert i < j
                    ci = set(gr.remainder_sets[i]) & set(c)
                    assert ci & set(gr.edge_order[j])
                # connectivity from the root
                reached = {tree.root}
                frontier = [tree.root]
                while frontier:
                    nxt = [j for i, j in tree.edges if i in frontier and j not in reached]
                    reached.update(nxt)
                    frontier = nxt
                assert reached == set(tree.nodes)
