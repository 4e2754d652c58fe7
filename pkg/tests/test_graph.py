import random

import networkx as nx
import pytest

from mdag import (
    build_mdag,
    canonical_dag,
    district_subgraph,
    districts,
    parents,
    remove_childless,
    sterile,
)
from mdag.errors import (
    BidirectedEdgeNotMaximalError,
    BidirectedEdgeTooSmallError,
    CardinalityBelowTwoError,
    CyclicGraphError,
    FixedVertexHasParentError,
    UnknownVertexError,
    VertexHasChildrenError,
)

from conftest import random_mdag


def test_build_fig3_valid(fig3):
    assert fig3.random_vertices == ("1", "2", "3", "4")
    assert fig3.bidirected_edges == (("2", "4"),)
    assert fig3.card("2") == 2


def test_build_empty_graph():
    g = build_mdag([], [])
    assert g.random_vertices == ()
    assert districts(g) == []


def test_build_two_cycle_rejected():
    with pytest.raises(CyclicGraphError):
        build_mdag(["1", "2"], directed=[("1", "2"), ("2", "1")])


def test_build_self_loop_rejected():
    with pytest.raises(CyclicGraphError):
        build_mdag(["1"], directed=[("1", "1")])


def test_fixed_vertex_cannot_have_parent():
    with pytest.raises(FixedVertexHasParentError):
        build_mdag(["1"], fixed=["w"], directed=[("1", "w")])


def test_bidirected_edge_too_small():
    with pytest.raises(BidirectedEdgeTooSmallError):
        build_mdag(["1", "2"], bidirected=[["1"]])


def test_bidirected_edge_over_fixed_rejected():
    with pytest.raises(FixedVertexHasParentError):
        build_mdag(["1"], fixed=["w"], bidirected=[["1", "w"]])


def test_strict_mode_rejects_nested_edges():
    with pytest.raises(BidirectedEdgeNotMaximalError):
        build_mdag(["1", "2", "3"], bidirected=[["1", "2"], ["1", "2", "3"]])


def test_normalize_mode_drops_dominated_edges():
    g = build_mdag(
        ["1", "2", "3"], bidirected=[["1", "2"], ["1", "2", "3"]], maximality="normalize"
    )
    assert g.bidirected_edges == (("1", "2", "3"),)


def test_unknown_vertex_in_edge():
    with pytest.raises(UnknownVertexError):
        build_mdag(["1"], directed=[("1", "9")])


def test_cardinality_below_two():
    with pytest.raises(CardinalityBelowTwoError):
        build_mdag(["1"], cards={"1": 1})


def test_rebuild_is_idempotent(fig3, fig4a, fig7a):
    for g in (fig3, fig4a, fig7a):
        again = build_mdag(
            g.random_vertices,
            g.fixed_vertices,
            g.directed_edges,
            g.bidirected_edges,
            g.cardinalities,
            maximality="normalize",
        )
        assert again == g


def test_parents_fig3(fig3):
    assert parents(fig3, ("2", "4")) == ("1", "3")
    assert parents(fig3, ()) == ()


def test_parents_fig4a(fig4a):
    assert parents(fig4a, ("4",)) == ("2", "3", "6")


def test_parents_unknown_vertex(fig3):
    with pytest.raises(UnknownVertexError):
        parents(fig3, ("9",))


def test_districts_fig3(fig3):
    assert districts(fig3) == [("1",), ("2", "4"), ("3",)]


def test_districts_no_bidirected_all_singletons():
    g = build_mdag(["1", "2", "3"], directed=[("1", "2")])
    assert districts(g) == [("1",), ("2",), ("3",)]


def test_districts_fig7a(fig7a):
    assert districts(fig7a) == [("1", "2", "3", "4")]


def test_districts_match_unionfind_oracle():
    rng = random.Random(11)
    for _ in range(30):
        g = random_mdag(rng, rng.randint(2, 6), n_bi=rng.randint(0, 3))
        ug = nx.Graph()
        ug.add_nodes_from(g.random_vertices)
        for e in g.bidirected_edges:
            for a, b in zip(e, e[1:]):
                ug.add_edge(a, b)
        oracle = sorted(tuple(sorted(c)) for c in nx.connected_components(ug))
        assert sorted(districts(g)) == oracle
        union = [v for d in districts(g) for v in d]
        assert sorted(union) == list(g.random_vertices)


def test_sterile_fig3(fig3):
    assert sterile(fig3, ("2", "4")) == ("2", "4")
    assert sterile(fig3, ("2", "3")) == ("3",)
    assert sterile(fig3, ()) == ()


def test_sterile_of_district_stays_inside(fig3, fig4a, fig7a):
    for g in (fig3, fig4a, fig7a):
        for d in districts(g):
            assert set(sterile(g, d)) <= set(d)


def test_district_subgraph_fig3_24(fig3):
    sub = district_subgraph(fig3, ("2", "4"))
    assert sub.random_vertices == ("2", "4")
    assert sub.fixed_vertices == ("1", "3")
    assert sub.directed_edges == frozenset({("1", "2"), ("3", "4")})
    assert sub.bidirected_edges == (("2", "4"),)


def test_district_subgraph_fig3_3(fig3):
    sub = district_subgraph(fig3, ("3",))
    assert sub.random_vertices == ("3",)
    assert sub.fixed_vertices == ("2",)
    assert sub.directed_edges == frozenset({("2", "3")})
    assert sub.bidirected_edges == ()


def test_district_subgraph_full_set_is_identity(fig3, fig7a):
    for g in (fig3, fig7a):
        assert district_subgraph(g, g.random_vertices) == g


def test_district_subgraph_single_district(fig3, fig4a, fig7a, fig9a):
    for g in (fig3, fig4a, fig7a, fig9a):
        for d in districts(g):
            assert districts(district_subgraph(g, d)) == [d]


def test_remove_childless_in_subgraph(fig3):
    sub = district_subgraph(fig3, ("2", "4"))
    smaller = remove_childless(sub, "2")
    assert smaller.random_vertices == ("4",)
    assert smaller.fixed_vertices == ("1", "3")
    assert smaller.directed_edges == frozenset({("3", "4")})
    assert smaller.bidirected_edges == ()


def test_remove_childless_singleton():
    g = build_mdag(["1"])
    assert remove_childless(g, "1").random_vertices == ()


def test_remove_childless_rejects_vertex_with_children(fig3):
    with pytest.raises(VertexHasChildrenError):
        remove_childless(fig3, "2")


def test_canonical_dag_fig4a(fig4a):
    dag = canonical_dag(fig4a)
    child_sets = sorted(edge for _, edge in dag.latent_labels)
    assert child_sets == [("1", "2"), ("2", "3", "4"), ("3", "4", "5")]
    latents = {name for name, _ in dag.latent_labels}
    # latents are parentless and their children are exactly the edge
    for name, edge in dag.latent_labels:
        assert not [a for a, b in dag.directed_edges if b == name]
        assert tuple(sorted(b for a, b in dag.directed_edges if a == name)) == edge
    assert latents <= set(dag.random_vertices)


def test_canonical_dag_without_bidirected_is_unchanged():
    g = build_mdag(["1", "2"], directed=[("1", "2")])
    dag = canonical_dag(g)
    assert dag.latent_labels == ()
    assert dag.random_vertices == ("1", "2")
    assert dag.directed_edges == g.directed_edges


def test_canonical_dag_fig8a(fig8a):
    dag = canonical_dag(fig8a)
    assert [edge for _, edge in dag.latent_labels] == [("2", "3")]


def test_canonical_dag_is_acyclic(fig4a, fig7a):
    for g in (fig4a, fig7a):
        dag = canonical_dag(g)
        nxg = nx.DiGraph(list(dag.directed_edges))
        nxg.add_nodes_from(dag.random_vertices)
        assert nx.is_directed_acyclic_graph(nxg)
