import itertools
import random

import pytest

from mdag import (
    build_mdag,
    district_subgraph,
    districts,
    intrinsic_sets,
    minimal_intrinsic_superset,
    model_dimension,
    parametrizable_sets,
    parents,
    sterile,
    verify_diffsets,
)
from mdag.errors import NotBidirectedConnectedError
from mdag.intrinsic import head_tail_dimension

from conftest import random_mdag


def _records_as_table(g):
    return {r.intrinsic_set: (r.head, r.tail) for r in intrinsic_sets(g)}


def test_intrinsic_fig3_table(fig3):
    table = _records_as_table(fig3)
    assert table == {
        ("1",): (("1",), ()),
        ("2",): (("2",), ("1",)),
        ("3",): (("3",), ("2",)),
        ("4",): (("4",), ("3",)),
        ("2", "4"): (("2", "4"), ("1", "3")),
    }


def test_intrinsic_single_vertex():
    g = build_mdag(["a", "b"], directed=[("a", "b")])
    table = _records_as_table(g)
    assert table[("b",)] == (("b",), ("a",))


def test_intrinsic_fig7a_heads(fig7a):
    heads = sorted(r.head for r in intrinsic_sets(fig7a))
    expected = sorted(
        [("1",), ("2",), ("1", "2"), ("3",), ("1", "3"), ("4",), ("2", "4"), ("3", "4")]
    )
    assert heads == expected


def test_intrinsic_fig8a(fig8a):
    table = _records_as_table(fig8a)
    assert table[("2", "3")] == (("3",), ("1", "2"))
    assert ("3",) not in table


def test_every_intrinsic_set_is_district_of_its_subgraph(fig3, fig4a, fig7a, fig9a):
    for g in (fig3, fig4a, fig7a, fig9a):
        for r in intrinsic_sets(g):
            assert districts(district_subgraph(g, r.intrinsic_set)) == [r.intrinsic_set]


def test_head_tail_disjoint_and_nonempty(fig3, fig4a, fig5a, fig7a, fig9a):
    for g in (fig3, fig4a, fig5a, fig7a, fig9a):
        for r in intrinsic_sets(g):
            assert r.head
            assert not set(r.head) & set(r.tail)
            assert r.head == sterile(g, r.intrinsic_set)
            assert set(r.tail) == set(parents(g, r.intrinsic_set)) - set(r.head)


def test_parametrizable_fig3(fig3):
    psets = parametrizable_sets(fig3)
    expected = {
        ("1",), ("2",), ("1", "2"), ("3",), ("2", "3"), ("4",), ("3", "4"),
        ("2", "4"), ("1", "2", "4"), ("2", "3", "4"), ("1", "2", "3", "4"),
    }
    assert set(psets.sets) == expected
    assert len(psets.sets) == 11


def test_parametrizable_fig7a_saturated(fig7a):
    psets = parametrizable_sets(fig7a)
    all_nonempty = set()
    for r in range(1, 5):
        all_nonempty.update(itertools.combinations(("1", "2", "3", "4"), r))
    assert set(psets.sets) == all_nonempty


def test_parametrizable_fig9a(fig9a):
    expected = {
        ("1",), ("2",), ("1", "2"), ("3",), ("2", "3"), ("1", "2", "3"),
        ("4",), ("1", "4"), ("1", "2", "4"), ("3", "4"), ("1", "3", "4"),
        ("2", "3", "4"), ("1", "2", "3", "4"),
    }
    assert set(parametrizable_sets(fig9a).sets) == expected


def test_parametrizable_witness_bounds(fig3, fig7a):
    for g in (fig3, fig7a):
        psets = parametrizable_sets(g)
        for s in psets.sets:
            h, t = psets.witness(s)
            assert set(h) <= set(s) <= set(h) | set(t)


def test_diffsets_witness_fig3(fig3):
    w = verify_diffsets(fig3, ("2", "3", "4"))
    assert w is not None
    assert set(w.connected_set) <= set(fig3.random_vertices)
    sym = set()
    for v, part in w.parts:
        assert v in part
        assert set(part) <= {v} | set(parents(fig3, (v,)))
        sym ^= set(part)
    assert sym == {"2", "3", "4"}


def test_diffsets_childless_singleton(fig3):
    w = verify_diffsets(fig3, ("4",))
    assert w is not None
    assert w.connected_set == ("4",)
    assert w.parts == (("4", ("4",)),)


def test_diffsets_refutation_fig3(fig3):
    assert verify_diffsets(fig3, ("1", "3")) is None


def test_diffsets_agrees_with_parametrizable_sets(fig3, fig7a, fig8a, fig9a):
    for g in (fig3, fig7a, fig8a, fig9a):
        members = set(parametrizable_sets(g).sets)
        vertices = g.random_vertices
        for r in range(1, len(vertices) + 1):
            for a in itertools.combinations(vertices, r):
                witness = verify_diffsets(g, a)
                assert (witness is not None) == (a in members), a


def test_diffsets_agrees_on_random_graphs():
    rng = random.Random(23)
    for _ in range(15):
        g = random_mdag(rng, rng.randint(2, 5), n_bi=rng.randint(0, 3))
        members = set(parametrizable_sets(g).sets)
        for r in range(1, len(g.random_vertices) + 1):
            for a in itertools.combinations(g.random_vertices, r):
                assert (verify_diffsets(g, a) is not None) == (a in members)


def test_minimal_intrinsic_superset_fig3(fig3):
    rec = minimal_intrinsic_superset(fig3, ("2", "4"))
    assert rec.intrinsic_set == ("2", "4")


def test_minimal_intrinsic_superset_fig4a(fig4a):
    rec = minimal_intrinsic_superset(fig4a, ("3", "4"))
    assert set(("3", "4")) <= set(rec.intrinsic_set)
    assert set(rec.head) <= set(sterile(fig4a, ("3", "4")))


def test_minimal_intrinsic_superset_singletons(fig3, fig7a):
    for g in (fig3, fig7a):
        for v in g.random_vertices:
            rec = minimal_intrinsic_superset(g, (v,))
            assert v in rec.intrinsic_set
            assert set(rec.head) <= set(sterile(g, (v,))) or v in rec.head


def test_minimal_intrinsic_superset_rejects_disconnected(fig3):
    with pytest.raises(NotBidirectedConnectedError):
        minimal_intrinsic_superset(fig3, ("1", "3"))


def test_minimal_intrinsic_superset_sterile_containment_random():
    rng = random.Random(5)
    for _ in range(20):
        g = random_mdag(rng, rng.randint(2, 5))
        from mdag import is_bidirected_connected

        verts = g.random_vertices
        for r in range(1, len(verts) + 1):
            for c in itertools.combinations(verts, r):
                if not is_bidirected_connected(g, c):
                    continue
                rec = minimal_intrinsic_superset(g, c)
                assert set(c) <= set(rec.intrinsic_set)
                assert set(rec.head) <= set(sterile(g, c))


def test_model_dimension_fig3(fig3):
    assert model_dimension(fig3) == 11


def test_model_dimension_fig7a(fig7a):
    assert model_dimension(fig7a) == 15


def test_model_dimension_single_vertex():
    for k in (2, 3, 5):
        g = build_mdag(["v"], cards={"v": k})
        assert model_dimension(g) == k - 1


def test_model_dimension_head_tail_form_agrees(fig3, fig4a, fig5a, fig7a, fig8a, fig9a):
    for g in (fig3, fig4a, fig5a, fig7a, fig8a, fig9a):
        assert model_dimension(g) == head_tail_dimension(g)


def test_dag_case_heads_are_singletons():
    g = build_mdag(
        ["1", "2", "3"], directed=[("1", "2"), ("2", "3"), ("1", "3")], cards={"1": 2, "2": 3, "3": 2}
    )
    recs = intrinsic_sets(g)
    assert all(len(r.intrinsic_set) == 1 for r in recs)
    for r in recs:
        (v,) = r.intrinsic_set
        assert r.head == (v,)
        assert r.tail == parents(g, (v,))
    # standard parameter count: sum_v (|X_v| - 1) * |X_pa(v)|
    expected = (2 - 1) * 1 + (3 - 1) * 2 + (2 - 1) * (2 * 3)
    assert model_dimension(g) == expected


def test_nonbinary_dimension_fig3_variant():
    g = build_mdag(
        ["1", "2", "3", "4"],
        directed=[("1", "2"), ("2", "3"), ("3", "4")],
        bidirected=[["2", "4"]],
        cards={"1": 2, "2": 3, "3": 2, "4": 2},
    )
    assert model_dimension(g) == head_tail_dimension(g)
