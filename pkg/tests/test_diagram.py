import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.diagram import (DiagramError, ElementaryTangle, GluedDiagram, diagram_from_dict,
                              gen_pretzel, gen_torus_braid, insert_capped_twist, jones_polynomial,
                              parse_diagram, refine_to_units, split_tangle, unknot_capped)

nonzero = st.integers(-4, 4).filter(lambda r: r != 0)


def test_tangle_index_must_be_nonzero():
    with pytest.raises(DiagramError):
        ElementaryTangle(0)


def test_round_trip_json(p233):
    again = parse_diagram(p233.to_json())
    assert again.indices == p233.indices
    assert again.partner == p233.partner
    assert again.stats() == p233.stats()


def test_dangling_port_rejected():
    data = json.loads(gen_pretzel([-2, 3, 3]).to_json())
    data["connections"].pop()
    with pytest.raises(DiagramError, match="dangling"):
        diagram_from_dict(data)


def test_stats_of_standard_examples(p233, p222):
    assert p233.stats().writhe == 8 and p233.R == 4 and not p233.matched
    assert p233.stats().component_count == 1
    assert p222.matched and p222.stats().component_count == 3
    t45 = gen_torus_braid(4, 5)
    assert t45.m == 15 and all(abs(r) == 1 for r in t45.indices)
    assert t45.stats().component_count == 1 and t45.writhe == 15


def test_planarity(p233):
    assert p233.is_planar() and gen_torus_braid(3, 4).is_planar()


def test_mirror_negates_indices_and_writhe(p233):
    m = p233.mirror()
    assert m.indices == tuple(-r for r in p233.indices)
    assert m.writhe == -p233.writhe


def test_jones_trefoil_and_unknot(trefoil):
    assert jones_polynomial(trefoil) == {1: 1, 3: 1, 5: 1, 9: -1}
    for r in (1, 2, -3):
        assert jones_polynomial(unknot_capped(r)) == {-1: 1, 1: 1}


def test_jones_mirror_is_q_inverse(trefoil):
    j = jones_polynomial(trefoil)
    assert jones_polynomial(trefoil.mirror()) == {-k: v for k, v in j.items()}


@settings(max_examples=25, deadline=None)
@given(st.lists(nonzero, min_size=2, max_size=4))
def test_refine_and_split_preserve_jones(indices):
    D = gen_pretzel(indices)
    j = jones_polynomial(D)
    assert jones_polynomial(refine_to_units(D)) == j
    t = next((k for k, r in enumerate(indices) if abs(r) >= 2), None)
    if t is not None:
        r = indices[t]
        assert jones_polynomial(split_tangle(D, t, r // abs(r))) == j
        assert jones_polynomial(split_tangle(D, t, r + (2 if r > 0 else -2))) == j


@settings(max_examples=15, deadline=None)
@given(st.lists(nonzero, min_size=2, max_size=3), st.integers(0, 11), st.sampled_from([2, -2, 1, -1]))
def test_capped_twist_preserves_jones(indices, port, r):
    D = gen_pretzel(indices)
    E = insert_capped_twist(D, port % (4 * D.m), r)
    assert E.is_planar()
    assert jones_polynomial(E) == jones_polynomial(D)


def test_build_rejects_double_port():
    with pytest.raises(DiagramError):
        GluedDiagram.build([ElementaryTangle(1)], [(0, 1), (1, 2), (2, 3)])
