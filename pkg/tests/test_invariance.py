"""Regrouping, unit refinement and capped twists leave reported invariants unchanged."""

import pytest

from artifact.diagram import gen_pretzel, gen_torus_braid, insert_capped_twist, refine_to_units, split_tangle

from conftest import invariants


@pytest.fixture(scope="module")
def kh_p233():
    return invariants(gen_pretzel([-2, 3, 3]))


@pytest.mark.parametrize("move", [
    lambda D: refine_to_units(D),
    lambda D: split_tangle(D, 1, 1),
    lambda D: split_tangle(D, 1, 5),      # 3 = 5 + (-2): extended Reidemeister II
    lambda D: split_tangle(D, 0, -4),     # -2 = -4 + 2
    lambda D: insert_capped_twist(D, 0, 1),
    lambda D: insert_capped_twist(D, 5, -1),
    lambda D: insert_capped_twist(D, 2, 2),   # extended Reidemeister I
    lambda D: insert_capped_twist(D, 7, -2),
], ids=["units", "split", "RII+", "RII-", "RI+", "RI-", "RI2+", "RI2-"])
def test_kh_moves(kh_p233, move):
    assert invariants(move(gen_pretzel([-2, 3, 3]))) == kh_p233


def test_kh_trefoil_units_and_kinks():
    D = gen_torus_braid(2, 3)
    base = invariants(D)
    assert invariants(split_tangle(refine_to_units(D), 0, 3)) == base
    assert invariants(insert_capped_twist(D, 1, 2)) == base


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("move", [
    lambda D: split_tangle(D, 0, 2),      # 4 = 2 + 2
    lambda D: split_tangle(D, 1, -4),     # -2 = -4 + 2: extended Reidemeister II
    lambda D: insert_capped_twist(D, 3, 2),
    lambda D: insert_capped_twist(D, 6, -2),
], ids=["split", "RII", "RI+", "RI-"])
def test_sln_moves(n, move):
    D = gen_pretzel([4, -2, 2])
    E = move(D)
    assert E.matched
    assert invariants(E, n) == invariants(D, n)
