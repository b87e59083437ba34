import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.sockcell import (N_CELL, NT_CELL, PHI_M, PHI_P, SignFrame, check_coboundaries, is_discarded, product_cells,
                               sock_cells, sock_partner)

nonzero = st.integers(-5, 5).filter(lambda r: r != 0)


@pytest.mark.parametrize("r", [(1, 1), (-2,), (3, -2), (-2, 3, 3), (2, -2, 2), (1, 1, -1, 1)])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_coboundary_oracle(r, n):
    rep = check_coboundaries(r, n)
    assert rep.ok, rep.failures[:3]
    assert rep.checked_2cells > 0


@settings(max_examples=30, deadline=None)
@given(st.lists(nonzero, min_size=1, max_size=3), st.integers(2, 4))
def test_coboundary_oracle_random(r, n):
    rep = check_coboundaries(tuple(r), n)
    assert rep.ok, rep.failures[:3]


def test_mutated_frame_is_detected():
    r = (3, -2)
    cell = product_cells(r, 2, 2)[0]
    rep = check_coboundaries(r, 2, SignFrame(r, frame_flip=cell))
    assert not rep.ok


def test_sock_cells_shape():
    cells = sock_cells(4, 3)
    assert len(cells[0]) == 5
    # surgery edge plus P/M and the n points of the x^(n-1) steps
    assert {c.dim for d in cells.values() for c in d} <= {0, 1, 2, 3}


def test_partners_are_involutions():
    n = 4
    ks = range(1, n + 1)
    cases = [(N_CELL, (PHI_P, PHI_M), ks), (NT_CELL, ks, (PHI_P, PHI_M))]
    seen = 0
    for kind, lows, ups in cases:
        for lower in lows:
            for upper in ups:
                p = sock_partner(kind, lower, upper, n)
                if p is None:
                    assert is_discarded(kind, lower, upper, n)
                    continue
                assert sock_partner(kind, *p, n) == (lower, upper)
                seen += 1
    assert seen == 2 * 2 * (n - 1)
