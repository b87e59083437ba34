import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.classify import (DETERMINED, INDETERMINATE, BucketReport, ClassifyError, chang, classify, moore,
                               sphere)
from artifact.homalg import Group


def report(groups, sq1=None, sq2=None, q=0):
    """Synthetic bucket: ``groups`` maps degree -> (free, torsion)."""
    gs = {d: Group(d, f, tuple(t)) for d, (f, t) in groups.items()}
    dims = {}
    for d in set(gs) | {d - 1 for d in gs}:
        g, up = gs.get(d), gs.get(d + 1)
        dims[d] = (g.free + len(g.two_torsion()) if g else 0) + (len(up.two_torsion()) if up else 0)
    return BucketReport(q, gs, dims, sq1 or {}, sq2 or {})


def test_sphere_and_moore_only():
    rep = report({0: (1, ()), 2: (1, (3,))})
    dec = classify(rep)
    assert dec.status == DETERMINED
    assert dec.summands == sorted([sphere(0), sphere(2), moore(3, 1)])


def test_cp2():
    dec = classify(report({0: (1, ()), 2: (1, ())}, sq2={0: [[1]]}))
    assert dec.names() == ["X(η,0)"]
    assert dec.ranks[0].as_tuple() == (1, 0, 0, 0)


def test_upper_to_free():
    # H^3 = Z/2, H^4 = Z; mod 2: degree 2 (upper), 3 (lower), 4 (free)
    dec = classify(report({3: (0, (2,)), 4: (1, ())}, sq1={2: [[1]], 3: [[0]]}, sq2={2: [[1]]}))
    assert dec.names() == ["X(_2η,2)"]


def test_free_to_lower_with_sphere():
    # H^5 = Z, H^6 = Z, H^7 = Z/2: degree 6 holds the free class and the upper class
    rep = report({5: (1, ()), 6: (1, ()), 7: (0, (2,))},
                 sq1={5: [[0, 0]], 6: [[0], [1]]}, sq2={5: [[1]]})
    dec = classify(rep)
    assert dec.status == DETERMINED
    assert sorted(dec.names()) == sorted(["X(η2,5)", "S^6"])


def test_upper_to_lower():
    rep = report({1: (0, (2,)), 2: (0, (2,))}, sq1={0: [[1]], 1: [[0, 1]]}, sq2={0: [[0, 1]]})
    # mod 2: degree 0 {u1}, degree 1 {l1, u2}, degree 2 {l2}
    rep.sq1 = {0: [[1, 0]], 1: [[0], [1]]}
    rep.sq2 = {0: [[1]]}
    dec = classify(rep)
    assert dec.names() == ["X(_2η2,0)"]


def test_free_to_z4():
    rep = report({7: (1, ()), 9: (0, (4,))}, sq2={7: [[1]]})
    dec = classify(rep)
    assert dec.names() == ["X(η4,7)"]


def test_bockstein_on_z4():
    # H^{-2} = Z, H^{-1} = Z/4: the degree -2 classes mix free and Z/4 types
    rep = report({-2: (1, ()), -1: (0, (4,)), 0: (1, ())}, sq2={-2: [[1], [0]]})
    dec = classify(rep)
    assert dec.status == INDETERMINATE
    assert "Bockstein on Z/4" in dec.reason


def test_eta_squared_gap_is_indeterminate():
    dec = classify(report({3: (1, ()), 4: (1, ()), 6: (1, ())}))
    assert dec.status == INDETERMINATE and "η²" in dec.reason


def test_eta_squared_absorbed_by_chang():
    rep = report({5: (1, ()), 7: (1, (2,)), 8: (1, ())}, sq1={6: [[0, 0]], 7: [[0], [0]]},
                 sq2={5: [[0, 1]]})
    # degree 7 basis: (free, lower); Sq^1 from the degree-6 upper class hits the lower class
    rep.sq1 = {6: [[0, 1]], 7: [[0], [0]]}
    dec = classify(rep)
    assert dec.status == DETERMINED
    assert sorted(dec.names()) == sorted(["X(η2,5)", "S^7", "S^8"])


def test_far_cells_indeterminate():
    dec = classify(report({0: (1, ()), 2: (1, ()), 4: (1, ())}, sq2={0: [[1]]}))
    assert dec.status == INDETERMINATE


def test_inconsistent_dims_rejected():
    rep = report({0: (1, ())})
    rep.dims[0] = 2
    with pytest.raises(ClassifyError):
        classify(rep)


def test_nonzero_sq2_on_sq1_image():
    # H^1 = Z/2 and H^3 = Z: Sq^2 on the lower class of degree 1
    rep = report({1: (0, (2,)), 3: (1, ())}, sq1={0: [[1]]}, sq2={1: [[1]]})
    dec = classify(rep)
    assert dec.status == INDETERMINATE


def _random_invertible(n, rng):
    while True:
        M = [[rng.randint(0, 1) for _ in range(n)] for _ in range(n)]
        # rank check over GF(2)
        rows = [sum(b << k for k, b in enumerate(r)) for r in M]
        piv = {}
        ok = True
        for v in rows:
            while v:
                h = v.bit_length() - 1
                if h not in piv:
                    piv[h] = v
                    break
                v ^= piv[h]
            if not v:
                ok = False
                break
        if ok:
            return M


def _inverse(M):
    n = len(M)
    A = [row[:] + [int(i == j) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(i for i in range(c, n) if A[i][c])
        A[c], A[p] = A[p], A[c]
        for i in range(n):
            if i != c and A[i][c]:
                A[i] = [(a + b) % 2 for a, b in zip(A[i], A[c])]
    return [row[n:] for row in A]


def _mul(A, B):
    if not A or not B:
        return [[0] * (len(B[0]) if B else 0) for _ in A]
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) % 2 for j in range(len(B[0]))] for i in range(len(A))]


def _change_basis(rep, rng):
    """Apply random invertible basis changes P_t in every degree.

    Rows are source classes, so a matrix S (rows over H^t, columns over
    H^{t+k}) becomes P_t S P_{t+k}^{-1}.
    """
    P = {t: _random_invertible(n, rng) for t, n in rep.dims.items() if n}
    Pinv = {t: _inverse(M) for t, M in P.items()}

    def conj(mats, k):
        out = {}
        for t, S in mats.items():
            if not S or not rep.dims.get(t + k):
                out[t] = S
                continue
            out[t] = _mul(_mul(P[t], S), Pinv[t + k])
        return out

    return BucketReport(rep.q, rep.groups, rep.dims, conj(rep.sq1, 1), conj(rep.sq2, 2))


CASES = [
    report({0: (1, ()), 2: (1, ())}, sq2={0: [[1]]}),
    report({3: (0, (2,)), 4: (1, ())}, sq1={2: [[1]], 3: [[0]]}, sq2={2: [[1]]}),
    report({5: (1, ()), 6: (1, ()), 7: (0, (2,))}, sq1={5: [[0, 0]], 6: [[0], [1]]}, sq2={5: [[1]]}),
    report({0: (2, ()), 2: (2, ())}, sq2={0: [[1, 0], [0, 0]]}),
    report({0: (2, ()), 1: (0, (2,)), 2: (1, ())}, sq1={0: [[0], [0], [1]], 1: [[0, 0]]},
           sq2={0: [[1], [0], [0]]}),
]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(range(len(CASES))), st.integers(0, 10**6))
def test_basis_shuffle_invariance(case, seed):
    rep = CASES[case]
    want = classify(rep)
    got = classify(_change_basis(rep, random.Random(seed)))
    assert got.status == want.status
    assert got.summands == want.summands
    assert {t: r.as_tuple() for t, r in got.ranks.items()} == {t: r.as_tuple() for t, r in want.ranks.items()}


def test_summand_cohomology_conventions():
    assert chang(2, upper=2).cohomology() == {3: (0, (2,)), 4: (1, ())}
    assert chang(5, lower=2).cohomology() == {5: (1, ()), 7: (0, (2,))}
    assert moore(4, 8).cohomology() == {9: (0, (4,))}
    assert chang(0).name == "X(η,0)" and chang(2, 2, 4).name == "X(_2η4,2)"
