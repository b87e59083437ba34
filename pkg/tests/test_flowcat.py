from collections import Counter

import pytest

from artifact.diagram import gen_pretzel, gen_torus_braid
from artifact.flowcat import FlowCategory
from artifact.homalg import build_complex

from conftest import SMALL_KH, SMALL_SLN


def _categories():
    for name, make in SMALL_KH.items():
        yield pytest.param(make, 2, "kh", id=f"{name}-kh")
    for name, make in SMALL_SLN.items():
        for n in (3, 4):
            yield pytest.param(make, n, "sln", id=f"{name}-sl{n}")


@pytest.mark.parametrize("make,n,mode", list(_categories()))
def test_d_squared_and_grading(make, n, mode):
    fc = FlowCategory(make(), n, mode)
    for q in fc.cube.quantum_gradings():
        cx = build_complex(fc, q)
        cx.check_d_squared()
        for x in cx.objects:
            for e in fc.up(x):
                assert e.target.q == x.q
                assert e.target.t == x.t + 1
                assert e.points


@pytest.mark.parametrize("make,n,mode", list(_categories())[:6])
def test_broken_flows_pair_up(make, n, mode):
    """Every broken flow is the end of exactly one interval."""
    fc = FlowCategory(make(), n, mode)
    for q in fc.cube.quantum_gradings():
        for x in fc.objects(q):
            flows = fc.broken_flows(x)
            ivs = fc.intervals(x)
            assert set(ivs) == {z for z, fl in flows.items() if fl}
            for z, fl in flows.items():
                ends = Counter()
                for iv in ivs.get(z, []):
                    for b in iv.ends:
                        ends[(b.mid, b.p, b.q)] += 1
                    assert iv.frame in (0, 1)
                assert sorted(ends) == sorted((f.mid, f.p, f.q) for f in fl)
                assert set(ends.values()) <= {1}


def test_ladybug_conventions_share_differential(p233):
    right = FlowCategory(p233, 2, "kh", "right")
    left = FlowCategory(p233, 2, "kh", "left")
    for q in right.cube.quantum_gradings():
        assert build_complex(right, q).out == build_complex(left, q).out


def test_ladybug_configurations_exist():
    fc = FlowCategory(gen_torus_braid(3, 4), 2, "kh")
    found = 0
    for x in fc.objects(11):
        for j in range(fc.cube.m):
            for i in range(j + 1, fc.cube.m):
                if fc._is_ladybug(x, j, i):
                    found += 1
                    pairs = fc.ladybug_pairs(x, j, i)
                    assert len(pairs) == 2
    assert found > 0


def test_dump_lists_every_object(fc_p233):
    text = fc_p233.dump(11)
    section = text.split("#points")[0].strip().splitlines()[2:]
    assert len(section) == 31


def test_sl3_capped_unknot():
    from artifact.classify import bucket_report
    from artifact.diagram import unknot_capped
    fc = FlowCategory(unknot_capped(2), 3, "sln")
    found = {}
    for q in fc.cube.quantum_gradings():
        rep = bucket_report(fc, q, steenrod=False)
        nz = {d: (g.free, g.torsion) for d, g in rep.groups.items() if g.free or g.torsion}
        if nz:
            found[q] = nz
    assert found == {-2: {0: (1, ())}, 0: {0: (1, ())}, 2: {0: (1, ())}}
