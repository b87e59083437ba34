"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import pytest

from artifact.diagram import gen_pretzel, gen_torus_braid, unknot_capped
from artifact.flowcat import FlowCategory

#: lines "CRITERION k: PASS|FAIL|SKIP ..." collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def record(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split(":")[0].split()[-1].zfill(3)):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def p233():
    return gen_pretzel([-2, 3, 3])


@pytest.fixture(scope="session")
def fc_p233(p233):
    return FlowCategory(p233, 2, "kh")


@pytest.fixture(scope="session")
def p222():
    return gen_pretzel([-2, 2, 2])


@pytest.fixture(scope="session")
def trefoil():
    return gen_torus_braid(2, 3)


SMALL_KH = {
    "trefoil": lambda: gen_torus_braid(2, 3),
    "P(-2,3,3)": lambda: gen_pretzel([-2, 3, 3]),
    "T(3,4)": lambda: gen_torus_braid(3, 4),
    "P(-2,2,2)": lambda: gen_pretzel([-2, 2, 2]),
    "P(-3,5,2,-1)": lambda: gen_pretzel([-3, 5, 2, -1]),
    "unknot": lambda: unknot_capped(3),
}

SMALL_SLN = {
    "P(-2,2,2)": lambda: gen_pretzel([-2, 2, 2]),
    "P(4,-2,2)": lambda: gen_pretzel([4, -2, 2]),
    "U2": lambda: unknot_capped(2),
}


def invariants(D, n: int = 2, mode: str | None = None, steenrod: bool = True) -> dict:
    """Reported invariants: groups and Sq^2 ranks per quantum grading."""
    from artifact.classify import bucket_report

    mode = mode or ("kh" if n == 2 else "sln")
    fc = FlowCategory(D, n, mode)
    out = {}
    for q in fc.cube.quantum_gradings():
        rep = bucket_report(fc, q, steenrod=steenrod)
        groups = {d: (g.free, g.torsion) for d, g in rep.groups.items() if g.free or g.torsion}
        if groups:
            out[q] = (groups, rep.sq2_ranks() if steenrod else None)
        fc.clear_cache()
    return out
