"""The second Steenrod square of a framed flow category.

For a mod-2 cocycle ``c`` in degree ``i`` the cochain ``sq2(c)`` is computed
object by object in degree ``i + 2``:

1. for every ``y`` in degree ``i + 1`` the points of ``M(x, y)`` with ``x`` in
   the support of ``c`` are paired (a boundary matching); a pair with
   different signs is coherent, a pair with equal signs is incoherent and
   carries an orientation;
2. for every ``z`` in degree ``i + 2`` the broken flows ``x -> y -> z`` with
   ``x`` in the support are the vertices of a graph whose edges are the
   interval components of ``M(x, z)`` (Pontryagin-Thom arcs) and the
   matching pairs (with the same point of ``M(y, z)``); every vertex has
   degree two, so the graph is a union of framed circles;
3. a circle contributes ``1 + #(arcs with frame 1) + #(incoherent arrows
   agreeing with the traversal)`` mod 2.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field

from .flowcat import FlowCategory
from .homalg import Mod2Cohomology, QComplex


class SteenrodError(RuntimeError):
    """Raised when the circle assembly violates its invariants."""


@dataclass
class MatchingPolicy:
    """How boundary matchings are chosen.

    The default pairs points of opposite sign first (in id order) and
    orients incoherent pairs from the lower to the higher id.  With ``rng``
    set, pairings and orientations are random; ``id_perm`` relabels object
    ids before the deterministic rule is applied.
    """

    rng: random.Random | None = None
    random_orientation: bool = False
    id_perm: dict[int, int] | None = None


@dataclass(frozen=True)
class MatchedPair:
    first: tuple[int, int]  # (source generator, point index)
    second: tuple[int, int]
    coherent: bool


@dataclass
class FramedCircle:
    """A circle of broken flows; ``edges`` alternate arcs and matching pairs."""

    z: int
    vertices: list[tuple[int, int, int, int]] = field(default_factory=list)
    frame_sum: int = 0
    arrows_with: int = 0

    @property
    def value(self) -> int:
        return (1 + self.frame_sum + self.arrows_with) % 2


def _index(cx: QComplex) -> dict:
    idx = getattr(cx, "_index", None)
    if idx is None:
        idx = {o: g for g, o in enumerate(cx.objects)}
        cx._index = idx  # type: ignore[attr-defined]
    return idx


def build_matching(points: list[tuple[int, int, int]], policy: MatchingPolicy) -> list[MatchedPair]:
    """Pair the points ``(source id, point index, sign)`` above one object.

    Incoherent pairs are returned oriented ``first -> second``.
    """
    if len(points) % 2:
        raise SteenrodError("odd number of points: the cochain is not a cocycle")
    rng = policy.rng
    perm = policy.id_perm
    key = (lambda p: (perm[p[0]], p[1])) if perm else (lambda p: (p[0], p[1]))
    pts = sorted(points, key=key)
    pairs: list[tuple[tuple[int, int, int], tuple[int, int, int]]] = []
    if rng is not None:
        rng.shuffle(pts)
        pairs = [(pts[k], pts[k + 1]) for k in range(0, len(pts), 2)]
    else:
        plus = [p for p in pts if p[2] == 0]
        minus = [p for p in pts if p[2] == 1]
        k = min(len(plus), len(minus))
        pairs = list(zip(plus[:k], minus[:k]))
        rest = plus[k:] + minus[k:]
        pairs += [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]
    out = []
    for a, b in pairs:
        coherent = a[2] != b[2]
        if not coherent:
            if key(a) > key(b):
                a, b = b, a
            if policy.random_orientation and rng is not None and rng.random() < 0.5:
                a, b = b, a
        out.append(MatchedPair((a[0], a[1]), (b[0], b[1]), coherent))
    return out


def sq2_cochain(fc: FlowCategory, cx: QComplex, cocycle: set[int],
                policy: MatchingPolicy | None = None, circles: list | None = None) -> set[int]:
    """Cochain representative of ``Sq^2`` of the class of ``cocycle``."""
    policy = policy or MatchingPolicy()
    index = _index(cx)
    objs = cx.objects
    supp = sorted(cocycle)
    # points over each y
    over: dict = defaultdict(list)
    for g in supp:
        for e in fc.up(objs[g]):
            for p, (_, sg) in enumerate(e.points):
                over[e.target].append((g, p, sg))
    # matching: (y, g, p) -> (partner g', partner p', coherent, arrow out of this end)
    match: dict[tuple, tuple[int, int, bool, bool]] = {}
    for y in sorted(over):
        for pair in build_matching(over[y], policy):
            (g1, p1), (g2, p2) = pair.first, pair.second
            match[(y, g1, p1)] = (g2, p2, pair.coherent, True)
            match[(y, g2, p2)] = (g1, p1, pair.coherent, False)
    # Pontryagin-Thom arcs grouped by z
    arcs: dict = defaultdict(dict)
    for g in supp:
        for z, ivs in fc.intervals(objs[g]).items():
            for iv in ivs:
                a, b = iv.ends
                va = (g, a.mid, a.p, a.q)
                vb = (g, b.mid, b.p, b.q)
                table = arcs[z]
                if va in table or vb in table:
                    raise SteenrodError("broken flow on two arcs")
                table[va] = (vb, iv.frame)
                table[vb] = (va, iv.frame)
    result = set()
    for z in sorted(arcs):
        table = arcs[z]
        seen = set()
        total = 0
        for start in sorted(table, key=lambda v: (v[0], v[1], v[2], v[3])):
            if start in seen:
                continue
            circ = FramedCircle(index[z])
            v = start
            while True:
                seen.add(v)
                circ.vertices.append(v)
                w, fr = table[v]
                circ.frame_sum += fr
                seen.add(w)
                g, y, p, q = w
                entry = match.get((y, g, p))
                if entry is None:
                    raise SteenrodError("broken flow without a matching edge")
                g2, p2, coherent, outward = entry
                if not coherent and outward:
                    circ.arrows_with += 1
                v = (g2, y, p2, q)
                if v not in table:
                    raise SteenrodError("matching edge leaves the vertex set")
                if v == start:
                    break
            total += circ.value
            if circles is not None:
                circles.append(circ)
        if total % 2:
            result.add(index[z])
    return result


def sq2_matrix(fc: FlowCategory, cx: QComplex, h2: Mod2Cohomology, t: int,
               policy: MatchingPolicy | None = None, check: bool = False) -> list[list[int]]:
    """``Sq^2: H^t -> H^{t+2}`` as one row (target coordinates) per source class."""
    rows = []
    for rep in h2.reps.get(t, []):
        if not h2.dim(t + 2):
            rows.append([])
            continue
        c = sq2_cochain(fc, cx, rep, policy)
        if check and cx.coboundary_2(c):
            raise SteenrodError("sq2 cochain is not a cocycle")
        rows.append(h2.project(c, t + 2))
    return rows


def perturb_cocycle(cx: QComplex, rep: set[int], t: int, rng: random.Random) -> set[int]:
    """Add the coboundary of a random cochain of degree ``t - 1``."""
    lower = [g for g, d in enumerate(cx.degree) if d == t - 1]
    chosen = [g for g in lower if rng.random() < 0.5]
    return set(rep) ^ cx.coboundary_2(chosen)


@dataclass
class TrialReport:
    """Outcome of the choice-invariance trials for one degree."""

    t: int
    reference: list[list[int]]
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def invariance_trials(fc: FlowCategory, cx: QComplex, h2: Mod2Cohomology, t: int,
                      trials: int = 8, seed: int = 0, other: FlowCategory | None = None) -> TrialReport:
    """Recompute ``Sq^2: H^t -> H^{t+2}`` under random choices.

    Each trial perturbs the cocycle representatives, randomises the boundary
    matching and the orientations of incoherent pairs, and relabels object
    ids for the deterministic matching rule.  ``other`` (the same category
    with the opposite ladybug convention) is used on odd trials.  All
    results must equal the reference matrix.
    """
    reference = sq2_matrix(fc, cx, h2, t)
    report = TrialReport(t, reference)
    if not h2.dim(t + 2):
        return report
    rng = random.Random(seed)
    for k in range(trials):
        perm_ids = list(range(len(cx.objects)))
        rng.shuffle(perm_ids)
        policies = [
            MatchingPolicy(id_perm=dict(enumerate(perm_ids))),
            MatchingPolicy(rng=random.Random(rng.random()), random_orientation=True),
        ]
        cat = other if (other is not None and k % 2) else fc
        for policy in policies:
            rows = []
            for rep in h2.reps.get(t, []):
                c = perturb_cocycle(cx, rep, t, rng)
                s = sq2_cochain(cat, cx, c, policy)
                if cx.coboundary_2(s):
                    report.mismatches.append(f"trial {k}: sq2 cochain is not a cocycle")
                rows.append(h2.project(s, t + 2))
            if rows != reference:
                kind = "ladybug+" if cat is not fc else ""
                mode = "relabel" if policy.id_perm else "random matching"
                report.mismatches.append(f"trial {k} ({kind}{mode}): {rows} != {reference}")
    return report
