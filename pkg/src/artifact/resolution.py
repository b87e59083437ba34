"""Resolutions of a glued diagram, labelled objects and their gradings.

A resolution is indexed by a multidegree ``s`` with ``s_j`` between ``0`` and
``r_j``.  Box ``j`` is smoothed horizontally (``L1-R1``, ``L2-R2``) when
``s_j = 0`` and vertically (``L1-L2``, ``R1-R2``) otherwise, so the circle
structure only depends on the bit pattern of nonzero coordinates.  Circle
structures are cached per pattern.

An object is a resolution together with a label ``e_C`` in ``0..n-1`` (the
exponent of ``x``) on each circle.  Circles are ordered by their smallest
port id, and objects are ordered lexicographically by ``(multidegree,
labels)``.

Two grading conventions are supported:

``kh``
    ``q = sum_C (1 - 2 e_C) + sum_j h(s_j) - R + w + sum_j b_j r_j`` with
    ``h(s) = 2 s - sgn(s)`` and ``b_j`` the braid flag; reported homological
    degree ``i = t + (w - R) / 2``.
``sln``
    ``q = sum_C (1 - n + 2 e_C) + sum_j g(s_j) + n R`` where ``g`` is fixed by
    requiring every elementary step to preserve ``q``; reported homological
    degree ``i = t - R``.  In this convention a box of index ``r`` is read
    with the opposite crossing handedness to ``kh`` (the cube is built on
    the mirror diagram), which is the calibration under which the pretzel
    link ``P(-2,2,2)`` shows its ``CP^2`` summand in quantum degree ``-6``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .diagram import L1, L2, R1, R2, GluedDiagram

KH = "kh"
SLN = "sln"
MODES = (KH, SLN)

# step kinds for a single coordinate move s_j -> s_j + 1
SURGERY = "surgery"
PM = "pm"  # the x-multiplication step with two moduli points P, M
PK = "pk"  # the x^(n-1) step with points P_1..P_n


class ResolutionError(ValueError):
    """Raised for unsupported diagrams or parameters."""


@dataclass(frozen=True)
class Smoothing:
    """Circle structure of one smoothing pattern."""

    pattern: int
    circle_of: tuple[int, ...]
    count: int
    #: smoothing partner of each port inside its box
    inner: tuple[int, ...]


@dataclass(frozen=True, order=True, slots=True)
class FlowObject:
    """A labelled resolution; equality and order use multidegree and labels."""

    multidegree: tuple[int, ...]
    labels: tuple[int, ...]
    t: int = field(compare=False, default=0)
    q: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Transition:
    """How circles change when box ``j`` is re-smoothed.

    ``kind`` is ``"split"`` or ``"merge"``.  ``src`` are the involved circles
    before, ``dst`` the involved circles after; ``carry[b]`` is the circle
    before that becomes circle ``b`` after (``-1`` for involved circles).
    """

    kind: str
    src: tuple[int, ...]
    dst: tuple[int, ...]
    carry: tuple[int, ...]


def step_kind(r: int, a: int) -> str | None:
    """Kind of the move ``a -> a + 1`` in a box of index ``r`` (None if invalid)."""
    if r > 0:
        if not 0 <= a < r:
            return None
        if a == 0:
            return SURGERY
        return PM if a % 2 == 1 else PK
    if not r <= a < 0:
        return None
    if a == -1:
        return SURGERY
    return PM if a % 2 == 0 else PK


def kh_h(s: int) -> int:
    return 2 * s - (s > 0) + (s < 0)


def sln_g(s: int, r: int, n: int) -> int:
    """Per-box quantum shift in the sl_n convention."""
    g = 0
    if r > 0:
        for a in range(0, s):
            kind = step_kind(r, a)
            g -= (n - 1) if kind == SURGERY else (2 if kind == PM else 2 * (n - 1))
    else:
        for a in range(s, 0):
            kind = step_kind(r, a)
            g += (n - 1) if kind == SURGERY else (2 if kind == PM else 2 * (n - 1))
    return g


class ResolutionCube:
    """All resolutions of a diagram together with grading data."""

    def __init__(self, diagram: GluedDiagram, n: int = 2, mode: str = KH):
        if mode not in MODES:
            raise ResolutionError(f"unknown grading mode {mode!r}")
        if n < 2:
            raise ResolutionError("n must be at least 2")
        if mode == KH and n != 2:
            raise ResolutionError("the kh grading convention requires n = 2")
        if n > 2 and not diagram.matched:
            raise ResolutionError("n > 2 requires a matched diagram (all indices even, anti-braid orientation)")
        if mode == SLN:
            diagram = diagram.mirror()
        self.diagram = diagram
        self.n = n
        self.mode = mode
        self.indices = diagram.indices
        self.m = diagram.m
        self.partner = diagram.partner
        self._smoothings: dict[int, Smoothing] = {}
        self._transitions: dict[tuple[int, int], Transition] = {}
        w, R = diagram.writhe, diagram.R
        if mode == KH:
            self._const = -R + w + sum(r for r, t in zip(self.indices, diagram.tangles) if t.braid)
            self._box_q = [{s: kh_h(s) for s in self.coordinate_range(j)} for j in range(self.m)]
            if (w - R) % 2:
                raise ResolutionError("writhe and R have different parity")
            self.i_offset = (w - R) // 2
        else:
            self._const = n * R
            self._box_q = [{s: sln_g(s, r, n) for s in self.coordinate_range(j)} for j, r in enumerate(self.indices)]
            self.i_offset = -R

    # ------------------------------------------------------------ smoothings
    def coordinate_range(self, j: int) -> range:
        r = self.indices[j]
        return range(0, r + 1) if r > 0 else range(r, 1)

    @staticmethod
    def pattern_of(s: tuple[int, ...]) -> int:
        v = 0
        for j, a in enumerate(s):
            if a:
                v |= 1 << j
        return v

    def smoothing(self, pattern: int) -> Smoothing:
        sm = self._smoothings.get(pattern)
        if sm is not None:
            return sm
        nports = 4 * self.m
        inner = [0] * nports
        for j in range(self.m):
            b = 4 * j
            if pattern >> j & 1:
                pairs = ((L1, L2), (R1, R2))
            else:
                pairs = ((L1, R1), (L2, R2))
            for u, v in pairs:
                inner[b + u] = b + v
                inner[b + v] = b + u
        circle_of = [-1] * nports
        count = 0
        for start in range(nports):
            if circle_of[start] != -1:
                continue
            p = start
            while circle_of[p] == -1:
                circle_of[p] = count
                q = inner[p]
                circle_of[q] = count
                p = self.partner[q]
            count += 1
        sm = Smoothing(pattern, tuple(circle_of), count, tuple(inner))
        self._smoothings[pattern] = sm
        return sm

    def transition(self, pattern: int, j: int) -> Transition:
        key = (pattern, j)
        tr = self._transitions.get(key)
        if tr is not None:
            return tr
        a = self.smoothing(pattern)
        b = self.smoothing(pattern ^ (1 << j))
        ports = range(4 * j, 4 * j + 4)
        src = tuple(sorted({a.circle_of[p] for p in ports}))
        dst = tuple(sorted({b.circle_of[p] for p in ports}))
        if len(src) == 1 and len(dst) == 2:
            kind = "split"
        elif len(src) == 2 and len(dst) == 1:
            kind = "merge"
        else:
            raise ResolutionError("surgery neither splits nor merges; the diagram is not planar")
        carry = [-1] * b.count
        for p in range(4 * self.m):
            cb = b.circle_of[p]
            if cb not in dst:
                carry[cb] = a.circle_of[p]
        tr = Transition(kind, src, dst, tuple(carry))
        self._transitions[key] = tr
        return tr

    def traverse(self, pattern: int, circle: int) -> list[tuple[int, int]]:
        """Strands ``(entry port, exit port)`` of a circle in traversal order."""
        sm = self.smoothing(pattern)
        start = min(p for p in range(4 * self.m) if sm.circle_of[p] == circle)
        out = []
        p = start
        while True:
            q = sm.inner[p]
            out.append((p, q))
            p = self.partner[q]
            if p == start:
                return out

    # -------------------------------------------------------------- gradings
    def q_of(self, s: tuple[int, ...], labels: tuple[int, ...]) -> int:
        base = self._const + sum(self._box_q[j][a] for j, a in enumerate(s))
        if self.mode == KH:
            return base + sum(1 - 2 * e for e in labels)
        return base + sum(1 - self.n + 2 * e for e in labels)

    def make_object(self, s: tuple[int, ...], labels: tuple[int, ...]) -> FlowObject:
        return FlowObject(s, labels, sum(s), self.q_of(s, labels))

    def reported(self, obj: FlowObject) -> tuple[int, int]:
        """Reported (homological, quantum) bidegree."""
        return obj.t + self.i_offset, obj.q

    def multidegrees(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(self.coordinate_range(j) for j in range(self.m)))

    def _label_tuples(self, count: int, total: int) -> Iterator[tuple[int, ...]]:
        top = self.n - 1
        if total < 0 or total > top * count:
            return
        if count == 0:
            if total == 0:
                yield ()
            return
        for e in range(max(0, total - top * (count - 1)), min(top, total) + 1):
            for rest in self._label_tuples(count - 1, total - e):
                yield (e,) + rest

    def objects(self, q: int | None = None) -> list[FlowObject]:
        """All objects (of quantum grading ``q`` if given), sorted by id."""
        out = []
        n = self.n
        for s in self.multidegrees():
            sm = self.smoothing(self.pattern_of(s))
            c = sm.count
            t = sum(s)
            base = self._const + sum(self._box_q[j][a] for j, a in enumerate(s))
            if q is None:
                for labels in itertools.product(range(n), repeat=c):
                    out.append(FlowObject(s, labels, t, self.q_of(s, labels)))
                continue
            if self.mode == KH:
                num = c + base - q
            else:
                num = q - base - c * (1 - n)
            if num % 2:
                continue
            for labels in self._label_tuples(c, num // 2):
                out.append(FlowObject(s, labels, t, q))
        out.sort()
        return out

    def quantum_gradings(self) -> list[int]:
        """All quantum gradings carrying at least one object."""
        qs: set[int] = set()
        for s in self.multidegrees():
            c = self.smoothing(self.pattern_of(s)).count
            base = self._const + sum(self._box_q[j][a] for j, a in enumerate(s))
            for tot in range(0, (self.n - 1) * c + 1):
                if self.mode == KH:
                    qs.add(base + c - 2 * tot)
                else:
                    qs.add(base + c * (1 - self.n) + 2 * tot)
        return sorted(qs)

    def count_objects(self, q: int | None = None) -> int:
        """Number of objects (of quantum grading ``q``) without building them."""
        n = self.n
        comb: dict[tuple[int, int], int] = {}

        def tuples(count: int, total: int) -> int:
            key = (count, total)
            if key not in comb:
                if count == 0:
                    comb[key] = int(total == 0)
                else:
                    comb[key] = sum(tuples(count - 1, total - e) for e in range(0, min(n - 1, total) + 1))
            return comb[key]

        out = 0
        for s in self.multidegrees():
            c = self.smoothing(self.pattern_of(s)).count
            if q is None:
                out += n ** c
                continue
            base = self._const + sum(self._box_q[j][a] for j, a in enumerate(s))
            num = c + base - q if self.mode == KH else q - base - c * (1 - n)
            if num % 2 == 0 and num >= 0:
                out += tuples(c, num // 2)
        return out
