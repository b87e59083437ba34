"""The flow category of a glued diagram: signed points and framed intervals.

Moduli points between objects whose multidegrees differ by ``e_j`` follow
the partial order of labelled resolutions:

* surgery steps split (``y1 y2 = x^{n-1} z``) or merge (``y = z1 z2``) and
  give one point ``P``;
* the P/M step multiplies by ``x``: on a single circle it gives two points
  ``P``, ``M``; on two circles ``P`` multiplies the circle at ``R1`` and
  ``M`` the circle at ``L1``;
* the ``P_k`` step raises the total exponent by ``n - 1``: on a single
  circle (label ``1`` to ``x^{n-1}``) it gives ``n`` points ``P_1..P_n``; on
  two circles the point is ``P_{k+1}`` where ``k`` is the exponent increase
  on the circle at ``R1``.

One-dimensional moduli are intervals pairing the broken flows from ``x`` to
``z``; see :meth:`FlowCategory.intervals`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .diagram import L1, L2, R1, R2, GluedDiagram
from .resolution import KH, PK, PM, SURGERY, FlowObject, ResolutionCube, step_kind
from .sockcell import (
    N_CELL,
    NT_CELL,
    PHI_M,
    PHI_P,
    frame_product,
    frame_same,
    phi_name,
    sock_partner,
)

RIGHT = "right"
LEFT = "left"


class FlowCategoryError(RuntimeError):
    """A construction invariant was violated (indicates a bug)."""


@dataclass(frozen=True, slots=True)
class Edge:
    """All moduli points from ``source`` to ``target`` (one coordinate step)."""

    source: FlowObject
    target: FlowObject
    coord: int
    case: str
    points: tuple[tuple[int, int], ...]  # (phi, sign)

    @property
    def coefficient(self) -> int:
        return sum(-1 if s else 1 for _, s in self.points)


@dataclass(frozen=True, slots=True)
class ModuliPoint:
    source: FlowObject
    target: FlowObject
    coord: int
    case: str
    phi: int
    sign: int
    index: int


@dataclass(frozen=True, slots=True)
class BrokenFlow:
    """A point ``p`` of M(x, y) followed by a point ``q`` of M(y, z)."""

    lower: Edge
    p: int
    upper: Edge
    q: int

    @property
    def mid(self) -> FlowObject:
        return self.lower.target


@dataclass(frozen=True, slots=True)
class ModuliInterval:
    source: FlowObject
    target: FlowObject
    ends: tuple[BrokenFlow, BrokenFlow]
    cell: str
    frame: int


# side of the surgery arc relative to travel along a strand, per smoothing
_SIDE_H = {(L1, R1): RIGHT, (R1, L1): LEFT, (L2, R2): LEFT, (R2, L2): RIGHT}
_SIDE_V = {(L1, L2): LEFT, (L2, L1): RIGHT, (R1, R2): RIGHT, (R2, R1): LEFT}


class FlowCategory:
    """Flow category of a glued (n = 2) or matched (any n) diagram."""

    def __init__(self, diagram: GluedDiagram, n: int = 2, mode: str = KH, ladybug: str = RIGHT):
        if ladybug not in (RIGHT, LEFT):
            raise ValueError("ladybug convention must be 'right' or 'left'")
        self.cube = ResolutionCube(diagram, n, mode)
        self.diagram = diagram
        self.n = n
        self.mode = mode
        self.ladybug = ladybug
        self._up: dict[FlowObject, list[Edge]] = {}

    # --------------------------------------------------------------- objects
    def objects(self, q: int | None = None) -> list[FlowObject]:
        return self.cube.objects(q)

    def clear_cache(self) -> None:
        self._up.clear()

    # ------------------------------------------------------------- 0-moduli
    def up(self, x: FlowObject) -> list[Edge]:
        """All edges leaving ``x`` (sorted by target)."""
        cached = self._up.get(x)
        if cached is not None:
            return cached
        out = list(self._compute_up(x))
        out.sort(key=lambda e: e.target)
        for a, b in zip(out, out[1:]):
            if a.target == b.target:
                raise FlowCategoryError(f"two edges {x} -> {a.target}")
        self._up[x] = out
        return out

    def _compute_up(self, x: FlowObject) -> Iterable[Edge]:
        cube = self.cube
        n = self.n
        top = n - 1
        s = x.multidegree
        labels = x.labels
        pattern = cube.pattern_of(s)
        sm = cube.smoothing(pattern)
        prefix = 0
        for j, r in enumerate(cube.indices):
            a = s[j]
            kind = step_kind(r, a)
            pre = prefix
            prefix = (prefix + a) & 1
            if kind is None:
                continue
            s2 = s[:j] + (a + 1,) + s[j + 1:]
            t2 = x.t + 1

            def obj(lab: list[int] | tuple[int, ...]) -> FlowObject:
                return FlowObject(s2, tuple(lab), t2, x.q)

            if kind == SURGERY:
                tr = cube.transition(pattern, j)
                new = [labels[c] if c >= 0 else 0 for c in tr.carry]
                if tr.kind == "merge":
                    e = labels[tr.src[0]] + labels[tr.src[1]]
                    if e <= top:
                        new[tr.dst[0]] = e
                        yield Edge(x, obj(new), j, "2b", ((PHI_P, pre),))
                else:
                    e = labels[tr.src[0]]
                    for k in range(n):
                        k2 = top + e - k
                        if 0 <= k2 <= top:
                            new[tr.dst[0]] = k
                            new[tr.dst[1]] = k2
                            yield Edge(x, obj(new), j, "2a", ((PHI_P, pre),))
                continue
            cl = sm.circle_of[4 * j + L1]
            cr = sm.circle_of[4 * j + R1]
            if kind == PM:
                if cl == cr:
                    if labels[cl] + 1 <= top:
                        new = list(labels)
                        new[cl] += 1
                        yield Edge(x, obj(new), j, "1a", ((PHI_P, pre), (PHI_M, pre ^ 1)))
                else:
                    if labels[cr] + 1 <= top:
                        new = list(labels)
                        new[cr] += 1
                        yield Edge(x, obj(new), j, "1c", ((PHI_P, pre),))
                    if labels[cl] + 1 <= top:
                        new = list(labels)
                        new[cl] += 1
                        yield Edge(x, obj(new), j, "1c", ((PHI_M, pre ^ 1),))
            else:
                if cl == cr:
                    if labels[cl] == 0:
                        new = list(labels)
                        new[cl] = top
                        yield Edge(x, obj(new), j, "1b", tuple((k, pre) for k in range(1, n + 1)))
                else:
                    for k in range(n):
                        er = labels[cr] + k
                        el = labels[cl] + top - k
                        if er <= top and el <= top:
                            new = list(labels)
                            new[cr] = er
                            new[cl] = el
                            yield Edge(x, obj(new), j, "1d", ((k + 1, pre),))

    def zero_dim_moduli(self, x: FlowObject, y: FlowObject) -> list[ModuliPoint]:
        for e in self.up(x):
            if e.target == y:
                return [ModuliPoint(x, y, e.coord, e.case, phi, sg, i) for i, (phi, sg) in enumerate(e.points)]
        return []

    # --------------------------------------------------------- differential
    def differential(self, sources: list[FlowObject], targets: list[FlowObject]) -> list[dict[int, int]]:
        """Integer coboundary as columns: ``cols[a][b]`` = coefficient of target b in δ(source a)."""
        index = {y: b for b, y in enumerate(targets)}
        cols = []
        for x in sources:
            col = {}
            for e in self.up(x):
                c = e.coefficient
                if c:
                    b = index.get(e.target)
                    if b is None:
                        raise FlowCategoryError(f"target {e.target} of {x} missing from basis")
                    col[b] = c
            cols.append(col)
        return cols

    # ------------------------------------------------------------- 1-moduli
    def broken_flows(self, x: FlowObject) -> dict[FlowObject, list[BrokenFlow]]:
        """Broken flows from ``x`` grouped by their final object."""
        out: dict[FlowObject, list[BrokenFlow]] = defaultdict(list)
        for e1 in self.up(x):
            for e2 in self.up(e1.target):
                for p in range(len(e1.points)):
                    for q in range(len(e2.points)):
                        out[e2.target].append(BrokenFlow(e1, p, e2, q))
        return out

    def intervals(self, x: FlowObject, z: FlowObject | None = None) -> dict[FlowObject, list[ModuliInterval]]:
        """Interval components of M(x, z), for one ``z`` or all ``z``."""
        flows = self.broken_flows(x)
        if z is not None:
            flows = {z: flows.get(z, [])}
        return {zz: self.pair_flows(x, zz, fl) for zz, fl in flows.items() if fl}

    def one_dim_moduli(self, x: FlowObject, z: FlowObject) -> list[ModuliInterval]:
        return self.intervals(x, z).get(z, [])

    def pair_flows(self, x: FlowObject, z: FlowObject, flows: list[BrokenFlow]) -> list[ModuliInterval]:
        coords = {(f.lower.coord, f.upper.coord) for f in flows}
        j = min(min(c) for c in coords)
        i = max(max(c) for c in coords)
        if j == i:
            return self._pair_same(x, z, j, flows)
        if self._is_ladybug(x, j, i):
            return self._pair_ladybug(x, z, j, i, flows)
        return self._pair_distinct(x, z, j, i, flows)

    def _phis(self, f: BrokenFlow) -> tuple[int, int]:
        return f.lower.points[f.p][0], f.upper.points[f.q][0]

    def _pair_distinct(self, x, z, j, i, flows) -> list[ModuliInterval]:
        first_j: dict[tuple[int, int], BrokenFlow] = {}
        first_i: dict[tuple[int, int], BrokenFlow] = {}
        for f in flows:
            lo, up = self._phis(f)
            if f.lower.coord == j:
                key, table = (lo, up), first_j
            else:
                key, table = (up, lo), first_i
            if key in table:
                raise FlowCategoryError(f"ambiguous breaking {x} -> {z} with labels {key}")
            table[key] = f
        if first_j.keys() != first_i.keys():
            raise FlowCategoryError(f"unpaired broken flow from {x} to {z}")
        out = []
        for key in sorted(first_j):
            fr = frame_product(x.multidegree, self.cube.indices, j, key[0], i, key[1])
            cell = f"({phi_name(key[0])}^{j},{phi_name(key[1])}^{i})"
            out.append(ModuliInterval(x, z, (first_j[key], first_i[key]), cell, fr))
        return out

    def _pair_same(self, x, z, j, flows) -> list[ModuliInterval]:
        table: dict[tuple[int, int], BrokenFlow] = {}
        for f in flows:
            key = self._phis(f)
            if key in table:
                raise FlowCategoryError(f"ambiguous same-coordinate breaking {x} -> {z}")
            table[key] = f
        f0 = flows[0]
        lower_kind = step_kind(self.cube.indices[j], x.multidegree[j])
        upper_kind = step_kind(self.cube.indices[j], x.multidegree[j] + 1)
        kind = N_CELL if lower_kind == PM else NT_CELL
        frame = frame_same(x.multidegree, j, kind)
        out = []
        done = set()
        for key in sorted(table):
            if key in done:
                continue
            partner = sock_partner(kind, key[0], key[1], self.n,
                                   lower_surgery=lower_kind == SURGERY, upper_surgery=upper_kind == SURGERY)
            if partner is None:
                raise FlowCategoryError(f"broken flow {x} -> {z} covers a discarded sock interval")
            other = table.get(partner)
            if other is None:
                raise FlowCategoryError(f"unpaired broken flow {x} -> {z} with labels {key}")
            done.add(key)
            done.add(partner)
            cell = f"{kind}^{j}"
            out.append(ModuliInterval(x, z, (table[key], other), cell, frame))
        del f0
        return out

    # -------------------------------------------------------------- ladybug
    def _is_ladybug(self, x: FlowObject, j: int, i: int) -> bool:
        cube = self.cube
        s = x.multidegree
        if step_kind(cube.indices[j], s[j]) != SURGERY or step_kind(cube.indices[i], s[i]) != SURGERY:
            return False
        v = cube.pattern_of(s)
        tj, ti = cube.transition(v, j), cube.transition(v, i)
        if tj.kind != "split" or ti.kind != "split" or tj.src != ti.src:
            return False
        return cube.smoothing(v ^ (1 << j) ^ (1 << i)).count == cube.smoothing(v).count

    def ladybug_pairs(self, x: FlowObject, j: int, i: int) -> list[tuple[int, int]]:
        """Circle identification between the two middle resolutions.

        Returns pairs ``(circle after surgery j, circle after surgery i)``
        for the chosen (right or left) pair of arcs.
        """
        cube = self.cube
        if not self._is_ladybug(x, j, i):
            raise FlowCategoryError("not a ladybug configuration")
        v = cube.pattern_of(x.multidegree)
        sm = cube.smoothing(v)
        circle = sm.circle_of[4 * j + L1]
        strands = cube.traverse(v, circle)
        # orient so that arc j lies on the left of the travel direction
        first_j = next(st for st in strands if st[0] // 4 == j)
        table = _SIDE_V if v >> j & 1 else _SIDE_H
        if table[(first_j[0] % 4, first_j[1] % 4)] == RIGHT:
            strands = [(b, a) for a, b in reversed(strands)]
        # interleaved arcs lie on opposite sides of the circle
        table_i = _SIDE_V if v >> i & 1 else _SIDE_H
        for st in strands:
            if st[0] // 4 == j and table[(st[0] % 4, st[1] % 4)] != LEFT:
                raise FlowCategoryError("surgery arc is not on one side of its circle")
            if st[0] // 4 == i and table_i[(st[0] % 4, st[1] % 4)] != RIGHT:
                raise FlowCategoryError("ladybug arcs lie on the same side of the circle")
        # endpoints around the circle: each strand in box j or i carries one
        ends = [(st, st[0] // 4) for st in strands if st[0] // 4 in (j, i)]
        if len(ends) != 4 or [b for _, b in ends].count(j) != 2:
            raise FlowCategoryError("ladybug circle does not meet both boxes twice")
        mid_j = cube.smoothing(v ^ (1 << j))
        mid_i = cube.smoothing(v ^ (1 << i))
        want_from = i if self.ladybug == RIGHT else j
        pairs = []
        for k in range(4):
            st, box = ends[k]
            nst, nbox = ends[(k + 1) % 4]
            if box != want_from or nbox == box:
                continue
            exit_port, entry_port = st[1], nst[0]
            if box == i:
                pi, pj = exit_port, entry_port
            else:
                pj, pi = exit_port, entry_port
            pairs.append((mid_j.circle_of[pi], mid_i.circle_of[pj]))
        if len(pairs) != 2 or pairs[0][0] == pairs[1][0] or pairs[0][1] == pairs[1][1]:
            raise FlowCategoryError("ladybug identification is not a bijection")
        return pairs

    def _pair_ladybug(self, x, z, j, i, flows) -> list[ModuliInterval]:
        pairs = self.ladybug_pairs(x, j, i)
        jfirst: dict[tuple[int, ...], BrokenFlow] = {}
        ifirst: dict[tuple[int, ...], BrokenFlow] = {}
        for f in flows:
            lab = f.mid.labels
            if f.lower.coord == j:
                key = tuple(lab[a] for a, _ in pairs)
                table = jfirst
            else:
                key = tuple(lab[b] for _, b in pairs)
                table = ifirst
            if key in table:
                raise FlowCategoryError("ambiguous ladybug breaking")
            table[key] = f
        if jfirst.keys() != ifirst.keys():
            raise FlowCategoryError(f"ladybug matching failed for {x} -> {z}")
        fr = frame_product(x.multidegree, self.cube.indices, j, PHI_P, i, PHI_P)
        return [ModuliInterval(x, z, (jfirst[k], ifirst[k]), f"(P^{j},P^{i})*", fr) for k in sorted(jfirst)]

    # ---------------------------------------------------------------- dump
    def dump(self, q: int) -> str:
        """TSV listing of objects, points and intervals in one quantum grading."""
        objs = self.objects(q)
        ids = {o: k for k, o in enumerate(objs)}
        lines = ["#objects", "id\tt\tmultidegree\tlabels"]
        for o in objs:
            lines.append(f"{ids[o]}\t{self.cube.reported(o)[0]}\t{list(o.multidegree)}\t{list(o.labels)}")
        lines += ["#points", "source\ttarget\tcoord\tcase\tphi\tsign"]
        for o in objs:
            for e in self.up(o):
                for phi, sg in e.points:
                    lines.append(f"{ids[o]}\t{ids[e.target]}\t{e.coord}\t{e.case}\t{phi_name(phi)}\t{sg}")
        lines += ["#intervals", "source\ttarget\tend1(mid,p,q)\tend2(mid,p,q)\tcell\tframe"]
        for o in objs:
            for zz, ivs in sorted(self.intervals(o).items()):
                for iv in ivs:
                    a, b = iv.ends
                    lines.append(
                        f"{ids[o]}\t{ids[zz]}\t{ids[a.mid]},{a.p},{a.q}\t{ids[b.mid]},{b.p},{b.q}\t{iv.cell}\t{iv.frame}"
                    )
        return "\n".join(lines) + "\n"
