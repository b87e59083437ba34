"""Glued link diagrams built from elementary twist tangles.

A glued diagram is a collection of elementary tangles, each a box with four
ports (``L1`` top-left, ``L2`` bottom-left, ``R1`` top-right, ``R2``
bottom-right) containing ``|r|`` horizontal half-twists, together with a
perfect pairing of all ports.  Ports are encoded as integers
``4 * tangle + k`` with ``k`` in ``L1=0, L2=1, R1=2, R2=3``.

Orientation is carried by the per-tangle ``braid`` flag: it is true iff both
strands through the box run in the same horizontal direction.  The flags
determine the orientation of every component up to a global flip of
components that never meet another component inside a box; a consistent
choice is solved for with a parity union-find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PORT_NAMES = ("L1", "L2", "R1", "R2")
L1, L2, R1, R2 = 0, 1, 2, 3
#: counter-clockwise cyclic order of the ports around a box
CCW_PORTS = (R1, L1, L2, R2)


class DiagramError(ValueError):
    """Raised for malformed or inconsistent diagram input."""


def port_id(tangle: int, name: str) -> int:
    return 4 * tangle + PORT_NAMES.index(name)


def port_label(port: int) -> str:
    return f"t{port // 4}.{PORT_NAMES[port % 4]}"


def internal_partner(port: int, r: int) -> int:
    """The port joined to ``port`` by a strand running through the tangle."""
    t, k = divmod(port, 4)
    if abs(r) % 2 == 0:
        other = {L1: R1, R1: L1, L2: R2, R2: L2}[k]
    else:
        other = {L1: R2, R2: L1, L2: R1, R1: L2}[k]
    return 4 * t + other


@dataclass(frozen=True)
class ElementaryTangle:
    """A box of ``|index|`` horizontal half-twists.

    ``braid`` records whether the two strands are oriented as a 2-braid.
    ``endpoint_choice`` is informational only (which side is called "L").
    """

    index: int
    braid: bool = False
    endpoint_choice: str = "L"

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index == 0:
            raise DiagramError(f"tangle index must be a nonzero integer, got {self.index!r}")

    @property
    def crossing_sign(self) -> int:
        """Sign of every crossing in the box (+1 or -1)."""
        return 1 if (self.index > 0) == self.braid else -1


@dataclass(frozen=True)
class DiagramStats:
    writhe: int
    R: int
    matched: bool
    component_count: int


@dataclass(frozen=True)
class GluedDiagram:
    tangles: tuple[ElementaryTangle, ...]
    partner: tuple[int, ...]
    name: str = ""
    #: for every port, True iff the oriented strand enters the box there
    entering: tuple[bool, ...] = field(default=(), compare=False)

    # ------------------------------------------------------------------ build
    @classmethod
    def build(
        cls,
        tangles: Sequence[ElementaryTangle],
        pairs: Iterable[tuple[int, int]],
        name: str = "",
    ) -> "GluedDiagram":
        tangles = tuple(tangles)
        if not tangles:
            raise DiagramError("diagram has no tangles")
        nports = 4 * len(tangles)
        partner = [-1] * nports
        for a, b in pairs:
            for p in (a, b):
                if not 0 <= p < nports:
                    raise DiagramError(f"port {p} out of range")
                if partner[p] != -1:
                    raise DiagramError(f"dangling/duplicated port {port_label(p)}")
            if a == b:
                raise DiagramError(f"dangling/duplicated port {port_label(a)} paired with itself")
            partner[a] = b
            partner[b] = a
        missing = [port_label(p) for p in range(nports) if partner[p] == -1]
        if missing:
            raise DiagramError(f"dangling/duplicated port(s): unpaired {', '.join(missing)}")
        diagram = cls(tangles, tuple(partner), name)
        entering = diagram._solve_orientation()
        object.__setattr__(diagram, "entering", entering)
        return diagram

    # ------------------------------------------------------------ structure
    @property
    def m(self) -> int:
        return len(self.tangles)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(t.index for t in self.tangles)

    def components(self) -> list[list[int]]:
        """Link components as port sequences in traversal order."""
        seen = [False] * (4 * self.m)
        comps = []
        for start in range(4 * self.m):
            if seen[start]:
                continue
            comp = []
            p = start
            while True:
                seen[p] = True
                comp.append(p)
                q = internal_partner(p, self.tangles[p // 4].index)
                seen[q] = True
                comp.append(q)
                p = self.partner[q]
                if p == start:
                    break
                if seen[p]:
                    raise DiagramError("strand tracing did not close up")
            comps.append(comp)
        return comps

    def _solve_orientation(self) -> tuple[bool, ...]:
        comps = self.components()
        comp_of = {}
        for ci, comp in enumerate(comps):
            for p in comp:
                comp_of[p] = ci
        # reference orientation: traverse each component in listed order;
        # the strand enters at even positions of the port sequence
        ref_enter = {}
        for comp in comps:
            for pos, p in enumerate(comp):
                ref_enter[p] = pos % 2 == 0
        parent = list(range(len(comps)))
        parity = [0] * len(comps)

        def find(x: int) -> tuple[int, int]:
            par = 0
            while parent[x] != x:
                par ^= parity[x]
                x = parent[x]
            return x, par

        for t, tangle in enumerate(self.tangles):
            # strand through L1 and strand through L2
            a, b = 4 * t + L1, 4 * t + L2
            # reference: is each strand entering on its L port?
            ea, eb = ref_enter[a], ref_enter[b]
            # flip_a ^ flip_b must make (ea^fa) == (eb^fb) iff braid
            need = (ea ^ eb) ^ (0 if tangle.braid else 1)
            ca, cb = comp_of[a], comp_of[b]
            ra, pa = find(ca)
            rb, pb = find(cb)
            if ra == rb:
                if pa ^ pb != need:
                    raise DiagramError(f"orientation conflict at tangle t{t}")
            else:
                parent[ra] = rb
                parity[ra] = pa ^ pb ^ need
        flips = [find(c)[1] for c in range(len(comps))]
        return tuple(ref_enter[p] ^ bool(flips[comp_of[p]]) for p in range(4 * self.m))

    # ---------------------------------------------------------------- stats
    @property
    def writhe(self) -> int:
        return sum(abs(t.index) * t.crossing_sign for t in self.tangles)

    @property
    def R(self) -> int:
        return sum(self.indices)

    @property
    def matched(self) -> bool:
        return all(t.index % 2 == 0 and not t.braid for t in self.tangles)

    def stats(self) -> DiagramStats:
        return DiagramStats(self.writhe, self.R, self.matched, len(self.components()))

    def is_planar(self) -> bool:
        """Euler-characteristic check of the ribbon graph given by the boxes."""
        nports = 4 * self.m
        succ = {}
        for i, k in enumerate(CCW_PORTS):
            succ[k] = CCW_PORTS[(i + 1) % 4]
        seen = [False] * nports
        faces = 0
        for start in range(nports):
            if seen[start]:
                continue
            faces += 1
            d = start
            while not seen[d]:
                seen[d] = True
                e = self.partner[d]
                d = 4 * (e // 4) + succ[e % 4]
        # connected components of the box graph
        parent = list(range(self.m))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for p in range(nports):
            a, b = find(p // 4), find(self.partner[p] // 4)
            parent[a] = b
        ncomp = len({find(t) for t in range(self.m)})
        return self.m - 2 * self.m + faces == 2 * ncomp

    # ------------------------------------------------------------ transforms
    def mirror(self) -> "GluedDiagram":
        tangles = [ElementaryTangle(-t.index, t.braid, t.endpoint_choice) for t in self.tangles]
        return GluedDiagram.build(tangles, self.pairs(), self.name + "*" if self.name else "")

    def pairs(self) -> list[tuple[int, int]]:
        return [(p, q) for p, q in enumerate(self.partner) if p < q]

    # ---------------------------------------------------------------- I/O
    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tangles": [{"r": t.index, "braid": t.braid} for t in self.tangles],
            "connections": [
                [[f"t{p // 4}", PORT_NAMES[p % 4]], [f"t{q // 4}", PORT_NAMES[q % 4]]]
                for p, q in self.pairs()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


# ---------------------------------------------------------------------------
# parsing


def _parse_port(obj, where: str, m: int) -> int:
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
        raise DiagramError(f"{where}: port must be a pair [\"t<i>\", \"L1|L2|R1|R2\"]")
    tname, pname = obj
    if not (isinstance(tname, str) and tname.startswith("t") and tname[1:].isdigit()):
        raise DiagramError(f"{where}: bad tangle reference {tname!r}")
    t = int(tname[1:])
    if t >= m:
        raise DiagramError(f"{where}: tangle {tname} does not exist")
    if pname not in PORT_NAMES:
        raise DiagramError(f"{where}: bad port name {pname!r}")
    return port_id(t, pname)


def diagram_from_dict(data: dict) -> GluedDiagram:
    if not isinstance(data, dict):
        raise DiagramError("diagram file must contain a JSON object")
    raw_tangles = data.get("tangles")
    if not isinstance(raw_tangles, list) or not raw_tangles:
        raise DiagramError("field 'tangles' must be a nonempty list")
    tangles = []
    for i, t in enumerate(raw_tangles):
        if not isinstance(t, dict) or "r" not in t:
            raise DiagramError(f"tangles[{i}]: expected object with field 'r'")
        r = t["r"]
        if isinstance(r, bool) or not isinstance(r, int) or r == 0:
            raise DiagramError(f"tangles[{i}]: 'r' must be a nonzero integer")
        braid = t.get("braid", False)
        if not isinstance(braid, bool):
            raise DiagramError(f"tangles[{i}]: 'braid' must be a boolean")
        tangles.append(ElementaryTangle(r, braid))
    conns = data.get("connections")
    if not isinstance(conns, list):
        raise DiagramError("field 'connections' must be a list")
    pairs = []
    for i, c in enumerate(conns):
        if not (isinstance(c, list) and len(c) == 2):
            raise DiagramError(f"connections[{i}]: expected a pair of ports")
        a = _parse_port(c[0], f"connections[{i}][0]", len(tangles))
        b = _parse_port(c[1], f"connections[{i}][1]", len(tangles))
        pairs.append((a, b))
    name = data.get("name", "")
    return GluedDiagram.build(tangles, pairs, str(name))


def parse_diagram(text: str) -> GluedDiagram:
    """Parse the JSON diagram format; raises :class:`DiagramError`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return diagram_from_dict(data)


# ---------------------------------------------------------------------------
# generators


def _auto_oriented(tangles: list[int], pairs: list[tuple[int, int]], name: str,
                   anti_braid: bool) -> GluedDiagram:
    """Build a diagram whose braid flags come from a canonical orientation.

    With ``anti_braid`` every box is declared anti-braid (the matched
    orientation); otherwise each component is oriented along its traversal
    starting from its smallest port and the flags are read off.
    """
    if anti_braid:
        return GluedDiagram.build([ElementaryTangle(r, False) for r in tangles], pairs, name)
    probe = GluedDiagram(tuple(ElementaryTangle(r) for r in tangles), _partner_tuple(len(tangles), pairs), name)
    enter = {}
    for comp in probe.components():
        for pos, p in enumerate(comp):
            enter[p] = pos % 2 == 0
    # a box is braid-like iff both strands enter on the same side
    flags = [enter[4 * t + L1] == enter[4 * t + L2] for t in range(len(tangles))]
    return GluedDiagram.build([ElementaryTangle(r, b) for r, b in zip(tangles, flags)], pairs, name)


def _partner_tuple(m: int, pairs: list[tuple[int, int]]) -> tuple[int, ...]:
    partner = [-1] * (4 * m)
    for a, b in pairs:
        partner[a] = b
        partner[b] = a
    return tuple(partner)


def gen_pretzel(indices: Sequence[int]) -> GluedDiagram:
    """Standard pretzel wiring: columns side by side, tops and bottoms chained.

    Each column is an elementary tangle turned a quarter turn clockwise, so
    that its top-left/top-right endpoints are ``L2``/``L1`` and its
    bottom-left/bottom-right endpoints are ``R2``/``R1``.
    """
    indices = [int(r) for r in indices]
    if not indices:
        raise DiagramError("pretzel needs at least one column")
    if any(r == 0 for r in indices):
        raise DiagramError("pretzel indices must be nonzero")
    m = len(indices)
    pairs = []
    for i in range(m):
        j = (i + 1) % m
        pairs.append((port_id(i, "L1"), port_id(j, "L2")))  # top chain
        pairs.append((port_id(i, "R1"), port_id(j, "R2")))  # bottom chain
    name = "P(" + ",".join(str(r) for r in indices) + ")"
    return _auto_oriented(indices, pairs, name, anti_braid=all(r % 2 == 0 for r in indices))


def gen_torus_braid(strands: int, word_power: int) -> GluedDiagram:
    """Closure of ``(s_1 ... s_{k-1})^p`` with one unit tangle per generator."""
    if strands < 2:
        raise DiagramError("need at least two strands")
    if word_power < 1:
        raise DiagramError("word power must be positive")
    word = list(range(strands - 1)) * word_power
    ends: list[int] = [-1] * strands
    starts: list[int] = [-1] * strands
    pairs = []
    for t, g in enumerate(word):
        for pos, port in ((g, L1), (g + 1, L2)):
            p = 4 * t + port
            if ends[pos] == -1:
                starts[pos] = p
            else:
                pairs.append((ends[pos], p))
        ends[g] = 4 * t + R1
        ends[g + 1] = 4 * t + R2
    for pos in range(strands):
        pairs.append((ends[pos], starts[pos]))
    tangles = [ElementaryTangle(1, True) for _ in word]
    return GluedDiagram.build(tangles, pairs, f"T({strands},{word_power})")


def refine_to_units(D: GluedDiagram) -> GluedDiagram:
    """Split every tangle into ``|r|`` unit tangles placed in series."""
    tangles: list[ElementaryTangle] = []
    first: list[int] = []
    last: list[int] = []
    pairs = []
    for t in D.tangles:
        sgn = 1 if t.index > 0 else -1
        first.append(len(tangles))
        for k in range(abs(t.index)):
            idx = len(tangles)
            tangles.append(ElementaryTangle(sgn, t.braid, t.endpoint_choice))
            if k > 0:
                pairs.append((4 * (idx - 1) + R1, 4 * idx + L1))
                pairs.append((4 * (idx - 1) + R2, 4 * idx + L2))
        last.append(len(tangles) - 1)

    def remap(p: int) -> int:
        t, k = divmod(p, 4)
        return 4 * (first[t] if k in (L1, L2) else last[t]) + k

    for p, q in D.pairs():
        pairs.append((remap(p), remap(q)))
    name = D.name + "[units]" if D.name else ""
    return GluedDiagram.build(tangles, pairs, name)


def split_tangle(D: GluedDiagram, t: int, first_index: int) -> GluedDiagram:
    """Replace tangle ``t`` by two tangles in series with indices
    ``first_index`` and ``r_t - first_index`` (a regrouping of the same
    link diagram up to planar isotopy and Reidemeister II moves)."""
    r = D.tangles[t].index
    second = r - first_index
    if first_index == 0 or second == 0:
        raise DiagramError("both pieces must have nonzero index")
    old = D.tangles[t]
    tangles = list(D.tangles)
    tangles[t] = ElementaryTangle(first_index, old.braid)
    new = len(tangles)
    tangles.append(ElementaryTangle(second, old.braid))
    pairs = []
    for p, q in D.pairs():
        pairs.append(tuple(4 * new + (x % 4) if (x // 4 == t and x % 4 in (R1, R2)) else x for x in (p, q)))
    # series composition: twists add up regardless of parity
    pairs += [(4 * t + R1, 4 * new + L1), (4 * t + R2, 4 * new + L2)]
    return GluedDiagram.build(tangles, pairs, D.name + "[split]" if D.name else "")


def insert_capped_twist(D: GluedDiagram, port: int, r: int = 2) -> GluedDiagram:
    """Splice an index-``r`` tangle, capped on its right side, into the
    connection at ``port``.

    The strand leaving ``port`` enters the new box at ``L1``, runs through
    the twists, turns around the cap and leaves at ``L2``.  For ``r = 2`` this
    is the extended Reidemeister I configuration; removing the box recovers
    ``D``.
    """
    if not 0 <= port < 4 * D.m:
        raise DiagramError(f"port {port} out of range")
    other = D.partner[port]
    new = D.m
    tangles = list(D.tangles) + [ElementaryTangle(r, False)]
    pairs = [(p, q) for p, q in D.pairs() if port not in (p, q)]
    pairs += [(port, 4 * new + L1), (4 * new + L2, other), (4 * new + R1, 4 * new + R2)]
    return GluedDiagram.build(tangles, pairs, D.name + "[kink]" if D.name else "")


def unknot_capped(r: int = 2) -> GluedDiagram:
    """One tangle of index ``r`` capped on both sides."""
    pairs = [(L1, L2), (R1, R2)]
    braid = False
    return GluedDiagram.build([ElementaryTangle(r, braid)], pairs, f"U{r}")


# ------------------------------------------------------------------ Jones oracle
def _poly_mul(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def _poly_add(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def _twist_bracket(r: int) -> tuple[dict[int, int], dict[int, int]]:
    """Bracket of a box as ``a * <horizontal> + b * <vertical>``.

    A single crossing of a box with positive index has its A-smoothing
    horizontal; ``<X> = <A> - q <B>``.  Two vertical smoothings in series
    close off a circle worth ``q + 1/q``.
    """
    one, mq, delta = {0: 1}, {1: -1}, {1: 1, -1: 1}
    if r > 0:
        a, b = one, mq  # H - qV
        for _ in range(r - 1):
            # (H + bV)(H - qV) = H + (b (1 - q delta) - q) V
            b = _poly_add(_poly_mul(b, _poly_add(one, _poly_mul(mq, delta))), mq)
        return a, b
    a, b = mq, one  # V - qH
    for _ in range(-r - 1):
        # (aH + bV)(V - qH) = -q a H + (a - q b + delta b) V
        a, b = _poly_mul(a, mq), _poly_add(a, _poly_add(_poly_mul(b, mq), _poly_mul(b, delta)))
    return a, b


def _circle_count(D: GluedDiagram, vertical: int) -> int:
    inner = [0] * (4 * D.m)
    for j in range(D.m):
        b = 4 * j
        pairs = ((L1, L2), (R1, R2)) if vertical >> j & 1 else ((L1, R1), (L2, R2))
        for u, v in pairs:
            inner[b + u], inner[b + v] = b + v, b + u
    seen = [False] * (4 * D.m)
    count = 0
    for start in range(4 * D.m):
        if seen[start]:
            continue
        count += 1
        p = start
        while not seen[p]:
            seen[p] = True
            seen[inner[p]] = True
            p = D.partner[inner[p]]
    return count


def jones_polynomial(D: GluedDiagram) -> dict[int, int]:
    """Unnormalised Jones polynomial ``{power of q: coefficient}``.

    This is the Kauffman-bracket state sum over box smoothings, normalised
    as ``(-1)^{n_-} q^{n_+ - 2 n_-} <D>`` with ``<unknot> = q + 1/q``, so it
    equals the graded Euler characteristic of Khovanov cohomology.
    """
    boxes = [_twist_bracket(t.index) for t in D.tangles]
    delta = {1: 1, -1: 1}
    total: dict[int, int] = {}
    for state in range(1 << D.m):
        term = {0: 1}
        for j, (a, b) in enumerate(boxes):
            term = _poly_mul(term, b if state >> j & 1 else a)
            if not term:
                break
        if not term:
            continue
        for _ in range(_circle_count(D, state)):
            term = _poly_mul(term, delta)
        total = _poly_add(total, term)
    n_plus = sum(abs(t.index) for t in D.tangles if t.crossing_sign > 0)
    n_minus = sum(abs(t.index) for t in D.tangles if t.crossing_sign < 0)
    sign = -1 if n_minus % 2 else 1
    shift = n_plus - 2 * n_minus
    return {k + shift: sign * v for k, v in sorted(total.items())}
