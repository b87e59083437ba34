"""Wedge decompositions into Moore spaces and elementary Chang complexes.

The input for one quantum grading is its integral cohomology together with
``Sq^1`` and ``Sq^2`` as matrices on mod-2 cohomology.  Mod-2 classes in
degree ``t`` are split into three kinds:

* ``lower`` classes ``B_t = im Sq^1`` (reductions of ``Z/2`` summands of
  ``H^t``);
* ``upper`` classes, a complement of ``Z_t = ker Sq^1`` (they carry the
  ``Z/2`` summands of ``H^{t+1}``);
* the middle ``E_t = Z_t / B_t``, which holds free classes and both classes of
  every ``Z/2^k`` summand with ``k >= 2``.  The kind of an ``E_t`` class can
  only be read off the integral torsion when ``E_t`` has a single kind.

``Sq^2`` is summarised by four ranks (:class:`FourRankSummary`), from which
elementary patterns are peeled:

====================  ==========================
pattern               summand
====================  ==========================
free -> free          ``X(eta, t)``
upper -> free         ``X(_p eta, t)``
free -> lower         ``X(eta q, t)``
upper -> lower        ``X(_p eta q, t)``
====================  ==========================

Leftover cohomology becomes spheres and Moore spaces.  Whenever the data
could hide an attaching map that ``Sq^2`` does not see, the result is
``INDETERMINATE`` with a reason.

Conventions: ``S^t`` has ``H^t = Z``; the Moore space ``M(Z/m, t)`` has cells
in degrees ``t, t+1`` and ``H^{t+1} = Z/m``; ``X(_p eta q, t)`` has bottom
``Z`` in ``H^t`` (or ``Z/p`` in ``H^{t+1}``) and top ``Z`` in ``H^{t+2}`` (or
``Z/q`` in ``H^{t+2}``).
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .homalg import Group, Mod2Cohomology, build_complex, integral_cohomology, sq1_matrix
from .steenrod import MatchingPolicy, sq2_matrix

DETERMINED = "DETERMINED"
INDETERMINATE = "INDETERMINATE"


class ClassifyError(ValueError):
    """Raised when the input ranks are inconsistent with each other."""


# ------------------------------------------------------------- summands
@dataclass(frozen=True, order=True)
class Summand:
    """One wedge summand.

    ``kind`` is ``"sphere"``, ``"moore"`` or ``"chang"``.  For Moore spaces
    ``upper`` is the order of the torsion group.  For Chang complexes
    ``upper``/``lower`` are the torsion orders at the bottom/top (``0`` for a
    free end).
    """

    t: int
    kind: str
    upper: int = 0
    lower: int = 0

    @property
    def name(self) -> str:
        if self.kind == "sphere":
            return f"S^{self.t}"
        if self.kind == "moore":
            return f"M(Z/{self.upper},{self.t})"
        left = f"_{self.upper}" if self.upper else ""
        right = str(self.lower) if self.lower else ""
        return f"X({left}η{right},{self.t})"

    def cohomology(self) -> dict[int, tuple[int, tuple[int, ...]]]:
        """``{degree: (free rank, torsion orders)}``."""
        out: dict[int, tuple[int, list[int]]] = {}

        def add(d: int, free: int = 0, tors: int = 0) -> None:
            f, ts = out.setdefault(d, (0, []))
            out[d] = (f + free, ts + ([tors] if tors else []))

        t = self.t
        if self.kind == "sphere":
            add(t, free=1)
        elif self.kind == "moore":
            add(t + 1, tors=self.upper)
        else:
            if self.upper:
                add(t + 1, tors=self.upper)
            else:
                add(t, free=1)
            if self.lower:
                add(t + 2, tors=self.lower)
            else:
                add(t + 2, free=1)
        return {d: (f, tuple(sorted(ts))) for d, (f, ts) in out.items()}

    def cells(self) -> list[int]:
        """Degrees of the cells of the minimal cell structure."""
        if self.kind == "sphere":
            return [self.t]
        if self.kind == "moore":
            return [self.t, self.t + 1]
        return [self.t] + ([self.t + 1] if self.upper or self.lower else []) + [self.t + 2]


def sphere(t: int) -> Summand:
    return Summand(t, "sphere")


def moore(order: int, t: int) -> Summand:
    return Summand(t, "moore", order)


def chang(t: int, upper: int = 0, lower: int = 0) -> Summand:
    return Summand(t, "chang", upper, lower)


# ------------------------------------------------------------- reports
@dataclass
class BucketReport:
    """Cohomology and Steenrod squares of one quantum grading.

    Degrees are reported homological degrees.  ``sq1[t]`` and ``sq2[t]`` have
    one row per basis class of ``H^t(-; Z/2)``, holding its image coordinates.
    """

    q: int
    groups: dict[int, Group]
    dims: dict[int, int]
    sq1: dict[int, list[list[int]]] = field(default_factory=dict)
    sq2: dict[int, list[list[int]]] = field(default_factory=dict)
    objects: int = 0
    seconds: float = 0.0

    def sq2_ranks(self) -> dict[int, int]:
        return {t: r for t, rows in sorted(self.sq2.items()) if (r := _rank(_vecs(rows)))}

    def sq1_ranks(self) -> dict[int, int]:
        return {t: r for t, rows in sorted(self.sq1.items()) if (r := _rank(_vecs(rows)))}

    @property
    def width(self) -> int:
        """Span of ``{d : H^d != 0} ∪ {d + 1 : H^d has torsion}``."""
        degs = set()
        for d, g in self.groups.items():
            if g.free or g.torsion:
                degs.add(d)
            if g.torsion:
                degs.add(d + 1)
        return max(degs) - min(degs) + 1 if degs else 0

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "objects": self.objects,
            "groups": {str(d): {"free": g.free, "torsion": list(g.torsion)}
                       for d, g in sorted(self.groups.items()) if g.free or g.torsion},
            "mod2_dims": {str(d): n for d, n in sorted(self.dims.items()) if n},
            "sq1": {str(t): rows for t, rows in sorted(self.sq1.items()) if _rank(_vecs(rows))},
            "sq2": {str(t): rows for t, rows in sorted(self.sq2.items()) if _rank(_vecs(rows))},
            "width": self.width,
        }


def bucket_report(fc, q: int, policy: MatchingPolicy | None = None, eliminate: bool = True,
                  steenrod: bool = True) -> BucketReport:
    """Compute integral cohomology, ``Sq^1`` and (optionally) ``Sq^2`` at ``q``."""
    start = time.perf_counter()
    cx = build_complex(fc, q)
    off = fc.cube.i_offset
    groups = {t + off: g for t, g in integral_cohomology(cx, eliminate).items()}
    groups = {d: Group(d, g.free, g.torsion) for d, g in groups.items()}
    rep = BucketReport(q, groups, {}, objects=len(cx.objects))
    if steenrod:
        h2 = Mod2Cohomology(cx, eliminate)
        for t in cx.degrees:
            rep.dims[t + off] = h2.dim(t)
        for t in cx.degrees:
            if h2.dim(t):
                rep.sq1[t + off] = sq1_matrix(cx, h2, t)
                rep.sq2[t + off] = sq2_matrix(fc, cx, h2, t, policy)
    rep.seconds = time.perf_counter() - start
    return rep


# ------------------------------------------------------------- GF(2) helpers
def _vecs(rows: list[list[int]]) -> list[int]:
    return [sum(b << k for k, b in enumerate(r)) for r in rows]


def _basis(vectors) -> list[int]:
    """Reduced echelon basis (as a list) of the span of bit vectors."""
    piv: dict[int, int] = {}
    for v in vectors:
        while v:
            h = v.bit_length() - 1
            if h not in piv:
                piv[h] = v
                break
            v ^= piv[h]
    return list(piv.values())


def _rank(vectors) -> int:
    return len(_basis(vectors))


def _apply(rows: list[int], v: int) -> int:
    out = 0
    k = 0
    while v:
        if v & 1 and k < len(rows):
            out ^= rows[k]
        v >>= 1
        k += 1
    return out


def _kernel(rows: list[int], dim: int) -> list[int]:
    """Basis of the kernel of the map sending basis vector ``k`` to ``rows[k]``."""
    piv: dict[int, tuple[int, int]] = {}
    kernel = []
    for k in range(dim):
        v, tag = rows[k] if k < len(rows) else 0, 1 << k
        while v:
            h = v.bit_length() - 1
            if h not in piv:
                piv[h] = (v, tag)
                break
            pv, pt = piv[h]
            v ^= pv
            tag ^= pt
        if not v:
            kernel.append(tag)
    return kernel


def _rank_mod(vectors, sub: list[int]) -> int:
    return _rank(list(sub) + list(vectors)) - _rank(sub)


# ------------------------------------------------------------- summaries
@dataclass(frozen=True)
class FourRankSummary:
    """Ranks of ``Sq^2: H^t -> H^{t+2}`` by kind of source and target."""

    t: int
    free_free: int
    upper_free: int
    free_lower: int
    upper_lower: int
    total: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.free_free, self.upper_free, self.free_lower, self.upper_lower)


@dataclass
class WedgeDecomposition:
    q: int
    status: str
    summands: list[Summand] = field(default_factory=list)
    reason: str = ""
    ranks: dict[int, FourRankSummary] = field(default_factory=dict)

    @property
    def determined(self) -> bool:
        return self.status == DETERMINED

    def names(self) -> list[str]:
        return [s.name for s in self.summands]

    def __str__(self) -> str:
        if not self.determined:
            return f"INDETERMINATE ({self.reason})"
        return " ∨ ".join(self.names()) if self.summands else "*"

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "status": self.status,
            "reason": self.reason,
            "summands": self.names() if self.determined else [],
            "text": str(self),
            "four_ranks": {str(t): list(r.as_tuple()) for t, r in sorted(self.ranks.items())},
        }


def _kinds(groups: dict[int, Group], t: int) -> list[tuple[str, int]]:
    """Kinds present among the middle classes ``E_t``."""
    kinds = []
    g, above = groups.get(t), groups.get(t + 1)
    if g is not None and g.free:
        kinds.append(("free", 0))
    if g is not None:
        kinds += sorted({("lower", m) for m in g.torsion if m % 4 == 0})
    if above is not None:
        kinds += sorted({("upper", m) for m in above.torsion if m % 4 == 0})
    return kinds


def _count_cohomology(groups: dict[int, Group]) -> dict[int, tuple[int, tuple[int, ...]]]:
    return {d: (g.free, tuple(sorted(g.torsion))) for d, g in groups.items() if g.free or g.torsion}


def model_cohomology(summands: list[Summand]) -> dict[int, tuple[int, tuple[int, ...]]]:
    free: Counter = Counter()
    tors: dict[int, list[int]] = {}
    for s in summands:
        for d, (f, ts) in s.cohomology().items():
            free[d] += f
            tors.setdefault(d, []).extend(ts)
    degs = set(free) | set(tors)
    out = {}
    for d in degs:
        if free[d] or tors.get(d):
            out[d] = (free[d], tuple(sorted(tors.get(d, []))))
    return out


def classify(report: BucketReport) -> WedgeDecomposition:
    """Peel elementary Chang patterns off one quantum grading."""
    groups = {d: g for d, g in report.groups.items() if g.free or g.torsion}
    q = report.q

    def expected_dim(t: int) -> int:
        g, above = groups.get(t), groups.get(t + 1)
        n = 0
        if g is not None:
            n += g.free + len(g.two_torsion())
        if above is not None:
            n += len(above.two_torsion())
        return n

    degrees = sorted(set(report.dims) | {d for d in groups} | {d - 1 for d in groups})
    for t in degrees:
        if report.dims.get(t, 0) != expected_dim(t):
            raise ClassifyError(f"mod-2 dimension {report.dims.get(t, 0)} in degree {t} "
                                f"does not match the integral groups ({expected_dim(t)})")
    sq1 = {t: _vecs(rows) for t, rows in report.sq1.items()}
    sq2 = {t: _vecs(rows) for t, rows in report.sq2.items()}
    for t in degrees:
        above = groups.get(t + 1)
        n2 = sum(1 for m in above.torsion if m == 2) if above else 0
        if _rank(sq1.get(t, [])) != n2:
            raise ClassifyError(f"Sq^1 rank in degree {t} does not match the Z/2 summands of H^{t + 1}")

    lower = {t: _basis(sq1.get(t - 1, [])) for t in degrees}
    cycles = {t: _kernel(sq1.get(t, []), report.dims.get(t, 0)) for t in degrees}
    full = {t: [1 << k for k in range(report.dims.get(t, 0))] for t in degrees}

    ranks: dict[int, FourRankSummary] = {}
    for t in degrees:
        rows = sq2.get(t, [])
        if not any(rows):
            continue
        img = lambda vs: [_apply(rows, v) for v in vs]  # noqa: E731
        B_src, Z_src, V_src = lower[t], cycles[t], full[t]
        if any(img(B_src)):
            return WedgeDecomposition(q, INDETERMINATE, reason=f"Sq^2 is nonzero on Sq^1-images in degree {t}")
        up = sq1.get(t + 2, [])
        if any(_apply(up, w) for w in img(V_src)):
            return WedgeDecomposition(q, INDETERMINATE, reason=f"Sq^1 Sq^2 is nonzero in degree {t}")
        B_tgt = lower.get(t + 2, [])
        total = _rank(img(V_src))
        ff = _rank_mod(img(Z_src), B_tgt)
        uf = _rank_mod(img(V_src), B_tgt) - ff
        fl = _rank(img(Z_src)) - ff
        ul = total - ff - uf - fl
        ranks[t] = FourRankSummary(t, ff, uf, fl, ul, total)

    def indeterminate(reason: str) -> WedgeDecomposition:
        return WedgeDecomposition(q, INDETERMINATE, reason=reason, ranks=ranks)

    # chains: a degree that is both a source and a target
    for t in ranks:
        if t + 2 in ranks:
            return indeterminate(f"Sq^2 chains over degrees {t}, {t + 2}, {t + 4}")

    # kinds of the middle classes touched by Sq^2
    src_kind: dict[int, tuple[str, int]] = {}
    tgt_kind: dict[int, tuple[str, int]] = {}
    for t, r in ranks.items():
        if r.free_free or r.free_lower:
            kinds = _kinds(groups, t)
            if len(kinds) != 1:
                orders = [m for _, m in kinds if m]
                return indeterminate(f"Bockstein on Z/{min(orders)}" if orders
                                     else f"no free or torsion source for Sq^2 in degree {t}")
            if kinds[0][0] == "lower":
                return indeterminate(f"Sq^2 on the reduction of a Z/{kinds[0][1]} class in degree {t}")
            src_kind[t] = kinds[0]
        if r.free_free or r.upper_free:
            kinds = _kinds(groups, t + 2)
            if len(kinds) != 1:
                orders = [m for _, m in kinds if m]
                return indeterminate(f"Bockstein on Z/{min(orders)}" if orders
                                     else f"no free or torsion target for Sq^2 in degree {t + 2}")
            if kinds[0][0] == "upper":
                return indeterminate(f"Sq^2 hits a Z/{kinds[0][1]} upper class in degree {t + 2}")
            tgt_kind[t] = kinds[0]

    # peel the patterns
    summands: list[Summand] = []
    for t in sorted(ranks):
        r = ranks[t]
        s_up = src_kind[t][1] if t in src_kind and src_kind[t][0] == "upper" else 0
        t_lo = tgt_kind[t][1] if t in tgt_kind and tgt_kind[t][0] == "lower" else 0
        summands += [chang(t, s_up, t_lo)] * r.free_free
        summands += [chang(t, 2, t_lo)] * r.upper_free
        summands += [chang(t, s_up, 2)] * r.free_lower
        summands += [chang(t, 2, 2)] * r.upper_lower

    # a torsion summand may serve only one pattern
    used_lower: Counter = Counter()
    used_upper: Counter = Counter()
    for s in summands:
        if s.upper:
            used_upper[(s.t + 1, s.upper)] += 1
        if s.lower:
            used_lower[(s.t + 2, s.lower)] += 1
    for key in used_upper:
        if used_lower[key]:
            return indeterminate(f"a Z/{key[1]} summand of H^{key[0]} would serve two Sq^2 patterns")

    remaining_free = Counter({d: g.free for d, g in groups.items()})
    remaining_tors = {d: Counter(g.torsion) for d, g in groups.items()}
    for s in summands:
        for d, (f, ts) in s.cohomology().items():
            remaining_free[d] -= f
            for m in ts:
                remaining_tors.setdefault(d, Counter())[m] -= 1
    if any(v < 0 for v in remaining_free.values()) or any(
            v < 0 for c in remaining_tors.values() for v in c.values()):
        raise ClassifyError("Sq^2 ranks exceed the available cohomology")
    for d in sorted(remaining_free):
        summands += [sphere(d)] * remaining_free[d]
    for d in sorted(remaining_tors):
        for m, k in sorted(remaining_tors[d].items()):
            summands += [moore(m, d - 1)] * k
    summands.sort()

    # attaching maps across three or more degrees are invisible to Sq^2
    reason = _hidden_attachments(summands)
    if reason:
        return indeterminate(reason)

    decomposition = WedgeDecomposition(q, DETERMINED, summands, ranks=ranks)
    check_reassembly(decomposition, report)
    return decomposition


def _two_local(s: Summand) -> bool:
    if s.kind == "moore":
        return s.upper % 2 == 0
    return True


def _hidden_attachments(summands: list[Summand]) -> str:
    """Reason string if the cells leave room for a map ``Sq^2`` cannot detect.

    Two cells ``a < b`` of different summands with ``b - a >= 4`` could be
    linked by a map in a higher stem; with ``b - a = 3`` by ``η²`` (2-locally
    only), unless the bottom cell carries ``η`` itself, which kills ``η²``.
    """
    cells = []
    for idx, s in enumerate(summands):
        bottom_eta = s.kind == "chang"
        for c in s.cells():
            cells.append((c, idx, _two_local(s), bottom_eta and c == s.t))
    for a, ia, two_a, eta_a in cells:
        for b, ib, two_b, _ in cells:
            if ia == ib or b - a < 3:
                continue
            if b - a >= 4:
                return f"cells in degrees {a} and {b} may be linked by a map not detected by Sq^2"
            if two_a and two_b and not eta_a:
                return f"cells in degrees {a} and {b} may be linked by η², which Sq^2 does not detect"
    return ""


def check_reassembly(dec: WedgeDecomposition, report: BucketReport) -> None:
    """The model's cohomology and Steenrod ranks must equal the input."""
    model = model_cohomology(dec.summands)
    given = _count_cohomology(report.groups)
    if model != given:
        raise ClassifyError(f"decomposition does not reassemble the cohomology: {model} != {given}")
    sq2_model: Counter = Counter(s.t for s in dec.summands if s.kind == "chang")
    if dict(sq2_model) != report.sq2_ranks():
        raise ClassifyError("decomposition does not reproduce the Sq^2 ranks")
    sq1_model: Counter = Counter()
    for s in dec.summands:
        for d, (_, ts) in s.cohomology().items():
            sq1_model[d - 1] += sum(1 for m in ts if m == 2)
    if {t: r for t, r in sq1_model.items() if r} != report.sq1_ranks():
        raise ClassifyError("decomposition does not reproduce the Sq^1 ranks")
