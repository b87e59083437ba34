"""Cochain complexes per quantum grading, Gauss elimination, Smith normal
form, integral and mod-2 cohomology, and the Bockstein ``Sq^1``.

A :class:`QComplex` holds the cochain complex of one quantum grading with
generators numbered ``0..N-1`` (sorted by degree, then object id) and the
coboundary stored row-wise (``out[g] = {target: coefficient}``).

Gauss elimination removes a pair ``a -> b`` with unit coefficient ``λ``; the
new coboundary is ``δ'(u)_v = δ(u)_v - δ(u)_b λ^{-1} δ(a)_v``.  The
inclusion of the reduced complex is ``ι(u) = u - (δ(u)_b / λ) a`` and the
projection sends ``a`` to ``0`` and ``b`` to ``-(1/λ) Σ_{v≠b} δ(a)_v v``;
both are recorded (over ``Z/2``) so cocycles can be moved between the full
and the reduced complex.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .resolution import FlowObject


class HomologyError(RuntimeError):
    """Raised when a complex fails d² = 0 or another consistency check."""


# ---------------------------------------------------------------------------
# complexes


@dataclass
class QComplex:
    """Cochain complex of one quantum grading."""

    q: int
    objects: list[FlowObject]
    degree: list[int]
    out: list[dict[int, int]]

    @property
    def degrees(self) -> list[int]:
        return sorted(set(self.degree))

    def by_degree(self) -> dict[int, list[int]]:
        res: dict[int, list[int]] = {}
        for g, t in enumerate(self.degree):
            res.setdefault(t, []).append(g)
        return res

    def check_d_squared(self) -> None:
        for g, row in enumerate(self.out):
            acc: dict[int, int] = {}
            for v, c in row.items():
                for w, c2 in self.out[v].items():
                    acc[w] = acc.get(w, 0) + c * c2
            bad = [w for w, c in acc.items() if c]
            if bad:
                raise HomologyError(f"d^2 != 0 at generator {g} (q={self.q})")

    def euler_characteristic(self) -> int:
        return sum(-1 if t % 2 else 1 for t in self.degree)

    def coboundary_z(self, cochain: dict[int, int]) -> dict[int, int]:
        acc: dict[int, int] = {}
        for g, c in cochain.items():
            for v, cv in self.out[g].items():
                acc[v] = acc.get(v, 0) + c * cv
        return {v: c for v, c in acc.items() if c}

    def coboundary_2(self, cochain: Iterable[int]) -> set[int]:
        res: set[int] = set()
        for g in cochain:
            for v, c in self.out[g].items():
                if c & 1:
                    res ^= {v}
        return res


def build_complex(fc, q: int) -> QComplex:
    """Cochain complex of the flow category ``fc`` in quantum grading ``q``."""
    objs = fc.objects(q)
    objs.sort(key=lambda o: (o.t, o))
    index = {o: g for g, o in enumerate(objs)}
    out = []
    for o in objs:
        row = {}
        for e in fc.up(o):
            c = e.coefficient
            if c:
                row[index[e.target]] = c
        out.append(row)
    return QComplex(q, objs, [o.t for o in objs], out)


# ---------------------------------------------------------------------------
# Gauss elimination


@dataclass
class Elimination:
    a: int
    b: int
    lam: int
    row: dict[int, int]  # δ(a) without b, at elimination time
    col: dict[int, int]  # coefficients on b of the other sources, at elimination time


@dataclass
class Reduction:
    """Result of Gauss elimination: the reduced complex and the recorded maps."""

    complex: QComplex
    modulus: int
    alive: list[int]  # generators of the original complex that survive
    out: dict[int, dict[int, int]]  # reduced coboundary on surviving generators
    steps: list[Elimination] = field(default_factory=list)

    def alive_by_degree(self) -> dict[int, list[int]]:
        res: dict[int, list[int]] = {t: [] for t in self.complex.degrees}
        for g in self.alive:
            res[self.complex.degree[g]].append(g)
        return res

    # maps over Z/2 only (used by the mod-2 machinery)
    def include(self, cochain: Iterable[int], t: int) -> set[int]:
        """ι: reduced cochain in degree ``t`` -> cochain of the full complex."""
        if self.modulus != 2:
            raise HomologyError("cochain maps are recorded for mod-2 elimination only")
        res = set(cochain)
        deg = self.complex.degree
        for st in reversed(self.steps):
            if deg[st.a] != t:
                continue
            par = 0
            for u in st.col:
                if u in res:
                    par ^= 1
            if par:
                res ^= {st.a}
        return res

    def project(self, cochain: Iterable[int], t: int) -> set[int]:
        """p: full cochain in degree ``t`` -> reduced cochain."""
        if self.modulus != 2:
            raise HomologyError("cochain maps are recorded for mod-2 elimination only")
        res = set(cochain)
        deg = self.complex.degree
        for st in self.steps:
            if deg[st.a] == t:
                res.discard(st.a)
            elif deg[st.b] == t and st.b in res:
                res.discard(st.b)
                for v in st.row:
                    res ^= {v}
        return res


def gauss_eliminate(cx: QComplex, modulus: int = 0, record: bool = False) -> Reduction:
    """Eliminate unit-coefficient pairs in Markowitz order.

    ``modulus`` is ``0`` for integer coefficients (pivots ``±1``) or ``2``.
    """
    if modulus not in (0, 2):
        raise ValueError("modulus must be 0 or 2")
    N = len(cx.out)
    if modulus == 2:
        out = [{v: 1 for v, c in row.items() if c & 1} for row in cx.out]
    else:
        out = [dict(row) for row in cx.out]
    inc: list[dict[int, int]] = [{} for _ in range(N)]
    for u, row in enumerate(out):
        for v, c in row.items():
            inc[v][u] = c
    alive = [True] * N

    def unit(c: int) -> bool:
        return c == 1 or c == -1

    def cost(a: int, b: int) -> int:
        return (len(out[a]) - 1) * (len(inc[b]) - 1)

    heap = []
    for a in range(N):
        for b, c in out[a].items():
            if unit(c):
                heap.append((cost(a, b), a, b))
    heapq.heapify(heap)
    steps = []
    while heap:
        k, a, b = heapq.heappop(heap)
        if not (alive[a] and alive[b]):
            continue
        c = out[a].get(b)
        if c is None or not unit(c):
            continue
        k2 = cost(a, b)
        if k2 > k:
            heapq.heappush(heap, (k2, a, b))
            continue
        lam = c
        row = {v: cv for v, cv in out[a].items() if v != b}
        col = {u: cu for u, cu in inc[b].items() if u != a}
        if record:
            steps.append(Elimination(a, b, lam, row, col))
        # update the block
        for u, cu in col.items():
            factor = cu * lam  # cu / lam for lam = ±1
            ou = out[u]
            del ou[b]
            for v, cv in row.items():
                nv = ou.get(v, 0) - factor * cv
                if modulus == 2:
                    nv &= 1
                if nv:
                    ou[v] = nv
                    inc[v][u] = nv
                    if unit(nv):
                        heapq.heappush(heap, (0, u, v))
                else:
                    ou.pop(v, None)
                    inc[v].pop(u, None)
        # remove a and b
        for w in inc[a]:
            out[w].pop(a, None)
        for v in out[a]:
            inc[v].pop(a, None)
        for v in out[b]:
            inc[v].pop(b, None)
        out[a] = {}
        out[b] = {}
        inc[a] = {}
        inc[b] = {}
        alive[a] = alive[b] = False
    keep = [g for g in range(N) if alive[g]]
    return Reduction(cx, modulus, keep, {g: out[g] for g in keep}, steps)


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(M: Sequence[Sequence[int]], transforms: bool = False):
    """Smith normal form of an integer matrix.

    Returns the list of nonzero invariant factors ``d_1 | d_2 | ...``; with
    ``transforms=True`` returns ``(invariants, U, V)`` with ``U M V``
    diagonal, ``U`` and ``V`` unimodular.
    """
    A = [list(map(int, r)) for r in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    U = [[int(i == j) for j in range(rows)] for i in range(rows)] if transforms else None
    V = [[int(i == j) for j in range(cols)] for i in range(cols)] if transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        if V is not None:
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row dst += f * row src
        if f:
            rs, rd = A[src], A[dst]
            for c in range(cols):
                if rs[c]:
                    rd[c] += f * rs[c]
            if U is not None:
                us, ud = U[src], U[dst]
                for c in range(rows):
                    if us[c]:
                        ud[c] += f * us[c]

    def add_col(dst, src, f):  # col dst += f * col src
        if f:
            for r in A:
                if r[src]:
                    r[dst] += f * r[src]
            if V is not None:
                for r in V:
                    if r[src]:
                        r[dst] += f * r[src]

    k = 0
    while k < min(rows, cols):
        # smallest nonzero entry in the remaining block
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(k, i)
        swap_cols(k, j)
        while True:
            p = A[k][k]
            done = True
            for i in range(k + 1, rows):
                if A[i][k]:
                    add_row(i, k, -(A[i][k] // p))
                    if A[i][k]:
                        done = False
            for j in range(k + 1, cols):
                if A[k][j]:
                    add_col(j, k, -(A[k][j] // p))
                    if A[k][j]:
                        done = False
            if not done:
                # move the smallest remaining entry of row/col k to the pivot
                cand = [(abs(A[i][k]), i, k) for i in range(k, rows) if A[i][k]]
                cand += [(abs(A[k][j]), k, j) for j in range(k, cols) if A[k][j]]
                _, i, j = min(cand)
                swap_rows(k, i)
                swap_cols(k, j)
                continue
            # divisibility condition with the rest of the block
            bad = None
            for i in range(k + 1, rows):
                for j in range(k + 1, cols):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(k, bad, 1)
        if A[k][k] < 0:
            A[k] = [-v for v in A[k]]
            if U is not None:
                U[k] = [-v for v in U[k]]
        k += 1
    inv = [A[i][i] for i in range(min(rows, cols)) if A[i][i]]
    if transforms:
        return inv, U, V
    return inv


def prime_power_parts(d: int) -> list[int]:
    """Decompose ``d > 1`` into its prime-power factors."""
    out = []
    p = 2
    while p * p <= d:
        if d % p == 0:
            pk = 1
            while d % p == 0:
                d //= p
                pk *= p
            out.append(pk)
        p += 1
    if d > 1:
        out.append(d)
    return out


def rank_mod2(rows: Iterable[int]) -> int:
    """Rank over Z/2 of rows given as bitsets."""
    basis: dict[int, int] = {}
    r = 0
    for v in rows:
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                r += 1
                break
    return r


# ---------------------------------------------------------------------------
# cohomology


@dataclass(frozen=True)
class Group:
    t: int
    free: int
    torsion: tuple[int, ...]

    def two_torsion(self) -> tuple[int, ...]:
        return tuple(x for x in self.torsion if x % 2 == 0)


def integral_cohomology(cx: QComplex, eliminate: bool = True) -> dict[int, Group]:
    """Integral cohomology groups ``H^t`` of one quantum grading."""
    if eliminate:
        red = gauss_eliminate(cx, 0)
    else:
        red = Reduction(cx, 0, list(range(len(cx.out))), {g: dict(r) for g, r in enumerate(cx.out)})
    byd = red.alive_by_degree()
    ranks: dict[int, int] = {}
    invs: dict[int, list[int]] = {}
    for t in cx.degrees:
        src = byd.get(t, [])
        dst = byd.get(t + 1, [])
        if src and dst:
            mat = [[red.out[s].get(d, 0) for s in src] for d in dst]
            inv = smith_normal_form(mat)
        else:
            inv = []
        ranks[t] = len(inv)
        invs[t] = inv
    groups = {}
    for t in cx.degrees:
        dim = len(byd.get(t, []))
        free = dim - ranks[t] - ranks.get(t - 1, 0)
        tors = []
        for d in invs.get(t - 1, []):
            if d > 1:
                tors.extend(prime_power_parts(d))
        groups[t] = Group(t, free, tuple(sorted(tors)))
    return groups


class Mod2Cohomology:
    """Mod-2 cohomology of one quantum grading with explicit representatives.

    ``reps[t]`` lists cocycles of the full complex (sets of generators)
    forming a basis of ``H^t``; :meth:`project` expresses any cocycle in
    that basis.
    """

    def __init__(self, cx: QComplex, eliminate: bool = True):
        self.cx = cx
        if eliminate:
            self.red = gauss_eliminate(cx, 2, record=True)
        else:
            self.red = Reduction(cx, 2, list(range(len(cx.out))),
                                 {g: {v: 1 for v, c in r.items() if c & 1} for g, r in enumerate(cx.out)})
        byd = self.red.alive_by_degree()
        self.gens = byd
        self.pos = {t: {g: k for k, g in enumerate(gs)} for t, gs in byd.items()}
        self._echelon: dict[int, dict[int, tuple[int, int]]] = {}
        self.reduced_reps: dict[int, list[int]] = {}
        self.reps: dict[int, list[set[int]]] = {}
        for t in cx.degrees:
            self._solve_degree(t)

    def _image_bits(self, g: int, t: int) -> int:
        pos = self.pos.get(t + 1, {})
        v = 0
        for w in self.red.out[g]:
            v |= 1 << pos[w]
        return v

    def _solve_degree(self, t: int) -> None:
        gens = self.gens.get(t, [])
        # kernel of d_t by elimination with combination tracking
        piv: dict[int, tuple[int, int]] = {}
        kernel = []
        for k, g in enumerate(gens):
            v = self._image_bits(g, t)
            comb = 1 << k
            while v:
                h = v.bit_length() - 1
                if h in piv:
                    pv, pc = piv[h]
                    v ^= pv
                    comb ^= pc
                else:
                    piv[h] = (v, comb)
                    break
            if not v:
                kernel.append(comb)
        # image of d_{t-1}
        ech: dict[int, tuple[int, int]] = {}

        def insert(v: int, tag: int) -> bool:
            while v:
                h = v.bit_length() - 1
                if h in ech:
                    pv, pt = ech[h]
                    v ^= pv
                    tag ^= pt
                else:
                    ech[h] = (v, tag)
                    return True
            return False

        for g in self.gens.get(t - 1, []):
            insert(self._image_bits(g, t - 1), 0)
        reps = []
        for comb in kernel:
            if insert(comb, 1 << len(reps)):
                reps.append(comb)
        self._echelon[t] = ech
        self.reduced_reps[t] = reps
        self.reps[t] = [self.red.include(self._to_set(comb, t), t) for comb in reps]

    def _to_set(self, bits: int, t: int) -> set[int]:
        gens = self.gens.get(t, [])
        out = set()
        k = 0
        while bits:
            if bits & 1:
                out.add(gens[k])
            bits >>= 1
            k += 1
        return out

    def dim(self, t: int) -> int:
        return len(self.reduced_reps.get(t, []))

    def project(self, cochain: Iterable[int], t: int) -> list[int]:
        """Coordinates (0/1 per basis class) of the class of a full cocycle."""
        reduced = self.red.project(cochain, t)
        pos = self.pos.get(t, {})
        v = 0
        for g in reduced:
            v |= 1 << pos[g]
        ech = self._echelon.get(t, {})
        tag = 0
        while v:
            h = v.bit_length() - 1
            if h not in ech:
                raise HomologyError(f"cochain in degree {t} is not a cocycle")
            pv, pt = ech[h]
            v ^= pv
            tag ^= pt
        return [(tag >> k) & 1 for k in range(self.dim(t))]

    def is_cocycle(self, cochain: Iterable[int]) -> bool:
        return not self.cx.coboundary_2(cochain)


def sq1_matrix(cx: QComplex, h2: Mod2Cohomology, t: int) -> list[list[int]]:
    """Bockstein ``Sq^1: H^t -> H^{t+1}`` as rows (one per source class)."""
    rows = []
    for rep in h2.reps.get(t, []):
        d = cx.coboundary_z({g: 1 for g in rep})
        if any(c % 2 for c in d.values()):
            raise HomologyError("representative is not a mod-2 cocycle")
        half = {v for v, c in d.items() if (c // 2) % 2}
        rows.append(h2.project(half, t + 1) if h2.dim(t + 1) else [])
    return rows


def matrix_rank_mod2(rows: list[list[int]]) -> int:
    return rank_mod2(sum(b << k for k, b in enumerate(r)) for r in rows)
