"""Cells of the sock complex, standard sign and frame assignments.

A moduli point of the sock category in coordinate ``j`` is identified by its
label ``phi``: ``PHI_P`` (``P``), ``PHI_M`` (``M``) or ``k >= 1`` (``P_k``).
Points produced by a surgery carry ``PHI_P``.

The sock complex of one coordinate of index ``r`` has the integers between
``0`` and ``r`` as vertices, one 1-cell per sock moduli point, 2-cells ``N``
and ``Ñ`` spanning two consecutive steps, and 3-cells ``Q``.  Products over
all coordinates give the complex on which the sign (1-cochain) and frame
(2-cochain) assignments live.  :func:`check_coboundaries` verifies the
cocycle identities exhaustively for small index vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

PHI_P = 0
PHI_M = -1

N_CELL = "N"
NT_CELL = "Nt"  # the cell written N-tilde


def phi_name(phi: int) -> str:
    if phi == PHI_P:
        return "P"
    if phi == PHI_M:
        return "M"
    return f"P{phi}"


def is_pm(phi: int) -> bool:
    """True for the P/M family (``P_k`` counts as ``P`` for signs and frames)."""
    return phi <= 0


def _prefix(a: Sequence[int], j: int) -> int:
    return sum(a[:j]) % 2


def sign(a: Sequence[int], j: int, phi: int) -> int:
    """Standard sign of the point ``phi`` in coordinate ``j`` based at ``a``."""
    return (_prefix(a, j) + (1 if phi == PHI_M else 0)) % 2


def frame_product(a: Sequence[int], r: Sequence[int], j: int, phi_j: int, i: int, phi_i: int) -> int:
    """Standard frame of the product cell ``(E^j_a, E^i_a)`` with ``j < i``."""
    if not j < i:
        raise ValueError("product cells need j < i")
    A = _prefix(a, j)
    if phi_j != PHI_M:
        first, second = A, sum(a[j:i]) % 2
    else:
        delta = 1 if r[j] < 0 else 0
        first, second = (A + 1) % 2, (delta + sum(a[j + 1:i])) % 2
    if phi_i == PHI_M:
        second ^= 1
    return first * second


def frame_same(a: Sequence[int], j: int, kind: str) -> int:
    """Standard frame of ``N^j_a`` / ``Ñ^j_a``."""
    if kind == N_CELL:
        return _prefix(a, j)
    if kind == NT_CELL:
        return 0
    raise ValueError(f"unknown cell kind {kind!r}")


def same_coordinate_kind(lower_is_pm: bool) -> str:
    """``N`` if the lower step is of P/M type, else ``Ñ``."""
    return N_CELL if lower_is_pm else NT_CELL


def sock_partner(kind: str, lower: int, upper: int, n: int,
                 lower_surgery: bool = False, upper_surgery: bool = False) -> tuple[int, int] | None:
    """The other end of the sock interval through the broken flow ``(lower, upper)``.

    Returns ``None`` for discarded intervals.  Raises for labels that do not
    occur in the given cell kind.
    """
    if kind == NT_CELL and lower_surgery:
        # Ñ_0: (P,P) -- (P,M)
        return {PHI_P: (PHI_P, PHI_M), PHI_M: (PHI_P, PHI_P)}[upper]
    if kind == N_CELL and upper_surgery:
        # N_0: (P,P) -- (M,P)
        return {PHI_P: (PHI_M, PHI_P), PHI_M: (PHI_P, PHI_P)}[lower]
    if kind == N_CELL:
        if not (is_pm(lower) and upper >= 1):
            raise ValueError("N cells pair (P|M, P_k) breakings")
        if lower == PHI_P:
            return (PHI_M, upper + 1) if upper < n else None
        return (PHI_P, upper - 1) if upper > 1 else None
    if kind == NT_CELL:
        if not (lower >= 1 and is_pm(upper)):
            raise ValueError("Ñ cells pair (P_k, P|M) breakings")
        if upper == PHI_P:
            return (lower + 1, PHI_M) if lower < n else None
        return (lower - 1, PHI_P) if lower > 1 else None
    raise ValueError(f"unknown cell kind {kind!r}")


def is_discarded(kind: str, lower: int, upper: int, n: int,
                 lower_surgery: bool = False, upper_surgery: bool = False) -> bool:
    """True for the sock intervals removed in the partial sock category."""
    return sock_partner(kind, lower, upper, n, lower_surgery, upper_surgery) is None


# ---------------------------------------------------------------------------
# single-coordinate sock complex


@dataclass(frozen=True)
class SockCell:
    """A cell of a single-coordinate sock complex.

    ``dim`` 0: vertex ``lo``.  ``dim`` 1: a point ``phi`` from ``lo`` to
    ``lo + 1`` (``sub`` distinguishes the ``P_{i,.}`` copies).  ``dim`` 2: an
    ``N``/``Ñ`` cell from ``lo`` to ``lo + 2``.  ``dim`` 3: a ``Q`` cell.
    """

    dim: int
    lo: int
    name: str
    phi: int = PHI_P
    sub: int = 0
    boundary: tuple["SockCell", ...] = ()

    @property
    def kind(self) -> str:
        return self.name


def _edge(lo: int, phi: int, name: str, sub: int = 0) -> SockCell:
    return SockCell(1, lo, name, phi, sub)


def sock_cells(r: int, n: int) -> dict[int, list[SockCell]]:
    """All cells of the single-coordinate complex for index ``r``."""
    if r == 0:
        raise ValueError("index must be nonzero")
    lo, hi = (0, r) if r > 0 else (r, 0)
    verts = [SockCell(0, v, "v") for v in range(lo, hi + 1)]
    edges: list[SockCell] = []
    twos: list[SockCell] = []
    threes: list[SockCell] = []
    surgery_lo = 0 if r > 0 else -1
    surg = _edge(surgery_lo, PHI_P, "P")
    edges.append(surg)
    pm: dict[int, tuple[SockCell, SockCell]] = {}
    pk: dict[int, list[SockCell]] = {}
    for v in range(lo, hi):
        if v == surgery_lo:
            continue
        pm_step = (v % 2 == 1) if r > 0 else (v % 2 == 0)
        if pm_step:
            pm[v] = (_edge(v, PHI_P, "P"), _edge(v, PHI_M, "M"))
            edges.extend(pm[v])
        else:
            pk[v] = [_edge(v, k + 1, "Pk", k) for k in range(n)]
            edges.extend(pk[v])
    for v in range(lo, hi - 1):
        u = v + 1
        if v == surgery_lo and u in pm:  # Ñ_0, r > 0
            p, m_ = pm[u]
            twos.append(SockCell(2, v, NT_CELL, boundary=(surg, surg, p, m_)))
        elif u == surgery_lo and v in pm:  # N_0, r < 0
            p, m_ = pm[v]
            twos.append(SockCell(2, v, N_CELL, boundary=(p, m_, surg, surg)))
        elif v in pm and u in pk:
            p, m_ = pm[v]
            for k in range(n - 1):
                twos.append(SockCell(2, v, N_CELL, sub=k, boundary=(p, pk[u][k], pk[u][k + 1], m_)))
        elif v in pk and u in pm:
            p, m_ = pm[u]
            for k in range(n - 1):
                twos.append(SockCell(2, v, NT_CELL, sub=k, boundary=(pk[v][k], p, m_, pk[v][k + 1])))
    # Q cells: N at v and Ñ at v+1 share the P_k edges between v+1 and v+2
    # (r > 0), or Ñ at v and N at v-1 (r < 0); in both cases the pair spans
    # three steps around one P_k level.
    by_key = {(c.lo, c.name, c.sub): c for c in twos}
    for level, cells in pk.items():
        for k in range(n - 2):
            n_lo = level - 1  # N cell ends with the P_k edges
            nt_lo = level  # Ñ cell starts with the P_k edges
            nk, nk1 = by_key.get((n_lo, N_CELL, k)), by_key.get((n_lo, N_CELL, k + 1))
            tk, tk1 = by_key.get((nt_lo, NT_CELL, k)), by_key.get((nt_lo, NT_CELL, k + 1))
            if None in (nk, nk1, tk, tk1):
                continue
            threes.append(SockCell(3, n_lo, "Q", sub=k, boundary=(nk, tk1, tk, nk1)))
    return {0: verts, 1: edges, 2: twos, 3: threes}


# ---------------------------------------------------------------------------
# product complex and the coboundary oracle


@dataclass(frozen=True)
class ProductCell:
    """A product of single-coordinate cells, one factor per coordinate."""

    factors: tuple[SockCell, ...]

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(f.lo for f in self.factors)

    def boundary(self) -> list["ProductCell"]:
        out = []
        for j, f in enumerate(self.factors):
            if f.dim == 0:
                continue
            if f.dim == 1:
                faces = [SockCell(0, f.lo, "v"), SockCell(0, f.lo + 1, "v")]
            else:
                faces = list(f.boundary)
            for g in faces:
                out.append(ProductCell(self.factors[:j] + (g,) + self.factors[j + 1:]))
        return out


@dataclass
class SignFrame:
    """Sign and frame cochains on the product complex for an index vector."""

    r: tuple[int, ...]
    frame_flip: ProductCell | None = None  # mutation hook for tests

    def s(self, cell: ProductCell) -> int:
        (j,) = [k for k, f in enumerate(cell.factors) if f.dim == 1]
        return sign(cell.base, j, cell.factors[j].phi)

    def f(self, cell: ProductCell) -> int:
        active = [k for k, fc in enumerate(cell.factors) if fc.dim > 0]
        a = cell.base
        if len(active) == 2:
            j, i = active
            val = frame_product(a, self.r, j, cell.factors[j].phi, i, cell.factors[i].phi)
        else:
            (j,) = active
            val = frame_same(a, j, cell.factors[j].name)
        if self.frame_flip is not None and cell == self.frame_flip:
            val ^= 1
        return val


@dataclass
class OracleReport:
    checked_2cells: int = 0
    checked_3cells: int = 0
    failures: list[str] | None = None

    @property
    def ok(self) -> bool:
        return not self.failures


def product_cells(r: Sequence[int], n: int, dim: int) -> list[ProductCell]:
    per = [sock_cells(x, n) for x in r]
    out = []
    for dims in itertools.product(range(4), repeat=len(r)):
        if sum(dims) != dim:
            continue
        for combo in itertools.product(*(per[k][d] for k, d in enumerate(dims))):
            out.append(ProductCell(tuple(combo)))
    return out


def expected_delta_f(sf: SignFrame, tau: ProductCell) -> int:
    """Value of the frame coboundary on a 3-cell predicted by the lemma."""
    facs = tau.factors
    active = [k for k, f in enumerate(facs) if f.dim > 0]
    a = tau.base

    def s_at(k: int, phi: int) -> int:
        return sign(a, k, phi)

    dims = [facs[k].dim for k in active]
    if dims == [1, 1, 1]:
        return sum(s_at(k, facs[k].phi) for k in active) % 2
    if dims == [3]:
        return 0
    (e,) = [k for k in active if facs[k].dim == 1]
    (c,) = [k for k in active if facs[k].dim == 2]
    if facs[c].name == N_CELL:
        return (s_at(e, facs[e].phi) + s_at(c, PHI_P) + s_at(c, PHI_M)) % 2
    return s_at(e, facs[e].phi)


def check_coboundaries(r: Sequence[int], n: int, sf: SignFrame | None = None) -> OracleReport:
    """Exhaustively check ``δs = 1`` on 2-cells and the ``δf`` identities on 3-cells."""
    r = tuple(r)
    sf = sf or SignFrame(r)
    rep = OracleReport(failures=[])
    for cell in product_cells(r, n, 2):
        rep.checked_2cells += 1
        total = 0
        for face in cell.boundary():
            if face.dim == 1:
                total += sf.s(face)
        if total % 2 != 1:
            rep.failures.append(f"delta s != 1 on {describe(cell)}")
    for tau in product_cells(r, n, 3):
        rep.checked_3cells += 1
        got = sum(sf.f(face) for face in tau.boundary()) % 2
        want = expected_delta_f(sf, tau)
        if got != want:
            rep.failures.append(f"delta f = {got}, expected {want} on {describe(tau)}")
    return rep


def describe(cell: ProductCell) -> str:
    parts = []
    for f in cell.factors:
        if f.dim == 0:
            parts.append(str(f.lo))
        elif f.dim == 1:
            parts.append(f"{phi_name(f.phi)}@{f.lo}")
        else:
            parts.append(f"{f.name}{f.sub}@{f.lo}")
    return "(" + " x ".join(parts) + ")"
