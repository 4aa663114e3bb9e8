"""Homology of free complexes, induced maps, and long exact sequences.

Homology classes are written in coordinates with respect to a deterministic
generator list; each generator carries an order (0 for a free summand).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

from .complex import ChainMap, FreeComplex, ShapeError, is_chain_map
from .exactlinalg import (
    Ring, SparseMatrix, diagonalize, elementary_divisors, kernel_basis, solve_exact,
)

__all__ = [
    "HomologyInvariants", "HomologyBasis", "homology", "homology_basis", "induced_map",
    "ShortExactSequence", "SESReport", "verify_ses", "connecting_hom", "connecting_image",
    "LESReport", "long_exact_sequence", "BrokenSequenceError",
]


class BrokenSequenceError(ValueError):
    pass


@dataclass(frozen=True)
class HomologyInvariants:
    ring: str
    degree: int
    rank: int
    torsion: tuple = ()

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __str__(self):
        if self.is_zero():
            return "0"
        base = {"Z": "Z", "Q": "Q"}.get(self.ring, self.ring.replace("Fp:", "F"))
        parts = [base if self.rank == 1 else f"{base}^{self.rank}"] if self.rank else []
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts)

    def to_dict(self):
        return {"degree": self.degree, "rank": self.rank, "torsion": [int(t) for t in self.torsion],
                "text": str(self)}


def _rank_and_torsion(d: SparseMatrix):
    if d.is_zero():
        return 0, ()
    divs = elementary_divisors(d)
    ring = d.ring
    tors = () if ring.is_field else tuple(x for x in divs if not ring.is_unit(x))
    return len(divs), tors


def homology(C: FreeComplex, n: int) -> HomologyInvariants:
    """Invariants of ``ker d_n / im d_{n+1}`` from ranks and elementary divisors.

    Uses sparse elimination only, so it scales to the bar complexes; the
    explicit generators live in :class:`HomologyBasis`.
    """
    rk_n, _ = _rank_and_torsion(C.diff(n))
    rk_up, tors = _rank_and_torsion(C.diff(n + 1))
    free = C.dim(n) - rk_n - rk_up
    if free < 0:
        raise ValueError(f"d d != 0 around degree {n}")
    return HomologyInvariants(C.ring.name, n, free, tors)


class HomologyBasis:
    """Generators of ``H_n`` and a coordinate map for cycles.

    With ``U d_n V = S`` the last columns of ``V`` span the cycles; boundaries
    written in those coordinates are diagonalised once more, and the
    generators are the resulting basis vectors whose invariant factor is not
    a unit.
    """

    def __init__(self, C: FreeComplex, n: int):
        self.complex = C
        self.degree = n
        ring = self.ring = C.ring
        dim = C.dim(n)
        Dn = diagonalize(C.diff(n))
        r = Dn.rank
        self._r = r
        self._Vinv = Dn.Vinv
        k = dim - r
        # kernel basis K (dim x k)
        K = [[Dn.V[i][r + j] for j in range(k)] for i in range(dim)]
        up = C.diff(n + 1)
        red = ring.reduce
        ycols = []
        for j in range(up.cols):
            col = up.column(j)
            y = {}
            for a in range(k):
                row = Dn.Vinv[r + a]
                v = red(sum(row[i] * c for i, c in col.items()))
                if v:
                    y[a] = v
            for a in range(r):
                row = Dn.Vinv[a]
                if red(sum(row[i] * c for i, c in col.items())):
                    raise ValueError(f"d d != 0 around degree {n}")
            ycols.append(y)
        Y = SparseMatrix.from_columns(k, ring, ycols)
        DY = diagonalize(Y)
        self._U2 = DY.U
        divs = list(DY.diagonal) + [0] * (k - DY.rank)
        keep = [i for i, s in enumerate(divs) if s == 0 or not ring.is_unit(s)]
        self._keep = keep
        self.orders = tuple(divs[i] if divs[i] != 0 and not ring.is_field else 0 for i in keep)
        gens = []
        for i in keep:
            # column i of K @ Uinv2
            vec = {}
            for row in range(dim):
                Krow = K[row]
                v = red(sum(Krow[a] * DY.Uinv[a][i] for a in range(k) if Krow[a]))
                if v:
                    vec[row] = v
            gens.append(vec)
        self.representatives = SparseMatrix.from_columns(dim, ring, gens)

    @property
    def size(self) -> int:
        return len(self.orders)

    @cached_property
    def invariants(self) -> HomologyInvariants:
        tors = tuple(o for o in self.orders if o)
        return HomologyInvariants(self.ring.name, self.degree, len(self.orders) - len(tors), tors)

    def is_cycle(self, z) -> bool:
        return not self.complex.diff(self.degree).apply(z)

    def coordinates(self, z) -> list:
        """Class of the cycle ``z`` as a list of coordinates (torsion ones reduced)."""
        ring = self.ring
        red = ring.reduce
        if not isinstance(z, dict):
            z = {i: v for i, v in enumerate(z) if v}
        if not self.is_cycle(z):
            raise ValueError("vector is not a cycle")
        r, Vinv = self._r, self._Vinv
        k = self.complex.dim(self.degree) - r
        y = [red(sum(Vinv[r + a][i] * c for i, c in z.items())) for a in range(k)]
        out = []
        for i, o in zip(self._keep, self.orders):
            c = red(sum(self._U2[i][a] * y[a] for a in range(k) if y[a]))
            out.append(c % o if o else c)
        return out

    def is_boundary(self, z) -> bool:
        return not any(self.coordinates(z))


def homology_basis(C: FreeComplex, n: int) -> HomologyBasis:
    return HomologyBasis(C, n)


def _as_matrix(rows: int, ring: Ring, columns: list[list]) -> SparseMatrix:
    return SparseMatrix.from_columns(rows, ring, [{i: v for i, v in enumerate(c) if v} for c in columns])


def induced_map(f: ChainMap, n: int, source: HomologyBasis | None = None,
                target: HomologyBasis | None = None, check: bool = True) -> SparseMatrix:
    """Matrix of ``H_n(f)`` in the chosen generator bases."""
    if check and not is_chain_map(f):
        raise ValueError("not a chain map")
    source = source or HomologyBasis(f.source, n)
    target = target or HomologyBasis(f.target, n + f.degree)
    fn = f[n]
    cols = [target.coordinates(fn.apply(source.representatives.column(j))) for j in range(source.size)]
    return _as_matrix(target.size, f.source.ring, cols)


# ---------------------------------------------------------------------------
# short exact sequences


@dataclass
class ShortExactSequence:
    C1: FreeComplex
    C: FreeComplex
    C2: FreeComplex
    u: ChainMap
    v: ChainMap

    def degrees(self) -> range:
        lo = min(self.C1.lo, self.C.lo, self.C2.lo)
        hi = max(self.C1.hi, self.C.hi, self.C2.hi)
        return range(lo, hi + 1)


@dataclass
class SESReport:
    ok: bool
    failures: list[tuple[int, str, object]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _in_span(M: SparseMatrix, vecs, D=None):
    """First vector not in the column span of ``M`` (``None`` if all are)."""
    if M.cols == 0:
        return next((v for v in vecs if v), None)
    D = D or diagonalize(M)
    for v in vecs:
        if v and solve_exact(M, v, D) is None:
            return v
    return None


def verify_ses(S: ShortExactSequence) -> SESReport:
    fails = []
    for name, m in (("u", S.u), ("v", S.v)):
        rep = is_chain_map(m)
        fails += [(n, f"{name} not a chain map", col) for n, col in rep.failures]
    for n in S.degrees():
        un, vn = S.u[n], S.v[n]
        ring = S.C.ring
        # injectivity: the kernel of u_n is zero
        if un.cols:
            K = kernel_basis(un)
            if K.cols:
                fails.append((n, "u not injective", K.column(0)))
        # surjectivity: every basis vector of C2_n lies in the image of v_n
        if vn.rows:
            w = _in_span(vn, ({i: ring.coerce(1)} for i in range(vn.rows)))
            if w is not None:
                fails.append((n, "v not surjective", w))
        vu = vn @ un
        if not vu.is_zero():
            fails.append((n, "v u != 0", vu.first_nonzero_column()))
        if un.rows:
            Kv = kernel_basis(vn) if vn.rows else SparseMatrix.identity(un.rows, ring)
            w = _in_span(un, (Kv.column(j) for j in range(Kv.cols)))
            if w is not None:
                fails.append((n, "ker v not in im u", w))
    return SESReport(not fails, fails)


def _lift(M: SparseMatrix, b: dict, alternate: bool, D=None):
    x = solve_exact(M, b, D)
    if x is None:
        raise BrokenSequenceError("lift does not exist")
    if alternate and M.cols:
        # shift the lift by every kernel basis vector
        K = kernel_basis(M)
        for j in range(K.cols):
            for i, c in K.column(j).items():
                x[i] = M.ring.reduce(x.get(i, 0) + c)
        x = {i: c for i, c in x.items() if c}
    return x


def connecting_image(S: ShortExactSequence, n: int, z: dict, alternate: bool = False):
    """A cycle of ``C1_{n-1}`` representing the connecting image of the cycle ``z``."""
    x = _lift(S.v[n], z, alternate)
    dx = S.C.diff(n).apply(x)
    return _lift(S.u[n - 1], dx, alternate)


def connecting_hom(S: ShortExactSequence, n: int, alternate: bool = False,
                   source: HomologyBasis | None = None, target: HomologyBasis | None = None) -> SparseMatrix:
    """Matrix of ``H_n(C2) -> H_{n-1}(C1)``; ``alternate`` shifts both lifts by kernel vectors."""
    source = source or HomologyBasis(S.C2, n)
    target = target or HomologyBasis(S.C1, n - 1)
    cols = []
    for j in range(source.size):
        w = connecting_image(S, n, source.representatives.column(j), alternate)
        cols.append(target.coordinates(w))
    return _as_matrix(target.size, S.C.ring, cols)


# ---------------------------------------------------------------------------
# long exact sequence


def _relations(H: HomologyBasis) -> SparseMatrix:
    ring = H.ring
    cols = [{i: ring.coerce(o)} for i, o in enumerate(H.orders) if o]
    return SparseMatrix.from_columns(H.size, ring, cols)


def _exact_at(incoming: SparseMatrix, outgoing: SparseMatrix, Hmid: HomologyBasis, Hout: HomologyBasis):
    """Check ``im(incoming) = ker(outgoing)`` inside ``Hmid`` (orders respected)."""
    ring = Hmid.ring
    Rmid, Rout = _relations(Hmid), _relations(Hout)
    comp = outgoing @ incoming
    # composite zero modulo the relations of the target
    bad = _in_span(Rout, (comp.column(j) for j in range(comp.cols)))
    if bad is not None:
        return False, ("composite nonzero", bad)
    if Hmid.size == 0:
        return True, None
    # kernel lattice: x with outgoing x in span(Rout)
    A = outgoing.hstack(Rout) if Rout.cols else outgoing
    if A.rows == 0:
        kers = [{i: ring.coerce(1)} for i in range(Hmid.size)]
    else:
        K = kernel_basis(A)
        kers = [{i: v for i, v in K.column(j).items() if i < Hmid.size} for j in range(K.cols)]
    img = incoming.hstack(Rmid) if Rmid.cols else incoming
    bad = _in_span(img, kers)
    if bad is not None:
        return False, ("kernel class not in image", bad)
    return True, None


@dataclass
class LESReport:
    ok: bool
    rows: list[dict]

    def __bool__(self):
        return self.ok

    def to_text(self) -> str:
        lines = [f"{'node':<14}{'group':<22}status"]
        for r in self.rows:
            lines.append(f"{r['node']:<14}{r['group']:<22}{'exact' if r['exact'] else 'NOT EXACT'}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "rows": self.rows}, sort_keys=True, default=str)


def long_exact_sequence(S: ShortExactSequence, alternate: bool = False) -> LESReport:
    """Assemble ``H_n(C1) -> H_n(C) -> H_n(C2) -> H_{n-1}(C1)`` and check every node."""
    rep = verify_ses(S)
    if not rep:
        raise BrokenSequenceError(f"not a short exact sequence: {rep.failures[0]}")
    live = [n for n in S.degrees() if S.C1.dim(n) or S.C.dim(n) or S.C2.dim(n)]
    if not live:
        return LESReport(True, [])
    lo, hi = min(live), max(live)
    H1 = {n: HomologyBasis(S.C1, n) for n in range(lo - 1, hi + 2)}
    H = {n: HomologyBasis(S.C, n) for n in range(lo - 1, hi + 2)}
    H2 = {n: HomologyBasis(S.C2, n) for n in range(lo - 1, hi + 2)}
    ustar = {n: induced_map(S.u, n, H1[n], H[n], check=False) for n in H}
    vstar = {n: induced_map(S.v, n, H[n], H2[n], check=False) for n in H}
    delta = {n: connecting_hom(S, n, alternate, H2[n], H1[n - 1]) for n in range(lo, hi + 2)}
    rows = []
    ok = True
    for n in range(hi + 1, lo - 1, -1):
        nodes = [
            (f"H{n}(C1)", H1[n], delta.get(n + 1), ustar[n], H[n]),
            (f"H{n}(C)", H[n], ustar[n], vstar[n], H2[n]),
            (f"H{n}(C2)", H2[n], vstar[n], delta.get(n), H1.get(n - 1)),
        ]
        for name, Hmid, inc, out, Hout in nodes:
            ring = Hmid.ring
            if inc is None:
                inc = SparseMatrix.zero(Hmid.size, 0, ring)
            if out is None:
                Hout = None
                out = SparseMatrix.zero(0, Hmid.size, ring)
            exact, witness = _exact_at(inc, out, Hmid, Hout or _EmptyBasis(ring))
            ok &= exact
            rows.append({"node": name, "degree": n, "group": str(Hmid.invariants),
                         "exact": exact, "witness": witness})
    return LESReport(ok, rows)


class _EmptyBasis:
    def __init__(self, ring):
        self.ring = ring
        self.orders = ()
        self.size = 0
