"""Tensor products of complexes, the Kunneth map and tensor homotopies.

Degree ``n`` of ``C (x) C'`` is the concatenation of blocks ``(j, n - j)`` in
increasing ``j``; inside a block the pair ``(a, b)`` sits at
``a * dim(C'_{n-j}) + b``.  ``D(x (x) y) = dx (x) y + (-1)^j x (x) d'y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Callable

from .complex import ChainMap, FreeComplex, FreeGradedModule, ShapeError
from .exactlinalg import RingMismatchError, SparseMatrix, kernel_basis
from .homology import HomologyBasis, _in_span

__all__ = [
    "TensorComplex", "tensor_complexes", "tensor_chain_maps", "tensor_homotopy",
    "KunnethMap", "kunneth_map", "kunneth_naturality", "is_isomorphism",
]


class TensorComplex(FreeComplex):
    def __init__(self, C: FreeComplex, C2: FreeComplex):
        if C.ring.name != C2.ring.name:
            raise RingMismatchError(f"factors over {C.ring} and {C2.ring}")
        if C.metagroup is not None and C2.metagroup is not None and C.metagroup != C2.metagroup:
            raise ValueError("factors live over different metagroups")
        self.first, self.second = C, C2
        ring = C.ring
        lo, hi = C.lo + C2.lo, C.hi + C2.hi
        self.blocks: dict[int, list[tuple[int, int, int]]] = {}
        mods = {}
        for n in range(lo, hi + 1):
            off = 0
            blocks, labels, words = [], [], []
            have_words = True
            for j in range(C.lo, C.hi + 1):
                l = n - j
                if not (C2.lo <= l <= C2.hi):
                    continue
                A, B = C.module(j), C2.module(l)
                blocks.append((j, l, off))
                off += len(A) * len(B)
                have_words &= A.words is not None and B.words is not None
                for a in range(len(A)):
                    for b in range(len(B)):
                        labels.append((j, l, A.labels[a], B.labels[b]))
                        if have_words:
                            words.append(A.words[a] + B.words[b])
            self.blocks[n] = blocks
            mods[n] = FreeGradedModule(ring, tuple(labels), tuple(words) if have_words and words else None)
        super().__init__(ring, mods, {}, C.metagroup or C2.metagroup)
        self.diffs = {}
        for n in range(lo + 1, hi + 1):
            D = _bilinear(self, self, C.diff, _identity(C2), -1, 0, _plus)(n) + \
                _bilinear(self, self, _identity(C), C2.diff, 0, -1, _koszul)(n)
            if not D.is_zero():
                self.diffs[n] = D

    def offset(self, n: int, j: int) -> int | None:
        for jj, _, off in self.blocks.get(n, ()):
            if jj == j:
                return off
        return None

    def index(self, n: int, j: int, a: int, b: int) -> int:
        off = self.offset(n, j)
        if off is None:
            raise IndexError(f"no block ({j}, {n - j}) in degree {n}")
        return off + a * self.second.dim(n - j) + b

    def pair(self, n: int, j: int, x: dict, y: dict) -> dict:
        """The vector ``x (x) y`` with ``x`` in ``C_j`` and ``y`` in ``C'_{n-j}``."""
        off = self.offset(n, j)
        w = self.second.dim(n - j)
        red = self.ring.reduce
        out = {}
        for a, u in x.items():
            for b, v in y.items():
                c = red(u * v)
                if c:
                    out[off + a * w + b] = c
        return out


def _plus(j):
    return 1


def _koszul(j):
    return -1 if j % 2 else 1


def _identity(C: FreeComplex) -> Callable[[int], SparseMatrix]:
    return lambda n: SparseMatrix.identity(C.dim(n), C.ring)


def _bilinear(src: TensorComplex, tgt: TensorComplex, A, B, da: int, db: int, sign):
    """``n -> matrix`` of ``x (x) y -> sign(j) A_j x (x) B_l y`` from degree n to n + da + db."""
    def build(n):
        ring = src.ring
        trip = []
        m = n + da + db
        for j, l, off in src.blocks.get(n, ()):
            toff = tgt.offset(m, j + da)
            if toff is None:
                continue
            Aj, Bl = A(j), B(l)
            if Aj.is_zero() or Bl.is_zero():
                continue
            sg = sign(j)
            wsrc = src.second.dim(l)
            wtgt = tgt.second.dim(l + db)
            for a, acol in Aj.data.items():
                for b, bcol in Bl.data.items():
                    col = off + a * wsrc + b
                    for ia, u in acol.items():
                        for ib, v in bcol.items():
                            trip.append((toff + ia * wtgt + ib, col, sg * u * v))
        return SparseMatrix.from_triplets(tgt.dim(m), src.dim(n), ring, trip)

    return build


def tensor_complexes(C: FreeComplex, C2: FreeComplex) -> TensorComplex:
    return TensorComplex(C, C2)


def tensor_chain_maps(f: ChainMap, p: ChainMap, source: TensorComplex | None = None,
                      target: TensorComplex | None = None) -> ChainMap:
    """``(f (x) p)(x (x) y) = f(x) (x) p(y)`` for degree 0 maps."""
    if f.degree or p.degree:
        raise ShapeError("tensor_chain_maps expects degree 0 maps")
    src = source or TensorComplex(f.source, p.source)
    tgt = target or TensorComplex(f.target, p.target)
    op = _bilinear(src, tgt, f.__getitem__, p.__getitem__, 0, 0, _plus)
    return ChainMap(src, tgt, {n: op(n) for n in src.degrees()})


def tensor_homotopy(s: ChainMap, p: ChainMap, f1: ChainMap, s1: ChainMap,
                    source: TensorComplex | None = None, target: TensorComplex | None = None) -> ChainMap:
    """``S(x (x) y) = s(x) (x) p(y) + (-1)^j f1(x) (x) s1(y)``.

    If ``s`` relates ``f`` with ``f1`` and ``s1`` relates ``p`` with ``p1``
    then ``S`` relates ``f (x) p`` with ``f1 (x) p1``.
    """
    if s.degree != 1 or s1.degree != 1 or p.degree or f1.degree:
        raise ShapeError("expected homotopies of degree +1 and chain maps of degree 0")
    src = source or TensorComplex(s.source, p.source)
    tgt = target or TensorComplex(s.target, p.target)
    left = _bilinear(src, tgt, s.__getitem__, p.__getitem__, 1, 0, _plus)
    right = _bilinear(src, tgt, f1.__getitem__, s1.__getitem__, 0, 1, _koszul)
    return ChainMap(src, tgt, {n: left(n) + right(n) for n in src.degrees()}, degree=1)


# ---------------------------------------------------------------------------
# Kunneth map


@dataclass
class KunnethMap:
    degree: int
    matrix: SparseMatrix
    domain: list[tuple[int, int, int]]
    domain_orders: tuple
    target: HomologyBasis

    @property
    def target_orders(self):
        return self.target.orders


def kunneth_map(T: TensorComplex, n: int, bases: dict | None = None,
                target: HomologyBasis | None = None) -> KunnethMap:
    """``[z] (x) [z'] -> [z (x) z']`` on ``sum_{j+l=n} H_j(C) (x) H_l(C')``.

    ``bases`` may map ``(factor, degree)`` to a prepared :class:`HomologyBasis`,
    e.g. one whose representatives were shifted by boundaries.
    """
    bases = bases or {}
    C, C2 = T.first, T.second
    target = target or HomologyBasis(T, n)
    domain, orders, cols = [], [], []
    for j, l, _ in T.blocks.get(n, ()):
        H1 = bases.get((0, j)) or HomologyBasis(C, j)
        H2 = bases.get((1, l)) or HomologyBasis(C2, l)
        for a in range(H1.size):
            za = H1.representatives.column(a)
            for b in range(H2.size):
                zb = H2.representatives.column(b)
                domain.append((j, a, b))
                orders.append(gcd(H1.orders[a], H2.orders[b]))
                cols.append(target.coordinates(T.pair(n, j, za, zb)))
    M = SparseMatrix.from_columns(target.size, T.ring, [{i: v for i, v in enumerate(c) if v} for c in cols])
    return KunnethMap(n, M, domain, tuple(orders), target)


def _relations(orders, ring):
    return SparseMatrix.from_columns(len(orders), ring, [{i: ring.coerce(o)} for i, o in enumerate(orders) if o])


def is_isomorphism(M: SparseMatrix, dom_orders, tgt_orders) -> bool:
    """Is ``M: Z^m / (orders) -> Z^k / (orders)`` bijective (well-definedness assumed)?"""
    ring = M.ring
    Rt, Rd = _relations(tgt_orders, ring), _relations(dom_orders, ring)
    img = M.hstack(Rt) if Rt.cols else M
    if M.rows and _in_span(img, ({i: ring.coerce(1)} for i in range(M.rows))) is not None:
        return False
    if not M.cols:
        return True
    if img.rows == 0:
        kers = [{i: ring.coerce(1)} for i in range(M.cols)]
    else:
        K = kernel_basis(img)
        kers = [{i: v for i, v in K.column(j).items() if i < M.cols} for j in range(K.cols)]
    return _in_span(Rd, kers) is None


def kunneth_naturality(f: ChainMap, p: ChainMap, n: int) -> bool:
    """Square ``H(f (x) p) o h = h' o (H(f) (x) H(p))`` in degree ``n``."""
    from .homology import induced_map
    src = TensorComplex(f.source, p.source)
    tgt = TensorComplex(f.target, p.target)
    fp = tensor_chain_maps(f, p, src, tgt)
    Hs, Ht = {}, {}
    for j, l, _ in src.blocks.get(n, ()):
        Hs[(0, j)], Hs[(1, l)] = HomologyBasis(f.source, j), HomologyBasis(p.source, l)
    for j, l, _ in tgt.blocks.get(n, ()):
        Ht[(0, j)], Ht[(1, l)] = HomologyBasis(f.target, j), HomologyBasis(p.target, l)
    Hsrc, Htgt = HomologyBasis(src, n), HomologyBasis(tgt, n)
    h = kunneth_map(src, n, Hs, Hsrc)
    h2 = kunneth_map(tgt, n, Ht, Htgt)
    ring = src.ring
    red = ring.reduce
    # left path: H(f (x) p) applied to representatives of the domain pairs
    Hfp = induced_map(fp, n, Hsrc, Htgt, check=False)
    left = Hfp @ h.matrix
    # right path: expand H(f) (x) H(p) in the target domain basis
    pos2 = {key: i for i, key in enumerate(h2.domain)}
    cols = []
    for (j, a, b) in h.domain:
        l = n - j
        Hf = induced_map(f, j, Hs[(0, j)], Ht[(0, j)], check=False)
        Hp = induced_map(p, l, Hs[(1, l)], Ht[(1, l)], check=False)
        col = {}
        for c, u in Hf.column(a).items():
            for d, v in Hp.column(b).items():
                i = pos2[(j, c, d)]
                col[i] = red(col.get(i, 0) + u * v)
        cols.append(col)
    mid = SparseMatrix.from_columns(len(h2.domain), ring, cols)
    right = h2.matrix @ mid
    orders = Htgt.orders
    diff = left - right
    for j in range(diff.cols):
        for i, v in diff.column(j).items():
            o = orders[i]
            if not o or v % o:
                return False
    return True
