"""The bar complex of a metagroup algebra ``B = T[G]`` and the standard resolution.

Basis words of ``K_n`` (``n >= 0``) have ``n + 2`` letters and are read with
the left-comb parenthesization.  Central associator values act through
slot 0, so ``K_n`` is balanced over ``T[Psi]``: letters in slots ``1..n+1``
are stored as coset representatives of ``G / Psi`` and the leftover factor
is pushed into slot 0.  For a group (``Psi = {e}``) the basis is all of
``G^{n+2}`` and every matrix equals the classical unnormalized bar complex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .complex import ChainMap, FreeComplex, FreeGradedModule, Homotopism, is_homotopy
from .exactlinalg import Ring, SparseMatrix
from .metagroup import MetagroupTable

__all__ = [
    "BarConstruction", "bar", "bar_basis", "bar_dimension", "bar_boundary", "bar_homotopy_s",
    "bar_projection_p", "bar_homotopy", "build_bar_complex", "CoefficientModule", "Resolution",
    "standard_resolution", "TwistOutsidePsiError", "ResourceCapError", "MAX_BASIS",
    "estimate_size", "classical_bar_boundary",
]

MAX_BASIS = 1 << 24


class TwistOutsidePsiError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    def __init__(self, estimate: int, cap: int = MAX_BASIS):
        super().__init__(f"requested build needs about {estimate} basis elements (cap {cap})")
        self.estimate = estimate
        self.cap = cap


def estimate_size(T: MetagroupTable, max_n: int) -> int:
    """Worst-case basis size ``|G|^(maxN+2)`` used by the resource cap."""
    return T.order ** (max_n + 2)


def check_cap(T: MetagroupTable, max_n: int, cap: int = MAX_BASIS):
    est = estimate_size(T, max_n)
    if est > cap:
        raise ResourceCapError(est, cap)


class BarConstruction:
    """Combinatorics of the normal-form words; ring independent."""

    def __init__(self, T: MetagroupTable):
        self.table = T
        tab = T.table
        rdiv = T._rdiv
        psi = sorted(T.psi_set)
        self.psi = frozenset(psi)
        N = self.order = T.order
        self.unit = T.unit
        self.rep = [min(tab[g][c] for c in psi) for g in range(N)]
        # coef[g] * rep[g] = g
        self.coef = [rdiv[self.rep[g]][g] for g in range(N)]
        self.reps = sorted(set(self.rep))
        self.pos = {r: i for i, r in enumerate(self.reps)}
        self.m = len(self.reps)

    def dim(self, n: int) -> int:
        if n < -1:
            return 0
        if n == -1:
            return self.order
        return self.order * self.m ** (n + 1)

    def words(self, n: int):
        """Basis words of ``K_n`` in index order."""
        if n == -1:
            return [(g,) for g in range(self.order)]
        return [(g0,) + tail for g0 in range(self.order)
                for tail in itertools.product(self.reps, repeat=n + 1)]

    def word(self, n: int, index: int) -> tuple:
        if n == -1:
            return (index,)
        tail = []
        for _ in range(n + 1):
            index, r = divmod(index, self.m)
            tail.append(self.reps[r])
        return (index,) + tuple(reversed(tail))

    def index(self, w: Sequence[int]) -> int:
        """Index of a word already in normal form."""
        if len(w) == 1:
            return w[0]
        m, pos = self.m, self.pos
        i = w[0]
        for x in w[1:]:
            i = i * m + pos[x]
        return i

    def normalize(self, w: Sequence[int]) -> tuple:
        tab, coef, rep = self.table.table, self.coef, self.rep
        c = self.unit
        for x in w[1:]:
            c = tab[c][coef[x]]
        return (tab[c][w[0]],) + tuple(rep[x] for x in w[1:])

    def normal_index(self, w: Sequence[int]) -> int:
        if len(w) == 1:
            return w[0]
        tab, coef, rep, m, pos = self.table.table, self.coef, self.rep, self.m, self.pos
        c = self.unit
        i = 0
        for x in w[1:]:
            c = tab[c][coef[x]]
            i = i * m + pos[rep[x]]
        return tab[c][w[0]] * m ** (len(w) - 1) + i

    def pi(self, w: Sequence[int]) -> int:
        tab = self.table.table
        r = w[0]
        for x in w[1:]:
            r = tab[r][x]
        return r

    def _twist(self, target: int, value: int) -> int:
        # t with t * value = target, required to lie in Psi
        t = self.table._rdiv[value][target]
        if t not in self.psi:
            raise TwistOutsidePsiError(f"twist {self.table.name(t)} is not in Psi")
        return t

    def boundary_column(self, w: tuple) -> list[tuple[int, int]]:
        """``(row index, sign)`` pairs of ``d(w)`` for a normal-form word ``w``."""
        tab = self.table.table
        n = len(w) - 2
        P = self.pi(w)
        out = []
        for j in range(n + 1):
            m = w[:j] + (tab[w[j]][w[j + 1]],) + w[j + 2:]
            t = self._twist(P, self.pi(m))
            m = (tab[t][m[0]],) + m[1:]
            out.append((self.normal_index(m), -1 if j % 2 else 1))
        return out

    def homotopy_image(self, w: tuple) -> int:
        return self.normal_index((self.unit,) + tuple(w))

    def projection_image(self, w: tuple, side: str = "left") -> int:
        """Merge slot 0 into slot 1 (left action) or the last two slots (right action)."""
        tab = self.table.table
        if side == "left":
            g, rest = w[0], w[1:]
            target = tab[g][self.pi(rest)]
            m = (tab[g][rest[0]],) + rest[1:]
        elif side == "right":
            target = self.pi(w)
            m = w[:-2] + (tab[w[-2]][w[-1]],)
        else:
            raise ValueError("side must be 'left' or 'right'")
        t = self._twist(target, self.pi(m))
        return self.normal_index((tab[t][m[0]],) + m[1:])


@lru_cache(maxsize=16)
def bar(T: MetagroupTable) -> BarConstruction:
    return BarConstruction(T)


def bar_dimension(T: MetagroupTable, n: int) -> int:
    return bar(T).dim(n)


def bar_basis(T: MetagroupTable, n: int) -> list[tuple]:
    return bar(T).words(n)


def _columns(Bc: BarConstruction, n: int, columns: Iterable[int] | None):
    if columns is None:
        return enumerate(Bc.words(n))
    return ((j, Bc.word(n, j)) for j in sorted(set(columns)))


def bar_boundary(T: MetagroupTable, ring: Ring, n: int, columns: Iterable[int] | None = None) -> SparseMatrix:
    """``d_n: K_n -> K_{n-1}``; ``columns`` restricts the build to some basis words."""
    if n < 0:
        raise ValueError("the boundary starts at n = 0")
    Bc = bar(T)
    data = {}
    for j, w in _columns(Bc, n, columns):
        col = {}
        for i, s in Bc.boundary_column(w):
            col[i] = col.get(i, 0) + s
        col = {i: c for i, v in col.items() if (c := ring.coerce(v))}
        if col:
            data[j] = col
    return SparseMatrix._raw(Bc.dim(n - 1), Bc.dim(n), ring, data)


def bar_homotopy_s(T: MetagroupTable, ring: Ring, n: int, columns: Iterable[int] | None = None) -> SparseMatrix:
    """``s_n: K_n -> K_{n+1}``, inserting the unit in front."""
    if n < -1:
        raise ValueError("s is defined from n = -1")
    Bc = bar(T)
    one = ring.coerce(1)
    data = {j: {Bc.homotopy_image(w): one} for j, w in _columns(Bc, n, columns)}
    return SparseMatrix._raw(Bc.dim(n + 1), Bc.dim(n), ring, data)


def bar_projection_p(T: MetagroupTable, ring: Ring, n: int, side: str = "left",
                     columns: Iterable[int] | None = None) -> SparseMatrix:
    """``p_n: K_{n+1} -> K_n``; the left action gives ``p s = 1``."""
    if n < 0:
        raise ValueError("p is defined from n = 0")
    Bc = bar(T)
    one = ring.coerce(1)
    data = {j: {Bc.projection_image(w, side): one} for j, w in _columns(Bc, n + 1, columns)}
    return SparseMatrix._raw(Bc.dim(n), Bc.dim(n + 1), ring, data)


def _module(Bc: BarConstruction, ring: Ring, n: int) -> FreeGradedModule:
    return FreeGradedModule.graded(ring, Bc.words(n))


def build_bar_complex(T: MetagroupTable, ring: Ring, max_n: int, augmented: bool = True,
                      cap: int = MAX_BASIS) -> FreeComplex:
    """``B <- K_0 <- ... <- K_maxN``, with ``B`` in degree -1 when augmented."""
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    check_cap(T, max_n, cap)
    Bc = bar(T)
    lo = -1 if augmented else 0
    mods = {n: _module(Bc, ring, n) for n in range(lo, max_n + 1)}
    diffs = {n: bar_boundary(T, ring, n) for n in range(lo + 1, max_n + 1)}
    return FreeComplex(ring, mods, diffs, T)


def bar_homotopy(C: FreeComplex, T: MetagroupTable) -> ChainMap:
    """The contracting homotopy on a built bar complex (truncated at the top)."""
    maps = {n: bar_homotopy_s(T, C.ring, n) for n in range(C.lo, C.hi)}
    return ChainMap(C, C, maps, degree=1)


def classical_bar_boundary(T: MetagroupTable, ring: Ring, n: int) -> SparseMatrix:
    """Unnormalized bar differential on ``G^{n+2}`` for an associative table.

    Independent of :class:`BarConstruction`: lexicographic words, no twists.
    """
    N = T.order
    tab = T.table
    trip = []
    for j, w in enumerate(itertools.product(range(N), repeat=n + 2)):
        for k in range(n + 1):
            m = w[:k] + (tab[w[k]][w[k + 1]],) + w[k + 2:]
            i = 0
            for x in m:
                i = i * N + x
            trip.append((i, j, (-1) ** k))
    return SparseMatrix.from_triplets(N ** (n + 1), N ** (n + 2), ring, trip)


# ---------------------------------------------------------------------------
# standard resolution


@dataclass(frozen=True)
class CoefficientModule:
    """Free left ``B``-module ``X`` on ``labels``; its ``T``-basis is ``G x labels``."""

    labels: tuple = ("x",)

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a coefficient module needs at least one generator")
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def rank(self) -> int:
        return len(self.labels)


def _tensor_identity(M: SparseMatrix, k: int) -> SparseMatrix:
    # M (x) I_k with index (i, a) -> i * k + a
    if k == 1:
        return M
    data = {}
    for j, col in M.data.items():
        for a in range(k):
            data[j * k + a] = {i * k + a: v for i, v in col.items()}
    return SparseMatrix._raw(M.rows * k, M.cols * k, M.ring, data)


@dataclass
class Resolution:
    complex: FreeComplex
    X: FreeComplex
    epsilon: ChainMap
    xi: ChainMap
    v: ChainMap
    certificate: Homotopism

    def verify(self) -> bool:
        top = self.complex.hi
        return self.certificate.verify(range(self.complex.lo, top), None)


def standard_resolution(T: MetagroupTable, ring: Ring, X: CoefficientModule, max_n: int,
                        cap: int = MAX_BASIS) -> Resolution:
    """``K_n(B, X) = K_n (x)_B X`` with ``d = d (x) 1``, augmentation and contraction.

    Since ``X`` is free on its labels, ``K_n (x)_B X`` is ``K_n (x)_T T^labels``.
    The homotopy identities hold below the top degree; the top one is
    truncated.
    """
    check_cap(T, max_n, cap)
    Bc = bar(T)
    k = X.rank
    mods = {n: FreeGradedModule(ring, tuple((w, x) for w in Bc.words(n) for x in X.labels),
                                tuple(w for w in Bc.words(n) for _ in X.labels))
            for n in range(0, max_n + 1)}
    diffs = {n: _tensor_identity(bar_boundary(T, ring, n), k) for n in range(1, max_n + 1)}
    K = FreeComplex(ring, mods, diffs, T)
    Xmod = FreeGradedModule(ring, tuple(((g,), x) for g in range(T.order) for x in X.labels),
                            tuple((g,) for g in range(T.order) for _ in X.labels))
    Xc = FreeComplex(ring, {0: Xmod}, {}, T)
    eps = ChainMap(K, Xc, {0: _tensor_identity(bar_boundary(T, ring, 0), k)})
    xi = ChainMap(Xc, K, {0: _tensor_identity(bar_homotopy_s(T, ring, -1), k)})
    v = ChainMap(K, K, {n: _tensor_identity(bar_homotopy_s(T, ring, n), k) for n in range(0, max_n)}, degree=1)
    zero = ChainMap(Xc, Xc, {}, degree=1)
    cert = Homotopism(forward=eps, backward=xi, source_homotopy=v, target_homotopy=zero)
    return Resolution(K, Xc, eps, xi, v, cert)
