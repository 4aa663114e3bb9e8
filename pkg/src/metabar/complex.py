"""Bounded chain complexes of finitely generated free graded modules.

Convention: ``diff(n)`` maps degree ``n`` to degree ``n - 1``.  A homotopy
``s`` relates ``f`` with ``g`` when ``g - f = d s + s d``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .exactlinalg import Ring, SparseMatrix, diagonalize, ring_from_name, RingMismatchError
from .metagroup import MetagroupTable, check_homomorphism, table_from_json, table_to_json

__all__ = [
    "FreeGradedModule", "FreeComplex", "ChainMap", "ComplexReport", "Homotopism",
    "validate_complex", "translate", "is_chain_map", "is_homotopy",
    "conjugate_homotopy", "compose_homotopy", "find_splitting", "split_decomposition",
    "SplitReport", "complex_to_json", "complex_from_json", "ShapeError", "NotASplittingError",
    "direct_sum", "inclusion", "projection",
]


class ShapeError(ValueError):
    pass


class NotASplittingError(ValueError):
    pass


@dataclass(frozen=True)
class FreeGradedModule:
    ring: Ring
    labels: tuple
    words: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.words is not None:
            object.__setattr__(self, "words", tuple(tuple(w) for w in self.words))
            if len(self.words) != len(self.labels):
                raise ShapeError("one grading word per basis label is required")

    @classmethod
    def plain(cls, ring: Ring, rank: int, prefix: str = "x"):
        return cls(ring, tuple(f"{prefix}{i}" for i in range(rank)))

    @classmethod
    def graded(cls, ring: Ring, words: Sequence[Sequence[int]]):
        words = tuple(tuple(w) for w in words)
        return cls(ring, words, words)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    @cached_property
    def index(self) -> dict:
        idx = {lab: i for i, lab in enumerate(self.labels)}
        if len(idx) != len(self.labels):
            raise ShapeError("basis labels must be unique")
        return idx

    def __eq__(self, other):
        return isinstance(other, FreeGradedModule) and self.ring.name == other.ring.name \
            and self.labels == other.labels and self.words == other.words

    def __hash__(self):
        return hash((self.ring.name, self.labels))


class FreeComplex:
    """Modules in degrees ``lo..hi`` and differentials ``diff(n): C_n -> C_{n-1}``."""

    def __init__(self, ring: Ring, modules: Mapping[int, FreeGradedModule],
                 diffs: Mapping[int, SparseMatrix] | None = None, metagroup: MetagroupTable | None = None):
        self.ring = ring
        self.modules = {n: m for n, m in modules.items()}
        self.metagroup = metagroup
        if self.modules:
            self.lo, self.hi = min(self.modules), max(self.modules)
        else:
            self.lo, self.hi = 0, -1
        self.diffs = {}
        for n, d in (diffs or {}).items():
            if d.ring.name != ring.name:
                raise RingMismatchError(f"differential {n} is over {d.ring}, complex over {ring}")
            if d.shape != (self.dim(n - 1), self.dim(n)):
                raise ShapeError(f"differential {n} has shape {d.shape}, expected "
                                 f"{(self.dim(n - 1), self.dim(n))}")
            if not d.is_zero():
                self.diffs[n] = d

    @classmethod
    def from_dims(cls, ring: Ring, dims: Mapping[int, int], diffs: Mapping[int, SparseMatrix] | None = None):
        return cls(ring, {n: FreeGradedModule.plain(ring, k, f"c{n}_") for n, k in dims.items()}, diffs)

    def module(self, n: int) -> FreeGradedModule:
        m = self.modules.get(n)
        return m if m is not None else FreeGradedModule(self.ring, ())

    def dim(self, n: int) -> int:
        m = self.modules.get(n)
        return len(m) if m is not None else 0

    def diff(self, n: int) -> SparseMatrix:
        d = self.diffs.get(n)
        return d if d is not None else SparseMatrix.zero(self.dim(n - 1), self.dim(n), self.ring)

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def dims(self) -> dict[int, int]:
        return {n: self.dim(n) for n in self.degrees()}

    def __repr__(self):
        return f"FreeComplex({self.ring}, dims={self.dims()})"

    def __eq__(self, other):
        if not isinstance(other, FreeComplex):
            return NotImplemented
        return self.ring.name == other.ring.name and self.dims() == other.dims() and \
            all(self.diff(n) == other.diff(n) for n in self.degrees())


@dataclass
class ComplexReport:
    ok: bool
    failures: list[tuple[int, int]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate_complex(C: FreeComplex) -> ComplexReport:
    """``d_{n-1} d_n = 0`` checked by exact sparse composition in every degree."""
    fails = []
    for n in range(C.lo + 1, C.hi + 1):
        prod = C.diff(n - 1) @ C.diff(n)
        if not prod.is_zero():
            fails.append((n, prod.first_nonzero_column()))
    return ComplexReport(not fails, fails)


def translate(C: FreeComplex, p: int) -> FreeComplex:
    """``C(p)_n = C_{n+p}`` with differential ``(-1)^p d``."""
    sign = -1 if p % 2 else 1
    mods = {n - p: m for n, m in C.modules.items()}
    diffs = {n - p: d.scale(sign) for n, d in C.diffs.items()}
    return FreeComplex(C.ring, mods, diffs, C.metagroup)


def _block_diag(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    data = {j: dict(c) for j, c in A.data.items()}
    for j, c in B.data.items():
        data[A.cols + j] = {A.rows + i: v for i, v in c.items()}
    return SparseMatrix._raw(A.rows + B.rows, A.cols + B.cols, A.ring, data)


def direct_sum(C: FreeComplex, E: FreeComplex) -> FreeComplex:
    """``C + E`` with the basis of ``C`` first in each degree."""
    if C.ring.name != E.ring.name:
        raise RingMismatchError("summands over different rings")
    degs = range(min(C.lo, E.lo), max(C.hi, E.hi) + 1)
    mods = {n: FreeGradedModule(C.ring, tuple((0, x) for x in C.module(n).labels) +
                                tuple((1, x) for x in E.module(n).labels)) for n in degs}
    diffs = {n: _block_diag(C.diff(n), E.diff(n)) for n in degs}
    return FreeComplex(C.ring, mods, diffs, C.metagroup)


# ---------------------------------------------------------------------------
# chain maps


class ChainMap:
    """Degree-``degree`` family ``maps[n]: source_n -> target_{n+degree}``.

    ``iota`` optionally records the underlying metagroup map as a tuple
    ``(images, source_table, target_table)``; ``None`` means the identity.
    """

    def __init__(self, source: FreeComplex, target: FreeComplex, maps: Mapping[int, SparseMatrix] | None = None,
                 degree: int = 0, iota=None):
        self.source = source
        self.target = target
        self.degree = degree
        self.iota = iota
        self.maps = {}
        for n, m in (maps or {}).items():
            if m.shape != (target.dim(n + degree), source.dim(n)):
                raise ShapeError(f"component {n} has shape {m.shape}, expected "
                                 f"{(target.dim(n + degree), source.dim(n))}")
            if not m.is_zero():
                self.maps[n] = m

    def __getitem__(self, n: int) -> SparseMatrix:
        m = self.maps.get(n)
        if m is not None:
            return m
        return SparseMatrix.zero(self.target.dim(n + self.degree), self.source.dim(n), self.source.ring)

    @classmethod
    def identity(cls, C: FreeComplex):
        return cls(C, C, {n: SparseMatrix.identity(C.dim(n), C.ring) for n in C.degrees()})

    @classmethod
    def zero(cls, source: FreeComplex, target: FreeComplex, degree: int = 0):
        return cls(source, target, {}, degree)

    def _degrees(self):
        return range(min(self.source.lo, self.target.lo - self.degree) - 1,
                     max(self.source.hi, self.target.hi - self.degree) + 2)

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """``self o other``."""
        if other.target.dims() != self.source.dims():
            raise ShapeError("chain maps are not composable")
        maps = {}
        for n in other.source.degrees():
            maps[n] = self[n + other.degree] @ other[n]
        return ChainMap(other.source, self.target, maps, self.degree + other.degree)

    def _combine(self, other, sign):
        if self.degree != other.degree or self.source.dims() != other.source.dims() \
                or self.target.dims() != other.target.dims():
            raise ShapeError("maps have different shapes")
        maps = {n: self[n] + (other[n] if sign > 0 else -other[n]) for n in self.source.degrees()}
        return ChainMap(self.source, self.target, maps, self.degree, self.iota)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        return ChainMap(self.source, self.target, {n: m.scale(c) for n, m in self.maps.items()},
                        self.degree, self.iota)

    def __repr__(self):
        return f"ChainMap(degree={self.degree}, {self.source.dims()} -> {self.target.dims()})"


def inclusion(C: FreeComplex, S: FreeComplex) -> ChainMap:
    """``C -> C + E`` for ``S = direct_sum(C, E)``."""
    return ChainMap(C, S, {n: SparseMatrix._raw(S.dim(n), C.dim(n), C.ring,
                                                 {j: {j: C.ring.coerce(1)} for j in range(C.dim(n))})
                           for n in C.degrees()})


def projection(S: FreeComplex, C: FreeComplex) -> ChainMap:
    """``C + E -> C`` for ``S = direct_sum(C, E)``."""
    return ChainMap(S, C, {n: SparseMatrix._raw(C.dim(n), S.dim(n), C.ring,
                                                 {j: {j: C.ring.coerce(1)} for j in range(C.dim(n))})
                           for n in C.degrees()})


@dataclass
class ChainMapReport:
    ok: bool
    failures: list[tuple[int, int]] = field(default_factory=list)
    exact: bool = True

    def __bool__(self):
        return self.ok


def is_chain_map(f: ChainMap) -> ChainMapReport:
    """``d f = f d`` degree by degree; also classify exact (iota an automorphism) vs generic."""
    if f.degree != 0:
        raise ShapeError("is_chain_map expects a degree-0 map")
    fails = []
    S, T = f.source, f.target
    for n in range(min(S.lo, T.lo), max(S.hi, T.hi) + 2):
        lhs = T.diff(n) @ f[n]
        rhs = f[n - 1] @ S.diff(n)
        diff = lhs - rhs
        if not diff.is_zero():
            fails.append((n, diff.first_nonzero_column()))
    exact = True
    if f.iota is not None:
        images, src, tgt = f.iota
        rep = check_homomorphism(images, src, tgt)
        exact = rep.ok and rep.injective and rep.surjective and src == tgt
    return ChainMapReport(not fails, fails, exact)


def is_homotopy(s: ChainMap, f: ChainMap, g: ChainMap, degrees: Iterable[int] | None = None) -> ChainMapReport:
    """Check ``g - f = d s + s d`` in each degree (all degrees by default)."""
    if s.degree != 1:
        raise ShapeError("a homotopy has degree +1")
    S, T = f.source, f.target
    if degrees is None:
        degrees = range(min(S.lo, T.lo) - 1, max(S.hi, T.hi) + 2)
    fails = []
    for n in degrees:
        lhs = g[n] - f[n]
        rhs = T.diff(n + 1) @ s[n] + s[n - 1] @ S.diff(n)
        diff = lhs - rhs
        if not diff.is_zero():
            fails.append((n, diff.first_nonzero_column()))
    return ChainMapReport(not fails, fails)


def conjugate_homotopy(eta: ChainMap, s: ChainMap, psi: ChainMap) -> ChainMap:
    """``eta o s o psi`` relates ``eta f psi`` with ``eta g psi``."""
    return eta @ s @ psi


def compose_homotopy(s2: ChainMap, f1: ChainMap, g2: ChainMap, s1: ChainMap) -> ChainMap:
    """``s2 o f1 + g2 o s1`` relates ``f2 f1`` with ``g2 g1``."""
    return (s2 @ f1) + (g2 @ s1)


@dataclass
class Homotopism:
    """``forward`` and ``backward`` with homotopies to the identities on both ends."""

    forward: ChainMap
    backward: ChainMap
    source_homotopy: ChainMap
    target_homotopy: ChainMap

    def verify(self, source_degrees=None, target_degrees=None) -> bool:
        src = ChainMap.identity(self.forward.source)
        tgt = ChainMap.identity(self.forward.target)
        return bool(is_homotopy(self.source_homotopy, self.backward @ self.forward, src, source_degrees)) and \
            bool(is_homotopy(self.target_homotopy, self.forward @ self.backward, tgt, target_degrees))


# ---------------------------------------------------------------------------
# splittings


def _generalized_inverse(d: SparseMatrix) -> SparseMatrix | None:
    # U d V = S  =>  s = V S^+ U satisfies d s d = d iff every divisor is a unit
    D = diagonalize(d)
    ring = d.ring
    if not all(ring.is_unit(x) for x in D.diagonal):
        return None
    rows = d.cols
    trip = []
    for k, x in enumerate(D.diagonal):
        inv = ring.div(1, x)
        for i in range(rows):
            vi = D.V[i][k]
            if not vi:
                continue
            for j in range(d.rows):
                uj = D.U[k][j]
                if uj:
                    trip.append((i, j, vi * inv * uj))
    return SparseMatrix.from_triplets(d.cols, d.rows, ring, trip)


def find_splitting(C: FreeComplex) -> ChainMap | None:
    """A degree +1 map ``s`` with ``d s d = d``, or ``None`` if none exists.

    Solved degree by degree: ``d_{n+1}`` has a generalised inverse exactly
    when all of its invariant factors are units.
    """
    maps = {}
    for n in range(C.lo - 1, C.hi + 1):
        d = C.diff(n + 1)
        if d.is_zero():
            continue
        s = _generalized_inverse(d)
        if s is None:
            return None
        maps[n] = s
    return ChainMap(C, C, maps, degree=1)


def _image_basis(P: SparseMatrix) -> SparseMatrix:
    # columns of U^{-1} scaled by the divisors span the image
    D = diagonalize(P)
    cols = []
    for k, x in enumerate(D.diagonal):
        cols.append({i: D.Uinv[i][k] * x for i in range(P.rows) if D.Uinv[i][k]})
    return SparseMatrix.from_columns(P.rows, P.ring, cols)


def _is_invertible(M: SparseMatrix) -> bool:
    if M.rows != M.cols:
        return False
    if M.rows == 0:
        return True
    D = diagonalize(M)
    return D.rank == M.rows and all(M.ring.is_unit(x) for x in D.diagonal)


@dataclass
class SplitReport:
    ok: bool
    checks: dict[str, bool]
    summands: list[tuple[int, str, int]]
    P: dict[int, SparseMatrix] = field(default_factory=dict, repr=False)
    Q: dict[int, SparseMatrix] = field(default_factory=dict, repr=False)
    Z: dict[int, SparseMatrix] = field(default_factory=dict, repr=False)
    B: dict[int, SparseMatrix] = field(default_factory=dict, repr=False)

    def __bool__(self):
        return self.ok


def split_decomposition(C: FreeComplex, s: ChainMap) -> SplitReport:
    """Projectors ``1 - s d`` (onto cycles) and ``d s`` (onto boundaries), the
    complements ``P_n``, ``Q_n`` and the summands of length 0 and 1."""
    ring = C.ring
    for n in range(C.lo, C.hi + 1):
        d = C.diff(n)
        if not (d @ s[n - 1] @ d == d):
            raise NotASplittingError(f"d s d != d in degree {n}")
    checks = {"idempotent": True, "C=Z+Q": True, "Z=B+P": True, "T acyclic": True, "C=sum": True}
    summands = []
    Zs, Bs, Ps, Qs = {}, {}, {}, {}
    for n in C.degrees():
        dim = C.dim(n)
        I = SparseMatrix.identity(dim, ring)
        d_n, d_up = C.diff(n), C.diff(n + 1)
        sd = s[n - 1] @ d_n
        pZ = I - sd
        pB = d_up @ s[n]
        eP = (I - pB) @ pZ
        for p in (pZ, pB, sd, eP):
            if p @ p != p:
                checks["idempotent"] = False
        Zb, Bb, Pb, Qb = (_image_basis(x) for x in (pZ, pB, eP, sd))
        Zs[n], Bs[n], Ps[n], Qs[n] = Zb, Bb, Pb, Qb
        if not (d_n @ Zb).is_zero():
            checks["C=Z+Q"] = False
        if not _is_invertible(Zb.hstack(Qb)):
            checks["C=Z+Q"] = False
        # Z = B + P: together a basis of ker d, same rank as the kernel
        ZP = Bb.hstack(Pb)
        if ZP.cols != Zb.cols or not (d_n @ ZP).is_zero() or diagonalize(ZP).rank != ZP.cols:
            checks["Z=B+P"] = False
        if not _is_invertible(Pb.hstack(Bb).hstack(Qb)):
            checks["C=sum"] = False
        if Pb.cols:
            summands.append((n, "S", Pb.cols))
    for n in C.degrees():
        Qb = Qs[n]
        if not Qb.cols:
            continue
        # d restricted to Q_n lands in B_{n-1}; it must be an isomorphism
        dQ = C.diff(n) @ Qb
        Bprev = Bs.get(n - 1)
        if Bprev is None or Bprev.cols != Qb.cols:
            checks["T acyclic"] = False
            continue
        D = diagonalize(Bprev)
        coords = []
        from .exactlinalg import solve_exact
        for j in range(dQ.cols):
            y = solve_exact(Bprev, dQ.column(j), D)
            if y is None:
                checks["T acyclic"] = False
                break
            coords.append(y)
        else:
            if not _is_invertible(SparseMatrix.from_columns(Bprev.cols, ring, coords)):
                checks["T acyclic"] = False
        summands.append((n, "T", Qb.cols))
    return SplitReport(all(checks.values()), checks, summands, Ps, Qs, Zs, Bs)


# ---------------------------------------------------------------------------
# file format


def complex_to_json(C: FreeComplex) -> str:
    bases = {}
    for n in C.degrees():
        m = C.module(n)
        bases[str(n)] = [list(w) for w in m.words] if m.words is not None else [str(x) for x in m.labels]
    obj = {
        "ring": C.ring.name,
        "metagroup": json.loads(table_to_json(C.metagroup)) if C.metagroup is not None else None,
        "degrees": [C.lo, C.hi],
        "bases": bases,
        "diff": {str(n): [[i, j, C.ring.to_str(v)] for i, j, v in d.triplets()]
                 for n, d in sorted(C.diffs.items())},
    }
    return json.dumps(obj)


def complex_from_json(text) -> FreeComplex:
    obj = json.loads(text) if isinstance(text, str) else text
    ring = ring_from_name(obj["ring"])
    mg = obj.get("metagroup")
    table = table_from_json(mg) if isinstance(mg, dict) else None
    mods = {}
    for n, basis in obj["bases"].items():
        if basis and isinstance(basis[0], list):
            mods[int(n)] = FreeGradedModule.graded(ring, basis)
        else:
            mods[int(n)] = FreeGradedModule(ring, tuple(basis))
    lo, hi = obj["degrees"]
    for n in range(lo, hi + 1):
        mods.setdefault(n, FreeGradedModule(ring, ()))
    diffs = {}
    for n, trip in obj.get("diff", {}).items():
        n = int(n)
        diffs[n] = SparseMatrix.from_triplets(len(mods.get(n - 1, ())), len(mods[n]), ring,
                                              ((i, j, ring.parse(str(v))) for i, j, v in trip))
    return FreeComplex(ring, mods, diffs, table)
