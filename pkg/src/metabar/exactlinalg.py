"""Exact sparse linear algebra over Z, Q and prime fields.

Matrices are column-major dictionaries of nonzero entries.  Values are plain
Python ``int`` (Z and F_p, residues kept in ``[0, p)``) or
``fractions.Fraction`` (Q), so every computation is exact.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Ring", "ZZ", "QQ", "GF", "ring_from_name",
    "SparseMatrix", "matmul", "smith_normal_form", "diagonalize",
    "kernel_basis", "solve_exact", "quotient_invariants", "QuotientInvariants",
    "elementary_divisors", "rank", "matrix_to_json", "matrix_from_json",
    "RingMismatchError",
]


class RingMismatchError(ValueError):
    pass


class Ring:
    """Coefficient ring.  Subclasses fix how raw Python values are normalised."""

    name = "?"
    is_field = False

    def coerce(self, x):
        raise NotImplementedError

    def reduce(self, x):
        return x

    def div(self, a, b):
        raise NotImplementedError

    def is_unit(self, x) -> bool:
        raise NotImplementedError

    def to_str(self, x) -> str:
        return str(x)

    def parse(self, s: str):
        return self.coerce(Fraction(s))

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return ring_from_name, (self.name,)


class IntegerRing(Ring):
    name = "Z"

    def coerce(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError(f"{x} is not an integer")
            return x.numerator
        if isinstance(x, int):
            return int(x)
        raise TypeError(f"cannot coerce {x!r} into Z")

    def div(self, a, b):
        q, r = divmod(a, b)
        if r:
            raise ArithmeticError(f"{a} is not divisible by {b} in Z")
        return q

    def is_unit(self, x):
        return x == 1 or x == -1


class RationalField(Ring):
    name = "Q"
    is_field = True

    def coerce(self, x):
        return Fraction(x)

    def div(self, a, b):
        return Fraction(a) / b

    def is_unit(self, x):
        return x != 0

    def to_str(self, x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class PrimeField(Ring):
    is_field = True

    def __init__(self, p: int):
        if p < 2 or p >= 2 ** 31 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not a prime below 2^31")
        self.p = p
        self.name = f"Fp:{p}"

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def reduce(self, x):
        return x % self.p

    def div(self, a, b):
        if b % self.p == 0:
            raise ZeroDivisionError("division by zero in a prime field")
        return a * pow(b, -1, self.p) % self.p

    def is_unit(self, x):
        return x % self.p != 0


ZZ = IntegerRing()
QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def ring_from_name(name: str) -> Ring:
    if name == "Z":
        return ZZ
    if name == "Q":
        return QQ
    if name.startswith("Fp:"):
        return GF(int(name[3:]))
    raise ValueError(f"unknown ring {name!r}")


# ---------------------------------------------------------------------------


class SparseMatrix:
    """Immutable sparse matrix; ``data[col][row] = value`` with no stored zeros."""

    __slots__ = ("rows", "cols", "ring", "data")

    def __init__(self, rows: int, cols: int, ring: Ring, data: Mapping[int, Mapping[int, object]] | None = None):
        self.rows = rows
        self.cols = cols
        self.ring = ring
        self.data = {j: dict(c) for j, c in (data or {}).items() if c}

    @classmethod
    def _raw(cls, rows, cols, ring, data):
        # trusted constructor: data already normalised and owned
        m = cls.__new__(cls)
        m.rows, m.cols, m.ring, m.data = rows, cols, ring, data
        return m

    @classmethod
    def from_triplets(cls, rows: int, cols: int, ring: Ring, triplets: Iterable[tuple[int, int, object]]):
        data: dict[int, dict[int, object]] = {}
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            col = data.setdefault(j, {})
            col[i] = col.get(i, 0) + ring.coerce(v)
        return cls._raw(rows, cols, ring, _clean(data, ring))

    @classmethod
    def from_columns(cls, rows: int, ring: Ring, columns: Sequence[Mapping[int, object]]):
        data = {j: {i: ring.coerce(v) for i, v in c.items()} for j, c in enumerate(columns)}
        return cls._raw(rows, len(columns), ring, _clean(data, ring))

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[object]], ring: Ring, ncols: int | None = None):
        r = len(rows)
        c = len(rows[0]) if r else (ncols or 0)
        return cls.from_triplets(r, c, ring, ((i, j, v) for i, row in enumerate(rows)
                                              for j, v in enumerate(row) if v))

    @classmethod
    def identity(cls, n: int, ring: Ring):
        return cls._raw(n, n, ring, {j: {j: ring.coerce(1)} for j in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int, ring: Ring):
        return cls._raw(rows, cols, ring, {})

    @property
    def shape(self):
        return self.rows, self.cols

    @property
    def nnz(self):
        return sum(len(c) for c in self.data.values())

    def column(self, j: int) -> dict[int, object]:
        return self.data.get(j, {})

    def triplets(self) -> list[tuple[int, int, object]]:
        return sorted((i, j, v) for j, c in self.data.items() for i, v in c.items())

    def to_dense(self) -> list[list[object]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for j, c in self.data.items():
            for i, v in c.items():
                out[i][j] = v
        return out

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.ring.name) == (other.rows, other.cols, other.ring.name) \
            and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, self.ring.name, tuple(self.triplets())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, {self.ring}, nnz={self.nnz})"

    def _same(self, other):
        if self.ring.name != other.ring.name:
            raise RingMismatchError(f"{self.ring} vs {other.ring}")

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        self._same(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        data = {j: dict(c) for j, c in self.data.items()}
        for j, c in other.data.items():
            col = data.setdefault(j, {})
            for i, v in c.items():
                col[i] = col.get(i, 0) + v
        return SparseMatrix._raw(self.rows, self.cols, self.ring, _clean(data, self.ring))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.ring.coerce(c)
        data = {j: {i: v * c for i, v in col.items()} for j, col in self.data.items()}
        return SparseMatrix._raw(self.rows, self.cols, self.ring, _clean(data, self.ring))

    def transpose(self):
        data: dict[int, dict[int, object]] = {}
        for j, c in self.data.items():
            for i, v in c.items():
                data.setdefault(i, {})[j] = v
        return SparseMatrix._raw(self.cols, self.rows, self.ring, data)

    T = property(transpose)

    def apply(self, vec: Mapping[int, object]) -> dict[int, object]:
        """Matrix times a sparse column vector ``{index: value}``."""
        acc: dict[int, object] = {}
        for k, x in vec.items():
            for i, v in self.data.get(k, {}).items():
                acc[i] = acc.get(i, 0) + v * x
        red = self.ring.reduce
        return {i: y for i, v in acc.items() if (y := red(v))}

    def select_columns(self, idx: Sequence[int]):
        return SparseMatrix._raw(self.rows, len(idx), self.ring,
                                 {k: dict(self.data[j]) for k, j in enumerate(idx) if j in self.data})

    def select_rows(self, idx: Sequence[int]):
        pos = {i: k for k, i in enumerate(idx)}
        data = {}
        for j, c in self.data.items():
            col = {pos[i]: v for i, v in c.items() if i in pos}
            if col:
                data[j] = col
        return SparseMatrix._raw(len(idx), self.cols, self.ring, data)

    def hstack(self, other):
        self._same(other)
        if self.rows != other.rows:
            raise ValueError("row counts differ")
        data = {j: dict(c) for j, c in self.data.items()}
        for j, c in other.data.items():
            data[j + self.cols] = dict(c)
        return SparseMatrix._raw(self.rows, self.cols + other.cols, self.ring, data)

    def first_nonzero_column(self):
        return min(self.data) if self.data else None


def _clean(data, ring):
    red = ring.reduce
    out = {}
    for j, c in data.items():
        col = {i: y for i, v in c.items() if (y := red(v))}
        if col:
            out[j] = col
    return out


def matmul(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    A._same(B)
    if A.cols != B.rows:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    adata = A.data
    red = A.ring.reduce
    out = {}
    for j, bcol in B.data.items():
        acc: dict[int, object] = {}
        for k, b in bcol.items():
            acol = adata.get(k)
            if acol:
                for i, a in acol.items():
                    acc[i] = acc.get(i, 0) + a * b
        col = {i: y for i, v in acc.items() if (y := red(v))}
        if col:
            out[j] = col
    return SparseMatrix._raw(A.rows, B.cols, A.ring, out)


# ---------------------------------------------------------------------------
# dense diagonalisation


@dataclass
class Diagonalization:
    """``U @ M @ V = S`` with ``S`` diagonal; ``Uinv``/``Vinv`` kept for coordinate changes."""

    U: list[list]
    S: list[list]
    V: list[list]
    Uinv: list[list]
    Vinv: list[list]
    diagonal: list
    ring: Ring

    @property
    def rank(self):
        return len(self.diagonal)


def _pick_pivot(A, k, ring):
    best = None
    rows, cols = len(A), len(A[0]) if A else 0
    for i in range(k, rows):
        row = A[i]
        for j in range(k, cols):
            v = row[j]
            if v:
                if ring.is_field:
                    return i, j
                a = abs(v)
                if best is None or a < best[0]:
                    best = (a, i, j)
                    if a == 1:
                        return i, j
    return None if best is None else best[1:]


def diagonalize(M: SparseMatrix) -> Diagonalization:
    """Smith form over Z, rank normal form over a field.

    Pivot rule: smallest absolute value (first nonzero over a field), ties
    broken by lowest row then lowest column.  Fully deterministic.
    """
    ring = M.ring
    m, n = M.rows, M.cols
    A = M.to_dense()
    one = ring.coerce(1)
    U = [[one if i == j else 0 for j in range(m)] for i in range(m)]
    Uinv = [row[:] for row in U]
    V = [[one if i == j else 0 for j in range(n)] for i in range(n)]
    Vinv = [row[:] for row in V]
    red = ring.reduce

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for r in Uinv:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def row_add(dst, src, c):
        # row_dst += c * row_src
        A[dst] = [red(a + c * b) for a, b in zip(A[dst], A[src])]
        U[dst] = [red(a + c * b) for a, b in zip(U[dst], U[src])]
        for r in Uinv:
            r[src] = red(r[src] - c * r[dst])

    def col_add(dst, src, c):
        # col_dst += c * col_src
        for r in A:
            if r[src]:
                r[dst] = red(r[dst] + c * r[src])
        for r in V:
            if r[src]:
                r[dst] = red(r[dst] + c * r[src])
        Vinv[src] = [red(a - c * b) for a, b in zip(Vinv[src], Vinv[dst])]

    def row_scale(i, c, cinv):
        A[i] = [red(a * c) for a in A[i]]
        U[i] = [red(a * c) for a in U[i]]
        for r in Uinv:
            r[i] = red(r[i] * cinv)

    diag = []
    k = 0
    while k < min(m, n):
        piv = _pick_pivot(A, k, ring)
        if piv is None:
            break
        i, j = piv
        if i != k:
            row_swap(i, k)
        if j != k:
            col_swap(j, k)
        while True:
            p = A[k][k]
            dirty = False
            for i in range(k + 1, m):
                v = A[i][k]
                if v:
                    if ring.is_field:
                        row_add(i, k, red(-ring.div(v, p)))
                    else:
                        row_add(i, k, -(v // p))
                        if A[i][k]:
                            dirty = True
            for j in range(k + 1, n):
                v = A[k][j]
                if v:
                    if ring.is_field:
                        col_add(j, k, red(-ring.div(v, p)))
                    else:
                        col_add(j, k, -(v // p))
                        if A[k][j]:
                            dirty = True
            if dirty:
                # a smaller remainder appeared in row/column k; move it to the pivot
                piv = _pick_pivot_cross(A, k, m, n)
                i, j = piv
                if i != k:
                    row_swap(i, k)
                if j != k:
                    col_swap(j, k)
                continue
            if not ring.is_field:
                bad = next(((i, j) for i in range(k + 1, m) for j in range(k + 1, n)
                            if A[i][j] % p), None)
                if bad is not None:
                    row_add(k, bad[0], 1)
                    continue
            break
        p = A[k][k]
        if ring.is_field:
            if p != one:
                row_scale(k, ring.div(1, p), p)
        elif p < 0:
            row_scale(k, -1, -1)
        diag.append(A[k][k])
        k += 1
    return Diagonalization(U, A, V, Uinv, Vinv, diag, ring)


def _pick_pivot_cross(A, k, m, n):
    # smallest entry in row k or column k; row k wins ties, then lower index
    best = None
    for j in range(k, n):
        v = A[k][j]
        if v and (best is None or abs(v) < best[0]):
            best = (abs(v), k, j)
    for i in range(k + 1, m):
        v = A[i][k]
        if v and abs(v) < best[0]:
            best = (abs(v), i, k)
    return best[1], best[2]


def smith_normal_form(M: SparseMatrix):
    """Return ``(U, S, V)`` with ``U @ M @ V == S`` and ``s_1 | s_2 | ...``."""
    if M.ring.name != "Z":
        raise RingMismatchError("Smith normal form is computed over Z only")
    D = diagonalize(M)
    ring = M.ring
    return (SparseMatrix.from_dense(D.U, ring, M.rows), SparseMatrix.from_dense(D.S, ring, M.cols),
            SparseMatrix.from_dense(D.V, ring, M.cols))


def kernel_basis(M: SparseMatrix) -> SparseMatrix:
    """Columns form a basis of the null space (a lattice basis over Z)."""
    D = diagonalize(M)
    r = D.rank
    cols = [{i: D.V[i][j] for i in range(M.cols) if D.V[i][j]} for j in range(r, M.cols)]
    return SparseMatrix.from_columns(M.cols, M.ring, cols)


def solve_exact(M: SparseMatrix, b: Mapping[int, object] | Sequence[object], D: Diagonalization | None = None):
    """Some ``x`` with ``M x = b`` as a sparse dict, or ``None`` when unsolvable."""
    ring = M.ring
    if not isinstance(b, Mapping):
        if len(b) != M.rows:
            raise ValueError("right-hand side has the wrong length")
        b = {i: ring.coerce(v) for i, v in enumerate(b) if v}
    D = D or diagonalize(M)
    red = ring.reduce
    Ub = [red(sum(D.U[i][k] * v for k, v in b.items())) for i in range(M.rows)]
    if any(Ub[i] for i in range(D.rank, M.rows)):
        return None
    y = []
    for i, s in enumerate(D.diagonal):
        if ring.is_field:
            y.append(ring.div(Ub[i], s))
        else:
            q, rem = divmod(Ub[i], s)
            if rem:
                return None
            y.append(q)
    x = {}
    for row in range(M.cols):
        v = red(sum(D.V[row][i] * y[i] for i in range(len(y)) if y[i]))
        if v:
            x[row] = v
    return x


@dataclass(frozen=True)
class QuotientInvariants:
    ring: str
    rank: int
    torsion: tuple[int, ...] = ()

    def is_zero(self):
        return self.rank == 0 and not self.torsion

    def __str__(self):
        if self.is_zero():
            return "0"
        base = "Z" if self.ring == "Z" else self.ring.replace("Fp:", "F")
        parts = [f"{base}^{self.rank}" if self.rank > 1 else base] if self.rank else []
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts)


def quotient_invariants(Z: SparseMatrix, B: SparseMatrix) -> QuotientInvariants:
    """Invariants of ``span(Z) / span(B)``; ``Z`` must have independent columns."""
    ring = Z.ring
    DZ = diagonalize(Z)
    if DZ.rank != Z.cols:
        raise ValueError("columns of Z are not independent")
    coords = []
    for j in range(B.cols):
        y = solve_exact(Z, B.column(j), DZ)
        if y is None:
            raise ValueError(f"boundary column {j} does not lie in the cycle lattice")
        coords.append(y)
    Y = SparseMatrix.from_columns(Z.cols, ring, coords)
    divs = diagonalize(Y).diagonal if Y.cols else []
    torsion = tuple(d for d in divs if not ring.is_unit(d)) if not ring.is_field else ()
    return QuotientInvariants(ring.name, Z.cols - len(divs), torsion)


# ---------------------------------------------------------------------------
# sparse elimination for large matrices


def elementary_divisors(M: SparseMatrix) -> list:
    """Nonzero invariant factors of ``M`` (all ones over a field).

    Unit pivots are eliminated sparsely with a fewest-entries heuristic; any
    remainder without unit entries is finished by the dense Smith form.
    """
    ring = M.ring
    # rows of M^T (i.e. source columns) are short for boundary matrices
    rows: dict[int, dict[int, object]] = {j: dict(c) for j, c in M.data.items()}
    colidx: dict[int, set[int]] = {}
    for r, row in rows.items():
        for c in row:
            colidx.setdefault(c, set()).add(r)
    is_unit = ring.is_unit
    red = ring.reduce
    heap = [(len(row), r) for r, row in rows.items()]
    heapq.heapify(heap)
    units = 0
    while heap:
        ln, r = heapq.heappop(heap)
        row = rows.get(r)
        if row is None or len(row) != ln:
            continue
        best = None
        for c, v in row.items():
            if is_unit(v):
                cnt = len(colidx[c])
                if best is None or cnt < best[0]:
                    best = (cnt, c)
                    if cnt == 1:
                        break
        if best is None:
            continue
        c = best[1]
        p = row[c]
        pinv = ring.div(1, p)
        for r2 in list(colidx[c]):
            if r2 == r:
                continue
            row2 = rows[r2]
            f = red(-row2[c] * pinv)
            for cc, v in row.items():
                nv = red(row2.get(cc, 0) + f * v)
                if nv:
                    if cc not in row2:
                        colidx[cc].add(r2)
                    row2[cc] = nv
                elif cc in row2:
                    del row2[cc]
                    colidx[cc].discard(r2)
            heapq.heappush(heap, (len(row2), r2))
        for cc in row:
            colidx[cc].discard(r)
        del rows[r]
        units += 1
    rest = [row for row in rows.values() if row]
    divs = [ring.coerce(1)] * units
    if rest:
        cols = sorted({c for row in rest for c in row})
        pos = {c: k for k, c in enumerate(cols)}
        dense = SparseMatrix.from_triplets(len(rest), len(cols), ring,
                                           ((i, pos[c], v) for i, row in enumerate(rest) for c, v in row.items()))
        divs += diagonalize(dense).diagonal
    if not ring.is_field:
        divs = sorted(abs(d) for d in divs)
    return divs


def rank(M: SparseMatrix) -> int:
    return len(elementary_divisors(M))


# ---------------------------------------------------------------------------
# file format


def matrix_to_json(M: SparseMatrix) -> str:
    return json.dumps({"ring": M.ring.name, "rows": M.rows, "cols": M.cols,
                       "entries": [[i, j, M.ring.to_str(v)] for i, j, v in M.triplets()]})


def matrix_from_json(text) -> SparseMatrix:
    obj = json.loads(text) if isinstance(text, str) else text
    ring = ring_from_name(obj["ring"])
    return SparseMatrix.from_triplets(obj["rows"], obj["cols"], ring,
                                      ((i, j, ring.parse(str(v))) for i, j, v in obj["entries"]))
