"""Finite metagroups given by multiplication tables.

A metagroup is a unital quasigroup whose associators are central:
``(ab)c = t3(a, b, c) * (a(bc))`` with ``t3`` taking values in a subgroup
``psi`` of the centre.  Elements are dense indices ``0..N-1``; display names
are only used for printing and serialisation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

__all__ = [
    "MalformedTableError",
    "NotAMetagroupError",
    "MetagroupTable",
    "ParenTree",
    "ValidationReport",
    "SubstructureReport",
    "HomomorphismReport",
    "mul",
    "div",
    "t3",
    "t2",
    "tn",
    "product_tree",
    "validate_metagroup",
    "substructures",
    "psi_closure",
    "generate_table",
    "parse_table_spec",
    "cayley_dickson",
    "check_homomorphism",
    "table_to_json",
    "table_from_json",
    "FramingReport",
    "framing_reduction_check",
    "left_product",
    "cyclic",
    "dihedral",
    "quaternion8",
    "direct_product",
]

MAX_ORDER = 1 << 16


class MalformedTableError(ValueError):
    """The table is not even a well-formed N x N array of indices."""


class NotAMetagroupError(ValueError):
    """A cocycle value fell outside the centre (or outside psi)."""


@dataclass(frozen=True, eq=True)
class MetagroupTable:
    order: int
    elements: tuple[str, ...]
    unit: int
    table: tuple[tuple[int, ...], ...]
    psi: tuple[int, ...] | None = None

    def __post_init__(self):
        n = self.order
        if not isinstance(n, int) or n < 1 or n > MAX_ORDER:
            raise MalformedTableError(f"order must be in 1..{MAX_ORDER}, got {n!r}")
        object.__setattr__(self, "elements", tuple(str(x) for x in self.elements))
        object.__setattr__(self, "table", tuple(tuple(int(x) for x in row) for row in self.table))
        if len(self.elements) != n:
            raise MalformedTableError(f"{len(self.elements)} names for order {n}")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise MalformedTableError("table is not square of size order")
        if any(not 0 <= x < n for row in self.table for x in row):
            raise MalformedTableError("table entry out of range")
        if not 0 <= self.unit < n:
            raise MalformedTableError("unit index out of range")
        if self.psi is not None:
            psi = tuple(sorted(set(int(x) for x in self.psi)))
            if any(not 0 <= x < n for x in psi):
                raise MalformedTableError("psi index out of range")
            object.__setattr__(self, "psi", psi)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"MetagroupTable(order={self.order}, unit={self.unit})"

    def name(self, g: int) -> str:
        return self.elements[g]

    def index(self, name: str) -> int:
        return self.elements.index(name)

    @cached_property
    def _ldiv(self) -> tuple[tuple[int, ...], ...]:
        # _ldiv[a][b] = x with a x = b
        n = self.order
        out = [[-1] * n for _ in range(n)]
        for a in range(n):
            row = self.table[a]
            for x in range(n):
                out[a][row[x]] = x
        return tuple(tuple(r) for r in out)

    @cached_property
    def _rdiv(self) -> tuple[tuple[int, ...], ...]:
        # _rdiv[a][b] = y with y a = b
        n = self.order
        out = [[-1] * n for _ in range(n)]
        for y in range(n):
            row = self.table[y]
            for a in range(n):
                out[a][row[a]] = y
        return tuple(tuple(r) for r in out)

    @cached_property
    def effective_psi(self) -> tuple[int, ...]:
        """The supplied psi, or the smallest admissible one."""
        if self.psi is not None:
            return self.psi
        return tuple(sorted(psi_closure(self)))

    @cached_property
    def psi_set(self) -> frozenset[int]:
        return frozenset(self.effective_psi)

    @cached_property
    def center(self) -> frozenset[int]:
        return frozenset(substructures(self).center)

    def with_psi(self, psi: Iterable[int] | None) -> "MetagroupTable":
        return MetagroupTable(self.order, self.elements, self.unit, self.table,
                              None if psi is None else tuple(psi))


def _check_index(T: MetagroupTable, *xs: int):
    for x in xs:
        if not 0 <= x < T.order:
            raise IndexError(f"element index {x} out of range for order {T.order}")


def mul(T: MetagroupTable, a: int, b: int) -> int:
    _check_index(T, a, b)
    return T.table[a][b]


def div(T: MetagroupTable, side: str, a: int, b: int) -> int:
    """Left division ``a\\b`` (x with ax = b) or right division ``b/a`` (y with ya = b)."""
    _check_index(T, a, b)
    if side == "left":
        x = T._ldiv[a][b]
    elif side == "right":
        x = T._rdiv[a][b]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if x < 0:
        raise NotAMetagroupError(f"no {side} division of {b} by {a}: table is not a Latin square")
    return x


def inv_left(T: MetagroupTable, a: int) -> int:
    return div(T, "left", a, T.unit)


def inv_right(T: MetagroupTable, a: int) -> int:
    return div(T, "right", a, T.unit)


def t3(T: MetagroupTable, a: int, b: int, c: int) -> int:
    """Associator ``t`` with ``(ab)c = t * (a(bc))``."""
    tab = T.table
    lhs = tab[tab[a][b]][c]
    rhs = tab[a][tab[b][c]]
    t = div(T, "right", rhs, lhs)
    if t not in T.center:
        raise NotAMetagroupError(f"t3{(a, b, c)} = {t} is not central")
    if div(T, "left", rhs, lhs) != t:
        raise NotAMetagroupError(f"left and right associator quotients differ at {(a, b, c)}")
    return t


def t2(T: MetagroupTable, a: int, b: int) -> int:
    """Commutator ``t`` with ``ab = t * (ba)``."""
    return div(T, "right", T.table[b][a], T.table[a][b])


# ---------------------------------------------------------------------------
# parenthesisations


@dataclass(frozen=True)
class ParenTree:
    """Full binary tree; a leaf is ``()`` and an inner node is ``(left, right)``."""

    shape: tuple = ()

    @staticmethod
    def leaf() -> "ParenTree":
        return ParenTree(())

    @staticmethod
    def join(left: "ParenTree", right: "ParenTree") -> "ParenTree":
        return ParenTree((left.shape, right.shape))

    @cached_property
    def arity(self) -> int:
        def count(s):
            return 1 if s == () else count(s[0]) + count(s[1])
        return count(self.shape)

    @staticmethod
    def left_comb(n: int) -> "ParenTree":
        """``l(n)``: ``(...((x1 x2) x3)...) xn``."""
        if n < 1:
            raise ValueError("a tree needs at least one leaf")
        s = ()
        for _ in range(n - 1):
            s = (s, ())
        return ParenTree(s)

    @staticmethod
    def right_comb(n: int) -> "ParenTree":
        if n < 1:
            raise ValueError("a tree needs at least one leaf")
        s = ()
        for _ in range(n - 1):
            s = ((), s)
        return ParenTree(s)

    @staticmethod
    def merged_comb(n: int, j: int) -> "ParenTree":
        """Leaves ``j, j+1`` (0-based) multiplied first, then a left comb over the rest.

        ``merged_comb(n + 2, j)`` is the order ``v_{j+1}(n + 2)`` used by the
        bar boundary; ``merged_comb(n, 0)`` coincides with ``left_comb(n)``.
        """
        if not 0 <= j < n - 1:
            raise ValueError(f"merge position {j} invalid for {n} leaves")
        items = [()] * n
        items[j:j + 2] = [((), ())]
        s = items[0]
        for x in items[1:]:
            s = (s, x)
        return ParenTree(s)

    @staticmethod
    def framed(inner: "ParenTree") -> "ParenTree":
        """``(g * inner) * y``: two extra outer leaves, as in the framed boundary."""
        return ParenTree((((), inner.shape), ()))

    def evaluate(self, T: MetagroupTable, gs: Sequence[int]) -> int:
        tab = T.table
        it = iter(gs)

        def ev(s):
            if s == ():
                return next(it)
            a = ev(s[0])
            b = ev(s[1])
            return tab[a][b]
        return ev(self.shape)

    def __str__(self):
        counter = itertools.count(1)

        def show(s):
            if s == ():
                return f"x{next(counter)}"
            return f"({show(s[0])}{show(s[1])})"
        out = show(self.shape)
        return out[1:-1] if out.startswith("(") else out


def product_tree(T: MetagroupTable, gs: Sequence[int], tree: ParenTree) -> int:
    if len(gs) != tree.arity:
        raise ValueError(f"tree has {tree.arity} leaves but {len(gs)} factors were given")
    _check_index(T, *gs)
    return tree.evaluate(T, gs)


def left_product(T: MetagroupTable, gs: Sequence[int]) -> int:
    """``{g1, ..., gn}_{l(n)}`` without building a tree."""
    tab = T.table
    it = iter(gs)
    r = next(it)
    for g in it:
        r = tab[r][g]
    return r


def tn(T: MetagroupTable, gs: Sequence[int], q: ParenTree, v: ParenTree) -> int:
    """Central ``t`` with ``{gs}_q = t * {gs}_v``."""
    a = product_tree(T, gs, q)
    b = product_tree(T, gs, v)
    t = div(T, "right", b, a)
    if t not in T.psi_set:
        raise NotAMetagroupError(f"tn{tuple(gs)} = {t} lies outside psi")
    return t


@dataclass
class FramingReport:
    ok: bool
    checked: int
    failures: list[tuple] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def framing_reduction_check(T: MetagroupTable, max_n: int, frames: str = "unit",
                            words: Iterable[Sequence[int]] | None = None) -> FramingReport:
    """Compare the framed twist of a boundary face with the unframed one.

    ``frames="unit"``: ``t_{n+4}(e, w, e; l(n+4), (e v_{j+1}) e) = t_{n+2}(w; l(n+2), v_{j+1})``.
    ``frames="all"``: every frame pair ``g, y`` with framed trees on both sides.
    """
    if frames not in ("unit", "all"):
        raise ValueError("frames must be 'unit' or 'all'")
    e = T.unit
    pairs = [(e, e)] if frames == "unit" else list(itertools.product(range(T.order), repeat=2))
    checked = 0
    fails = []
    for n in range(max_n + 1):
        lc = ParenTree.left_comb(n + 2)
        outer = ParenTree.left_comb(n + 4) if frames == "unit" else ParenTree.framed(lc)
        trees = [ParenTree.merged_comb(n + 2, j) for j in range(n + 1)]
        source = words if words is not None else itertools.product(range(T.order), repeat=n + 2)
        for w in source:
            w = tuple(w)
            if len(w) != n + 2:
                continue
            for j, v in enumerate(trees):
                base = tn(T, w, lc, v)
                fv = ParenTree.framed(v)
                for g, y in pairs:
                    checked += 1
                    if tn(T, (g,) + w + (y,), outer, fv) != base:
                        fails.append((n, j, w, g, y))
    return FramingReport(not fails, checked, fails[:10])


# ---------------------------------------------------------------------------
# validation and substructures


@dataclass
class ValidationReport:
    ok: bool
    failures: list[tuple[str, tuple, str]] = field(default_factory=list)
    is_central_metagroup: bool = False
    is_associative: bool = False
    nontrivial_associators: int = 0

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class SubstructureReport:
    commutant: tuple[int, ...]
    left_nucleus: tuple[int, ...]
    middle_nucleus: tuple[int, ...]
    right_nucleus: tuple[int, ...]
    nucleus: tuple[int, ...]
    center: tuple[int, ...]
    is_group: bool
    is_central_metagroup: bool


def _latin_failures(T: MetagroupTable) -> list[tuple[str, tuple, str]]:
    n = T.order
    fails = []
    for a in range(n):
        seen = {}
        for x in range(n):
            b = T.table[a][x]
            if b in seen:
                fails.append(("A1.1", (a, seen[b], x), f"{a}*{seen[b]} = {a}*{x} = {b}"))
                break
            seen[b] = x
    for a in range(n):
        seen = {}
        for y in range(n):
            b = T.table[y][a]
            if b in seen:
                fails.append(("A1.2", (seen[b], y, a), f"{seen[b]}*{a} = {y}*{a} = {b}"))
                break
            seen[b] = y
    return fails


def substructures(T: MetagroupTable) -> SubstructureReport:
    """Commutant, the three nuclei, nucleus and centre by exhaustive scan (O(N^3))."""
    n = T.order
    tab = T.table
    com = [a for a in range(n) if all(tab[a][b] == tab[b][a] for b in range(n))]
    rng = range(n)
    nl = [a for a in rng if all(tab[tab[a][b]][c] == tab[a][tab[b][c]] for b in rng for c in rng)]
    nm = [a for a in rng if all(tab[tab[b][a]][c] == tab[b][tab[a][c]] for b in rng for c in rng)]
    nr = [a for a in rng if all(tab[tab[b][c]][a] == tab[b][tab[c][a]] for b in rng for c in rng)]
    nuc = sorted(set(nl) & set(nm) & set(nr))
    cen = sorted(set(com) & set(nuc))
    center = frozenset(cen)
    psi = center if T.psi is None else frozenset(T.psi)
    central = all(_rdiv_raw(tab, tab[b][a], tab[a][b]) in psi for a in rng for b in rng)
    return SubstructureReport(tuple(com), tuple(nl), tuple(nm), tuple(nr), tuple(nuc), tuple(cen),
                              len(nuc) == n, central)


def _rdiv_raw(tab, a, b):
    # y with y a = b, by scan; only used before divisions are known to exist
    for y, row in enumerate(tab):
        if row[a] == b:
            return y
    return -1


def validate_metagroup(T: MetagroupTable) -> ValidationReport:
    """Check unique divisions, the unit, and centrality of every associator."""
    n = T.order
    tab = T.table
    e = T.unit
    fails = _latin_failures(T)
    for g in range(n):
        if tab[e][g] != g or tab[g][e] != g:
            fails.append(("A1.3", (e, g), f"unit {e} does not fix {g}"))
            break
    if fails:
        return ValidationReport(False, fails)

    sub = substructures(T)
    center = set(sub.center)
    psi = set(T.psi) if T.psi is not None else None
    if psi is not None:
        if not psi <= center:
            g = min(psi - center)
            fails.append(("psi", (g,), f"psi element {g} is not central"))
        elif e not in psi or any(tab[a][b] not in psi or T._ldiv[a][b] not in psi
                                 or T._rdiv[a][b] not in psi for a in psi for b in psi):
            fails.append(("psi", tuple(sorted(psi)), "psi is not a subgroup"))
    nontrivial = 0
    a9 = None
    for a in range(n):
        ta = tab[a]
        for b in range(n):
            ab = ta[b]
            tb = tab[b]
            for c in range(n):
                lhs = tab[ab][c]
                rhs = ta[tb[c]]
                if lhs == rhs:
                    continue
                nontrivial += 1
                t = T._rdiv[rhs][lhs]
                if a9 is None:
                    if t not in center:
                        a9 = ("A1.9", (a, b, c), f"t3 = {t} not in the centre")
                    elif psi is not None and t not in psi:
                        a9 = ("A1.9", (a, b, c), f"t3 = {t} not in psi")
    if a9:
        fails.append(a9)
    return ValidationReport(not fails, fails, sub.is_central_metagroup, nontrivial == 0, nontrivial)


def psi_closure(T: MetagroupTable) -> frozenset[int]:
    """Smallest subgroup of the centre holding every associator value."""
    n = T.order
    tab = T.table
    gens = {T.unit}
    for a in range(n):
        for b in range(n):
            ab = tab[a][b]
            for c in range(n):
                lhs = tab[ab][c]
                rhs = tab[a][tab[b][c]]
                if lhs != rhs:
                    gens.add(T._rdiv[rhs][lhs])
    closed = set(gens)
    frontier = list(closed)
    while frontier:
        new = set()
        for a in closed:
            for b in frontier:
                for x in (tab[a][b], tab[b][a], T._ldiv[a][b], T._ldiv[b][a],
                          T._rdiv[a][b], T._rdiv[b][a]):
                    if x not in closed:
                        new.add(x)
        closed |= new
        frontier = list(new)
    return frozenset(closed)


# ---------------------------------------------------------------------------
# generators


def _from_mul(names: Sequence[str], f, unit: int = 0, psi=None) -> MetagroupTable:
    n = len(names)
    return MetagroupTable(n, tuple(names), unit,
                          tuple(tuple(f(a, b) for b in range(n)) for a in range(n)), psi)


def cyclic(n: int) -> MetagroupTable:
    if n < 1:
        raise ValueError("cyclic order must be positive")
    names = ["e"] + [f"a^{k}" if k > 1 else "a" for k in range(1, n)]
    return _from_mul(names, lambda a, b: (a + b) % n)


def dihedral(n: int) -> MetagroupTable:
    """Symmetries of the n-gon, order 2n; index ``k + n*b`` is ``r^k s^b``."""
    if n < 1:
        raise ValueError("dihedral parameter must be positive")

    def f(x, y):
        a, b = x % n, x // n
        c, d = y % n, y // n
        return (a + (c if b == 0 else -c)) % n + n * ((b + d) % 2)
    names = [("e" if k == 0 else f"r{k}") if b == 0 else f"r{k}s" for b in range(2) for k in range(n)]
    return _from_mul(names, f)


def quaternion8() -> MetagroupTable:
    return cayley_dickson(2)


def direct_product(A: MetagroupTable, B: MetagroupTable) -> MetagroupTable:
    m = B.order
    names = [f"({x},{y})" for x in A.elements for y in B.elements]
    ta, tb = A.table, B.table
    psi = None
    if A.psi is not None and B.psi is not None:
        psi = [i * m + j for i in A.psi for j in B.psi]
    return _from_mul(names, lambda p, q: ta[p // m][q // m] * m + tb[p % m][q % m],
                     A.unit * m + B.unit, psi)


def _cd_basis_mul(i: int, j: int, level: int) -> tuple[int, int]:
    # (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c)); conj(a,b) = (conj(a), -b)
    if level == 0:
        return 1, 0
    h = 1 << (level - 1)

    def conj_sign(x):
        return 1 if x == 0 else -1
    if i < h and j < h:
        return _cd_basis_mul(i, j, level - 1)
    if i < h:
        s, x = _cd_basis_mul(j - h, i, level - 1)
        return s, x + h
    if j < h:
        s, x = _cd_basis_mul(i - h, j, level - 1)
        return s * conj_sign(j), x + h
    s, x = _cd_basis_mul(j - h, i - h, level - 1)
    return -s * conj_sign(j - h), x


def cayley_dickson(levels: int) -> MetagroupTable:
    """Signed basis units ``{+-e_0, ..., +-e_{2^k - 1}}`` of the k-th Cayley-Dickson algebra.

    Element ``2*i`` is ``e_i`` and ``2*i + 1`` is ``-e_i``.
    """
    if not isinstance(levels, int) or not 0 <= levels <= 5:
        raise ValueError(f"Cayley-Dickson level must be in 0..5, got {levels!r}")
    dim = 1 << levels
    names = []
    for i in range(dim):
        names += [f"e{i}", f"-e{i}"]

    def f(a, b):
        s, x = _cd_basis_mul(a >> 1, b >> 1, levels)
        if (a ^ b) & 1:
            s = -s
        return 2 * x + (s < 0)
    return _from_mul(names, f)


def generate_table(spec) -> MetagroupTable:
    """Build a table from a tuple spec like ``("cyclic", 4)`` or a string like ``"cd:3"``."""
    if isinstance(spec, str):
        return parse_table_spec(spec)
    kind, *args = spec
    if kind == "cyclic":
        return cyclic(*args)
    if kind == "dihedral":
        return dihedral(*args)
    if kind == "quaternion8":
        return quaternion8()
    if kind == "direct_product":
        a, b = (x if isinstance(x, MetagroupTable) else generate_table(x) for x in args)
        return direct_product(a, b)
    if kind == "cd":
        return cayley_dickson(*args)
    raise ValueError(f"unsupported table spec {spec!r}")


def parse_table_spec(text: str) -> MetagroupTable:
    """``cyclic:4``, ``dihedral:3``, ``quaternion8``, ``cd:3`` or ``product:A,B``."""
    text = text.strip()
    if text.startswith("product:"):
        parts = _split_product(text[len("product:"):])
        if len(parts) < 2:
            raise ValueError(f"product needs at least two factors: {text!r}")
        out = parse_table_spec(parts[0])
        for p in parts[1:]:
            out = direct_product(out, parse_table_spec(p))
        return out
    if text == "quaternion8":
        return quaternion8()
    kind, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(f"cannot parse table spec {text!r}")
    try:
        k = int(arg)
    except ValueError:
        raise ValueError(f"bad integer in table spec {text!r}") from None
    if kind == "cyclic":
        return cyclic(k)
    if kind == "dihedral":
        return dihedral(k)
    if kind == "cd":
        return cayley_dickson(k)
    raise ValueError(f"unknown table kind {kind!r}")


def _split_product(text: str) -> list[str]:
    # factors are comma separated; a nested product must come last
    parts = []
    rest = text
    while rest:
        if rest.startswith("product:"):
            parts.append(rest)
            break
        head, _, rest = rest.partition(",")
        parts.append(head)
    return parts


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass
class HomomorphismReport:
    ok: bool
    failures: list[tuple[str, tuple]]
    injective: bool
    surjective: bool

    def __bool__(self):
        return self.ok


def check_homomorphism(f: Sequence[int], S: MetagroupTable, T: MetagroupTable) -> HomomorphismReport:
    """Products, left divisions and right divisions must all be preserved."""
    if len(f) != S.order:
        raise ValueError("map must be total on the source")
    _check_index(T, *f)
    fails = []
    rng = range(S.order)
    checks = (
        ("product", lambda g, h: f[S.table[g][h]] == T.table[f[g]][f[h]]),
        ("left division", lambda g, h: f[S._ldiv[g][h]] == T._ldiv[f[g]][f[h]]),
        ("right division", lambda g, h: f[S._rdiv[g][h]] == T._rdiv[f[g]][f[h]]),
    )
    for label, ok in checks:
        for g in rng:
            bad = next((h for h in rng if not ok(g, h)), None)
            if bad is not None:
                fails.append((label, (g, bad)))
                break
    image = set(f)
    return HomomorphismReport(not fails, fails, len(image) == S.order, len(image) == T.order)


# ---------------------------------------------------------------------------
# file format


def table_to_json(T: MetagroupTable) -> str:
    obj = {"order": T.order, "elements": list(T.elements), "unit": T.unit,
           "table": [list(r) for r in T.table]}
    if T.psi is not None:
        obj["psi"] = list(T.psi)
    return json.dumps(obj)


def table_from_json(text: str | dict) -> MetagroupTable:
    obj = json.loads(text) if isinstance(text, str) else text
    try:
        return MetagroupTable(obj["order"], tuple(obj["elements"]), obj["unit"],
                              tuple(tuple(r) for r in obj["table"]), obj.get("psi"))
    except (KeyError, TypeError) as exc:
        raise MalformedTableError(f"bad table file: {exc}") from exc
