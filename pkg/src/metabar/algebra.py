"""The metagroup algebra T[G] and grading words.

Grading words are plain tuples of element indices ``(g1, ..., gk)``, always
read with the left-comb order ``(...((g1 g2) g3)...) gk``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exactlinalg import Ring
from .metagroup import MetagroupTable, left_product, substructures, div

__all__ = [
    "AlgebraElement", "alg_mul", "coarsen_word", "lift_word",
    "nucleus_basis_check", "NucleusReport",
]

GradingWord = tuple[int, ...]


class AlgebraElement:
    """Finite formal sum ``sum c_g g`` with coefficients in ``ring``."""

    __slots__ = ("base", "ring", "coeffs")

    def __init__(self, base: MetagroupTable, ring: Ring, coeffs: Mapping[int, object] | None = None):
        self.base = base
        self.ring = ring
        red = ring.reduce
        self.coeffs = {g: c for g, v in (coeffs or {}).items() if (c := red(ring.coerce(v)))}

    @classmethod
    def generator(cls, base, ring, g, coeff=1):
        return cls(base, ring, {g: coeff})

    @classmethod
    def one(cls, base, ring):
        return cls.generator(base, ring, base.unit)

    def _check(self, other):
        if other.base is not self.base and other.base != self.base:
            raise ValueError("elements live over different metagroups")
        if other.ring.name != self.ring.name:
            raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            out[g] = out.get(g, 0) + c
        return AlgebraElement(self.base, self.ring, out)

    def __neg__(self):
        return AlgebraElement(self.base, self.ring, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return alg_mul(self, other)
        c = self.ring.coerce(other)
        return AlgebraElement(self.base, self.ring, {g: v * c for g, v in self.coeffs.items()})

    def __rmul__(self, scalar):
        c = self.ring.coerce(scalar)
        return AlgebraElement(self.base, self.ring, {g: c * v for g, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.base == other.base and self.ring.name == other.ring.name and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        names = self.base.elements
        return " + ".join(f"{self.ring.to_str(c)}*{names[g]}" for g, c in sorted(self.coeffs.items()))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.coeffs)


def alg_mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    tab = x.base.table
    out: dict[int, object] = {}
    for g, a in x.coeffs.items():
        row = tab[g]
        for h, b in y.coeffs.items():
            k = row[h]
            out[k] = out.get(k, 0) + a * b
    return AlgebraElement(x.base, x.ring, out)


def coarsen_word(T: MetagroupTable, w: Sequence[int], m: int) -> GradingWord:
    """Collapse the first ``n - m + 1`` letters into their left-comb product."""
    n = len(w)
    if not 1 <= m <= n:
        raise ValueError(f"cannot coarsen a word of length {n} to length {m}")
    k = n - m + 1
    return (left_product(T, w[:k]),) + tuple(w[k:])


def lift_word(T: MetagroupTable, w: Sequence[int], n: int, prefix: Sequence[int] | None = None) -> GradingWord:
    """A length-``n`` word whose coarsening to ``len(w)`` is ``w``.

    The extra letters are ``prefix`` (units by default); the first letter of
    ``w`` is divided on the left by their product so the round trip is exact.
    """
    m = len(w)
    if n < m:
        raise ValueError("lift target must be at least as long as the word")
    if prefix is None:
        prefix = (T.unit,) * (n - m)
    if len(prefix) != n - m:
        raise ValueError(f"prefix must have {n - m} letters")
    if not prefix:
        return tuple(w)
    p = left_product(T, prefix)
    return tuple(prefix) + (div(T, "left", p, w[0]),) + tuple(w[1:])


@dataclass
class NucleusReport:
    ok: bool
    nucleus_support: tuple[int, ...]
    closed: bool
    associative: bool
    witnesses: dict[int, tuple[int, int, int]] = field(default_factory=dict)


def nucleus_basis_check(T: MetagroupTable, ring: Ring) -> NucleusReport:
    """For B = T[G]: elements supported on N(G) form an associative subalgebra,
    and every generator outside N(G) has an associator witness."""
    nuc = substructures(T).nucleus
    nset = set(nuc)
    gens = {g: AlgebraElement.generator(T, ring, g) for g in range(T.order)}
    closed = all(next(iter((gens[a] * gens[b]).coeffs)) in nset for a in nuc for b in nuc)
    associative = all((gens[a] * gens[b]) * gens[c] == gens[a] * (gens[b] * gens[c])
                      for a in nuc for b in nuc for c in nuc)
    witnesses = {}
    rng = range(T.order)
    for g in rng:
        if g in nset:
            continue
        for a, b in itertools.product(rng, rng):
            triple = next(((x, y, z) for (x, y, z) in ((g, a, b), (a, g, b), (a, b, g))
                           if (gens[x] * gens[y]) * gens[z] != gens[x] * (gens[y] * gens[z])), None)
            if triple:
                witnesses[g] = triple
                break
    ok = closed and associative and len(witnesses) == T.order - len(nuc)
    return NucleusReport(ok, tuple(nuc), closed, associative, witnesses)
