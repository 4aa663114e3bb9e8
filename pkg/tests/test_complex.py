import random

import pytest
from hypothesis import given, settings, strategies as st

from metabar.complex import (
    ChainMap, FreeComplex, Homotopism, NotASplittingError, ShapeError, complex_from_json,
    complex_to_json, compose_homotopy, conjugate_homotopy, direct_sum, find_splitting, inclusion,
    is_chain_map, is_homotopy, projection, split_decomposition, translate, validate_complex,
)
from metabar.exactlinalg import GF, QQ, ZZ, RingMismatchError, SparseMatrix
from metabar.homology import homology
from metabar.metagroup import cyclic
from metabar.suite import _shift_by_homotopy, random_chain_map, random_complex, random_homotopy

seeds = st.integers(0, 10**6)
F5 = GF(5)


def two_term(ring, entry):
    """0 -> R --entry--> R -> 0 in degrees 1, 0."""
    d = SparseMatrix.from_dense([[entry]], ring)
    return FreeComplex.from_dims(ring, {0: 1, 1: 1}, {1: d})


def test_validate_complex_detects_dd():
    ring = ZZ
    d1 = SparseMatrix.from_dense([[1, 0]], ring)
    d2 = SparseMatrix.from_dense([[1], [1]], ring)
    C = FreeComplex.from_dims(ring, {0: 1, 1: 2, 2: 1}, {1: d1, 2: d2})
    rep = validate_complex(C)
    assert not rep.ok and rep.failures == [(2, 0)]


def test_shape_and_ring_errors():
    with pytest.raises(ShapeError):
        FreeComplex.from_dims(ZZ, {0: 1, 1: 2}, {1: SparseMatrix.zero(2, 2, ZZ)})
    with pytest.raises(RingMismatchError):
        FreeComplex.from_dims(ZZ, {0: 1, 1: 1}, {1: SparseMatrix.identity(1, QQ)})
    C = two_term(ZZ, 2)
    with pytest.raises(ShapeError):
        ChainMap(C, C, {0: SparseMatrix.zero(2, 1, ZZ)})


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(-3, 3))
def test_translate(seed, p):
    C = random_complex(random.Random(seed), ZZ, 0, 3, 3)
    Cp = translate(C, p)
    assert validate_complex(Cp).ok
    assert Cp.lo == C.lo - p and Cp.hi == C.hi - p
    assert translate(Cp, -p) == C
    for n in C.degrees():
        a, b = homology(Cp, n - p), homology(C, n)
        assert (a.rank, a.torsion) == (b.rank, b.torsion)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_homotopy_algebra(seed):
    rng = random.Random(seed)
    C = random_complex(rng, ZZ, 0, 3, 3)
    D = random_complex(rng, ZZ, 0, 3, 3)
    E = random_complex(rng, ZZ, 0, 3, 3)
    f = random_chain_map(rng, C, D)
    assert is_chain_map(f).ok
    s = random_homotopy(rng, C, D)
    g = _shift_by_homotopy(f, s)
    assert is_chain_map(g).ok
    assert is_homotopy(s, f, g).ok
    # symmetric: -s relates g with f
    assert is_homotopy(-s, g, f).ok
    # additive
    s2 = random_homotopy(rng, C, D)
    h = _shift_by_homotopy(g, s2)
    assert is_homotopy(s + s2, f, h).ok
    # composition and conjugation
    f2 = random_chain_map(rng, D, E)
    t = random_homotopy(rng, D, E)
    g2 = _shift_by_homotopy(f2, t)
    assert is_homotopy(compose_homotopy(t, f, g2, s), f2 @ f, g2 @ g).ok
    eta = random_chain_map(rng, D, E)
    psi = random_chain_map(rng, E, C)
    assert is_homotopy(conjugate_homotopy(eta, s, psi), eta @ f @ psi, eta @ g @ psi).ok


def test_is_homotopy_rejects_wrong_map():
    C = two_term(ZZ, 1)
    s = ChainMap(C, C, {0: SparseMatrix.identity(1, ZZ)}, degree=1)
    assert is_homotopy(s, ChainMap.zero(C, C), ChainMap.identity(C)).ok
    assert not is_homotopy(s, ChainMap.identity(C), ChainMap.zero(C, C)).ok
    with pytest.raises(ShapeError):
        is_homotopy(ChainMap.identity(C), ChainMap.zero(C, C), ChainMap.identity(C))


def test_contractible_complex_is_homotopic_to_zero():
    C = two_term(ZZ, -1)
    Z = FreeComplex.from_dims(ZZ, {0: 0, 1: 0})
    s = ChainMap(C, C, {0: SparseMatrix.from_dense([[-1]], ZZ)}, degree=1)
    H = Homotopism(ChainMap.zero(C, Z), ChainMap.zero(Z, C), s, ChainMap.zero(Z, Z, 1))
    assert H.verify()


def test_exact_vs_generic_chain_maps():
    C = two_term(ZZ, 2)
    T = cyclic(3)
    aut = ChainMap(C, C, {0: SparseMatrix.identity(1, ZZ), 1: SparseMatrix.identity(1, ZZ)},
                   iota=([0, 2, 1], T, T))
    assert is_chain_map(aut).exact
    triv = ChainMap(C, C, aut.maps, iota=([0, 0, 0], T, cyclic(1)))
    rep = is_chain_map(triv)
    assert rep.ok and not rep.exact


def test_integer_torsion_has_no_splitting():
    C = two_term(ZZ, 2)
    assert find_splitting(C) is None
    C5 = two_term(F5, 2)
    s = find_splitting(C5)
    assert s is not None
    rep = split_decomposition(C5, s)
    assert rep.ok and sorted(rep.summands) == [(1, "T", 1)]


def test_splitting_with_nonzero_homology():
    # Z^2 --[1 0]--> Z: the kernel survives as an S summand in degree 1
    d = SparseMatrix.from_dense([[1, 0]], ZZ)
    C = FreeComplex.from_dims(ZZ, {0: 1, 1: 2}, {1: d})
    s = find_splitting(C)
    rep = split_decomposition(C, s)
    assert rep.ok
    assert sorted(rep.summands) == [(1, "S", 1), (1, "T", 1)]


def test_split_decomposition_rejects_non_splitting():
    C = two_term(F5, 2)
    bad = ChainMap(C, C, {}, degree=1)
    with pytest.raises(NotASplittingError):
        split_decomposition(C, bad)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_random_field_complexes_split(seed):
    C = random_complex(random.Random(seed), F5, 0, 4, 4)
    s = find_splitting(C)
    assert s is not None
    rep = split_decomposition(C, s)
    assert rep.ok, rep.checks
    # S summands in degree n count the homology
    for n in C.degrees():
        S = sum(k for m, kind, k in rep.summands if m == n and kind == "S")
        assert S == homology(C, n).rank


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_direct_sum_maps(seed):
    rng = random.Random(seed)
    C = random_complex(rng, ZZ, 0, 3, 3)
    E = random_complex(rng, ZZ, 0, 3, 3)
    S = direct_sum(C, E)
    assert validate_complex(S).ok
    i, p = inclusion(C, S), projection(S, C)
    assert is_chain_map(i).ok and is_chain_map(p).ok
    assert is_homotopy(ChainMap.zero(C, C, 1), p @ i, ChainMap.identity(C)).ok


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([ZZ, QQ, F5]))
def test_json_round_trip(seed, ring):
    C = random_complex(random.Random(seed), ring, -1, 3, 3)
    assert complex_from_json(complex_to_json(C)) == C
