import random

import pytest
from hypothesis import given, settings, strategies as st

from metabar.complex import ChainMap, FreeComplex, direct_sum, inclusion, projection
from metabar.exactlinalg import GF, QQ, ZZ, SparseMatrix
from metabar.homology import (
    BrokenSequenceError, HomologyBasis, ShortExactSequence, connecting_hom, homology,
    induced_map, long_exact_sequence, verify_ses,
)
from metabar.suite import _shift_by_homotopy, random_chain_map, random_complex, random_homotopy, random_ses

seeds = st.integers(0, 10**6)
F5 = GF(5)


def mat(rows, ring=ZZ):
    return SparseMatrix.from_dense(rows, ring)


def cone_pair(k, ring=ZZ):
    """0 -> C1 -> C -> C2 -> 0 for C = (R --k--> R) in degrees 1, 0."""
    C = FreeComplex.from_dims(ring, {0: 1, 1: 1}, {1: mat([[k]], ring)})
    C1 = FreeComplex.from_dims(ring, {0: 1, 1: 0})
    C2 = FreeComplex.from_dims(ring, {0: 0, 1: 1})
    one = mat([[1]], ring)
    u = ChainMap(C1, C, {0: one})
    v = ChainMap(C, C2, {1: one})
    return ShortExactSequence(C1, C, C2, u, v)


def orders_equal(M, N, orders):
    D = M - N
    for j in range(D.cols):
        for i, x in D.column(j).items():
            if not orders[i] or x % orders[i]:
                return False
    return True


def test_two_torsion():
    S = cone_pair(2)
    assert str(homology(S.C, 0)) == "Z/2"
    assert homology(S.C, 1).is_zero()
    H = HomologyBasis(S.C, 0)
    assert H.orders == (2,)
    assert H.coordinates({0: 3}) == [1]
    assert H.is_boundary({0: 4})


def test_rational_and_mod_p_homology_of_torsion():
    assert homology(cone_pair(2, QQ).C, 0).is_zero()
    assert str(homology(cone_pair(2, GF(2)).C, 0)) == "F2"
    assert str(homology(cone_pair(2, GF(2)).C, 1)) == "F2"


def test_free_homology_strings():
    C = FreeComplex.from_dims(ZZ, {0: 2, 1: 1}, {1: mat([[2], [0]])})
    assert str(homology(C, 0)) == "Z + Z/2"
    assert homology(C, 0).to_dict() == {"degree": 0, "rank": 1, "torsion": [2], "text": "Z + Z/2"}


@pytest.mark.parametrize("k", [1, 2, 6])
def test_connecting_map_of_cone(k):
    S = cone_pair(k)
    assert verify_ses(S).ok
    delta = connecting_hom(S, 1)
    assert delta.to_dense() == [[k]]
    L = long_exact_sequence(S)
    assert L.ok
    assert all(r["exact"] for r in L.rows)


def test_verify_ses_reports_witnesses():
    S = cone_pair(2)
    bad = ShortExactSequence(S.C1, S.C, S.C2, ChainMap.zero(S.C1, S.C), S.v)
    rep = verify_ses(bad)
    assert not rep.ok
    kinds = {k for _, k, _ in rep.failures}
    assert "u not injective" in kinds and "ker v not in im u" in kinds
    with pytest.raises(BrokenSequenceError):
        long_exact_sequence(bad)
    bad_v = ShortExactSequence(S.C1, S.C, S.C2, S.u, ChainMap.zero(S.C, S.C2))
    assert any(k == "v not surjective" for _, k, _ in verify_ses(bad_v).failures)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_representatives_modulo_boundaries(seed):
    rng = random.Random(seed)
    C = random_complex(rng, ZZ, 0, 3, 4)
    for n in C.degrees():
        H = HomologyBasis(C, n)
        assert H.invariants == homology(C, n)
        d = C.diff(n + 1)
        for j in range(H.size):
            z = H.representatives.column(j)
            assert H.is_cycle(z)
            coords = H.coordinates(z)
            unit = [int(i == j) % o if o else int(i == j) for i, o in enumerate(H.orders)]
            assert coords == unit
            b = d.apply({k: rng.randint(-3, 3) for k in range(d.cols)})
            shifted = {i: z.get(i, 0) + b.get(i, 0) for i in set(z) | set(b)}
            assert H.coordinates(shifted) == coords


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_induced_maps_functorial_and_homotopy_invariant(seed):
    rng = random.Random(seed)
    C, D, E = (random_complex(rng, ZZ, 0, 3, 3) for _ in range(3))
    f, f2 = random_chain_map(rng, C, D), random_chain_map(rng, C, D)
    g = random_chain_map(rng, D, E)
    f_shift = _shift_by_homotopy(f, random_homotopy(rng, C, D))
    for n in C.degrees():
        Hc, Hd, He = HomologyBasis(C, n), HomologyBasis(D, n), HomologyBasis(E, n)
        Ff = induced_map(f, n, Hc, Hd)
        assert orders_equal(induced_map(f + f2, n, Hc, Hd), Ff + induced_map(f2, n, Hc, Hd), Hd.orders)
        assert orders_equal(induced_map(g @ f, n, Hc, He), induced_map(g, n, Hd, He) @ Ff, He.orders)
        assert orders_equal(induced_map(f_shift, n, Hc, Hd), Ff, Hd.orders)
        assert orders_equal(induced_map(ChainMap.identity(C), n, Hc, Hc),
                            SparseMatrix.identity(Hc.size, ZZ), Hc.orders)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_split_sequence_has_zero_connecting_map(seed):
    rng = random.Random(seed)
    C1 = random_complex(rng, ZZ, 0, 3, 3)
    C2 = random_complex(rng, ZZ, 0, 3, 3)
    C = direct_sum(C1, C2)
    S = ShortExactSequence(C1, C, C2, inclusion(C1, C), _second_projection(C1, C2, C))
    assert verify_ses(S).ok
    for n in C.degrees():
        assert connecting_hom(S, n).is_zero()
    assert long_exact_sequence(S).ok


def _second_projection(C1, C2, C):
    maps = {}
    for n in C.degrees():
        a = C1.dim(n)
        maps[n] = SparseMatrix.from_triplets(C2.dim(n), C.dim(n), ZZ, [(i, a + i, 1) for i in range(C2.dim(n))])
    return ChainMap(C, C2, maps)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([F5, QQ]))
def test_random_les_exact_and_lift_independent(seed, ring):
    S = random_ses(random.Random(seed), ring, 0, 4, 5)
    assert verify_ses(S).ok
    assert long_exact_sequence(S).ok
    assert long_exact_sequence(S, alternate=True).ok
    for n in S.degrees():
        assert connecting_hom(S, n) == connecting_hom(S, n, alternate=True)


def test_les_report_formats():
    L = long_exact_sequence(cone_pair(2))
    text = L.to_text()
    assert "H1(C2)" in text and "NOT EXACT" not in text
    assert '"ok": true' in L.to_json()
