import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from metabar.bar import (
    CoefficientModule, ResourceCapError, bar, bar_basis, bar_boundary, bar_dimension, bar_homotopy,
    bar_homotopy_s, bar_projection_p, build_bar_complex, classical_bar_boundary, estimate_size,
    standard_resolution,
)
from metabar.complex import ChainMap, is_homotopy, validate_complex
from metabar.exactlinalg import GF, ZZ, SparseMatrix, rank
from metabar.homology import homology
from metabar.metagroup import ParenTree, cayley_dickson, cyclic, dihedral, parse_table_spec, tn

O = cayley_dickson(3)
Q = cayley_dickson(2)


# independent normal form for Cayley-Dickson tables: index 2i is e_i, 2i+1 is -e_i,
# and -e0 (index 1) is central, so signs collect in slot 0 by xor
def cd_index(w, T):
    m = T.order // 2
    sign = sum(x & 1 for x in w[1:]) & 1
    i = w[0] ^ sign
    for x in w[1:]:
        i = i * m + (x >> 1)
    return i


def cd_boundary_column(T, w):
    """Expected d(w) from the associator tn of the left comb against each merged comb."""
    n = len(w) - 2
    lc = ParenTree.left_comb(n + 2)
    col = Counter()
    for j in range(n + 1):
        t = tn(T, w, lc, ParenTree.merged_comb(n + 2, j))
        m = w[:j] + (T.table[w[j]][w[j + 1]],) + w[j + 2:]
        m = (T.table[t][m[0]],) + m[1:]
        col[cd_index(m, T)] += -1 if j % 2 else 1
    return {i: c for i, c in col.items() if c}


def test_dimensions():
    assert bar_dimension(O, -1) == 16
    assert [bar_dimension(O, n) for n in range(3)] == [16 * 8, 16 * 64, 16 * 512]
    assert bar_dimension(cyclic(3), 2) == 3 ** 4
    assert estimate_size(O, 6) == 16 ** 8


def test_hand_computed_octonion_face():
    # d(e1 | e2 | e4) = (e3 | e4) - t (e1 | e6) with (e1 e2) e4 = -e1 (e2 e4), so t = -e0
    d1 = bar_boundary(O, ZZ, 1, columns=[bar(O).index((2, 4, 8))])
    col = d1.column(bar(O).index((2, 4, 8)))
    expected = {bar(O).index((6, 8)): 1, bar(O).index((3, 12)): -1}
    assert col == expected


@settings(max_examples=60, deadline=None)
@given(st.tuples(*[st.integers(0, 15)] * 4))
def test_three_term_expansion_matches_associator_oracle(w):
    Bc = bar(O)
    w = Bc.normalize(w)
    j = Bc.index(w)
    d2 = bar_boundary(O, ZZ, 2, columns=[j])
    assert d2.column(j) == cd_boundary_column(O, w)


@pytest.mark.parametrize("spec", ["cyclic:3", "dihedral:3", "quaternion8", "product:cyclic:2,cyclic:2"])
def test_group_bar_equals_classical_bar(spec):
    T = parse_table_spec(spec)
    n_max = 2 if T.order <= 4 else 1
    for n in range(n_max + 1):
        assert bar_boundary(T, ZZ, n) == classical_bar_boundary(T, ZZ, n)


@pytest.mark.parametrize("ring", [ZZ, GF(2), GF(5)])
def test_dd_zero_quaternions_and_octonions(ring):
    assert validate_complex(build_bar_complex(Q, ring, 3)).ok
    d1, d2 = bar_boundary(O, ring, 1), bar_boundary(O, ring, 2)
    assert (d1 @ d2).is_zero()


def test_contracting_homotopy_identity():
    C = build_bar_complex(Q, ZZ, 3)
    s = bar_homotopy(C, Q)
    assert is_homotopy(s, ChainMap.zero(C, C), ChainMap.identity(C), range(-1, 3)).ok
    for n in range(-1, 3):
        assert homology(C, n).is_zero()
    # the top degree is truncated and keeps its cycles
    assert homology(C, 3).rank > 0


def test_contracting_homotopy_sampled_on_octonions():
    rng = random.Random(7)
    n = 2
    cols = rng.sample(range(bar_dimension(O, n)), 200)
    Bc = bar(O)
    s_n = bar_homotopy_s(O, ZZ, n, columns=cols)
    imgs = sorted({i for j in cols for i in s_n.column(j)})
    lhs = bar_boundary(O, ZZ, n + 1, columns=imgs) @ s_n
    rhs = bar_homotopy_s(O, ZZ, n - 1) @ bar_boundary(O, ZZ, n, columns=cols)
    total = lhs + rhs
    for j in cols:
        assert total.column(j) == {j: 1}, Bc.word(n, j)


def test_p_after_s_is_identity():
    for n in range(0, 2):
        P = bar_projection_p(O, ZZ, n)
        S = bar_homotopy_s(O, ZZ, n)
        assert P @ S == SparseMatrix.identity(bar_dimension(O, n), ZZ)


def test_p_after_s_on_all_octonion_triples():
    # every word of G^3, not only normal forms: p(s(w)) is the normal form of w
    Bc = bar(O)
    for w in itertools.product(range(16), repeat=3):
        assert Bc.projection_image((O.unit,) + w) == Bc.normal_index(w)


def test_right_projection():
    Bc = bar(O)
    for w in itertools.islice(Bc.words(1), 0, None, 7):
        p = Bc.word(0, Bc.projection_image(w, "right"))
        assert Bc.pi(p) == Bc.pi(w)
    # for a group it is the plain merge of the last two letters
    C3 = cyclic(3)
    G = bar(C3)
    for w in G.words(1):
        assert G.projection_image(w, "right") == G.index((w[0], C3.table[w[1]][w[2]]))
    with pytest.raises(ValueError):
        Bc.projection_image((0, 0), "middle")


def test_pi_preserved_by_every_face():
    Bc = bar(O)
    for w in itertools.islice(Bc.words(2), 0, None, 37):
        for i, _ in Bc.boundary_column(w):
            assert Bc.pi(Bc.word(1, i)) == Bc.pi(w)


def test_normalization_fibres():
    Bc = bar(O)
    for n in range(0, 2):
        counts = Counter(Bc.normal_index(w) for w in itertools.product(range(16), repeat=n + 2))
        assert len(counts) == bar_dimension(O, n)
        assert set(counts.values()) == {2 ** (n + 1)}


def test_grading_words_distinct():
    C = build_bar_complex(O, ZZ, 1)
    for n in C.degrees():
        words = C.module(n).words
        assert len(set(words)) == len(words)
    assert bar_basis(O, 0)[:2] == [(0, 0), (0, 2)]


def test_resource_cap():
    with pytest.raises(ResourceCapError) as err:
        build_bar_complex(O, ZZ, 6)
    assert err.value.estimate == 16 ** 8
    build_bar_complex(O, ZZ, 1, cap=16 ** 3)
    with pytest.raises(ValueError):
        build_bar_complex(O, ZZ, -1)


@pytest.mark.parametrize("T", [Q, dihedral(3)], ids=["Q8", "D3"])
def test_standard_resolution(T):
    R = standard_resolution(T, ZZ, CoefficientModule(("x", "y")), 3)
    assert R.verify()
    K = R.complex
    assert validate_complex(K).ok
    assert K.dim(1) == 2 * bar_dimension(T, 1)
    assert rank(R.epsilon[0]) == 2 * T.order
    for n in range(0, 3):
        expected = 2 * T.order if n == 0 else 0
        assert homology(K, n).rank == expected and homology(K, n).torsion == ()


def test_coefficient_module_needs_generators():
    with pytest.raises(ValueError):
        CoefficientModule(())
