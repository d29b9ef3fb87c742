import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scmamds.codes import (BlockCode, GeneratorMatrix, explicit_generator, grs_generator,
                           hamming_ternary_generator, is_mds, load_generator, message_vectors,
                           min_hamming_distance, pairwise_min_distance, rank, row_reduce,
                           save_generator, span_code)
from scmamds.errors import ParamsOutOfRange, RankDeficient, WrongField
from scmamds.gf import gf_build

PAPER_GRS = [[1, 0, 2, 3], [0, 1, 3, 2]]


def brute_dmin(words):
    return min(int((a != b).sum()) for a, b in itertools.combinations(np.asarray(words), 2))


def test_grs_424_is_systematic_mds():
    T = gf_build(4)
    G = grs_generator(T, 2, 4)
    assert G.is_systematic
    code = span_code(G)
    assert code.d_min == 3 and is_mds(code)
    # the published G spans the same code up to coordinate relabeling of the parity part
    paper = span_code(explicit_generator(T, PAPER_GRS))
    assert paper.d_min == 3
    assert {tuple(c) for c in paper.codewords} == {tuple(c[[0, 1, 3, 2]]) for c in code.codewords}


def test_grs_423_singleton():
    code = span_code(grs_generator(gf_build(4), 2, 3))
    assert code.d_min == 2 and is_mds(code)


def test_grs_525_brute_force():
    code = span_code(grs_generator(gf_build(5), 2, 5))
    assert len(code.codewords) == 25
    assert brute_dmin(code.codewords) == 4 == code.d_min


@pytest.mark.parametrize("k,n", [(1, 4), (4, 4), (2, 5), (5, 3)])
def test_grs_params_out_of_range(k, n):
    with pytest.raises(ParamsOutOfRange):
        grs_generator(gf_build(4), k, n)


def test_hamming_ternary():
    T = gf_build(3)
    G = hamming_ternary_generator(T)
    np.testing.assert_array_equal(G.entries, [[1, 0, 1, 1], [0, 1, 1, 2]])
    code = span_code(G)
    assert len(code.codewords) == 9
    dists = [int((a != b).sum()) for a, b in itertools.combinations(code.codewords, 2)]
    assert len(dists) == 36 and min(dists) >= 3
    assert is_mds(code)
    with pytest.raises(WrongField):
        hamming_ternary_generator(gf_build(4))


def test_explicit_generator():
    T = gf_build(4)
    G = explicit_generator(T, PAPER_GRS)
    np.testing.assert_array_equal(G.entries, PAPER_GRS)
    with pytest.raises(RankDeficient):
        explicit_generator(T, [[1, 2, 3, 1], [1, 2, 3, 1]])
    with pytest.raises(RankDeficient):
        # second row is alpha times the first
        explicit_generator(T, [[1, 2, 3, 1], [2, 3, 1, 2]])


def test_repetition_code():
    for q, n in [(2, 5), (3, 4), (4, 3)]:
        code = span_code(explicit_generator(gf_build(q), [[1] * n]))
        assert code.d_min == n and min_hamming_distance(code) == n
        assert is_mds(code)


def test_binary_not_mds():
    code = span_code(explicit_generator(gf_build(2), [[1, 0, 1, 0], [0, 1, 0, 1]]))
    assert code.d_min == 2 and not is_mds(code)


def test_message_order_lsd_first():
    T = gf_build(3)
    msgs = message_vectors(T, 2)
    for i, u in enumerate(msgs):
        assert i == u[0] + 3 * u[1]
    code = span_code(hamming_ternary_generator(T))
    assert code.index_of([2, 1]) == 5
    assert code.matvecs == 9


def test_power_digit_order_is_permutation():
    T = gf_build(4)
    a = message_vectors(T, 2, "index")
    b = message_vectors(T, 2, "power")
    assert {tuple(x) for x in a} == {tuple(x) for x in b}
    np.testing.assert_array_equal(b[1], [T.primitive, 0])


def test_row_reduce_rank():
    T = gf_build(5)
    rr, piv = row_reduce(T, [[2, 4, 1], [1, 2, 3]])
    assert rank(T, [[2, 4, 1], [1, 2, 3]]) == len(piv)
    assert piv[0] == 0 and rr[0][0] == 1


def test_generator_json_roundtrip(tmp_path):
    G = grs_generator(gf_build(8), 3, 6)
    p = tmp_path / "g.json"
    save_generator(p, G)
    H = load_generator(p)
    np.testing.assert_array_equal(G.entries, H.entries)
    assert H.q == 8 and json.loads(p.read_text())["k"] == 3
    assert GeneratorMatrix.from_json(G.to_json()).n == 6


@st.composite
def random_codes(draw):
    q = draw(st.sampled_from([2, 3, 4, 5, 7, 8]))
    n = draw(st.integers(2, 6))
    k = draw(st.integers(1, min(3, n)))
    T = gf_build(q)
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    while True:
        rows = rng.integers(0, q, (k, n))
        if rank(T, rows) == k:
            return T, explicit_generator(T, rows)


@settings(max_examples=60, deadline=None)
@given(random_codes())
def test_dmin_matches_pairwise_and_singleton(tc):
    T, G = tc
    code = span_code(G)
    assert len(code.codewords) == T.q ** G.k
    assert code.d_min == brute_dmin(code.codewords)
    assert code.d_min <= G.n - G.k + 1
    assert is_mds(code) == (code.d_min == G.n - G.k + 1)


@settings(max_examples=60, deadline=None)
@given(random_codes(), st.data())
def test_linearity(tc, data):
    T, G = tc
    code = span_code(G)
    words = {tuple(c) for c in code.codewords}
    i = data.draw(st.integers(0, len(code.codewords) - 1))
    j = data.draw(st.integers(0, len(code.codewords) - 1))
    a = data.draw(st.integers(0, T.q - 1))
    c1, c2 = code.codewords[i], code.codewords[j]
    comb = tuple(T.add[T.mul[a][x]][y] for x, y in zip(c1, c2))
    assert comb in words


def test_pairwise_min_distance_helper():
    w = np.array([[0, 0, 0], [0, 1, 1], [1, 1, 0]])
    assert pairwise_min_distance(w) == 2
    assert isinstance(span_code(grs_generator(gf_build(4), 2, 4)), BlockCode)
