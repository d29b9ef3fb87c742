import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scmamds.codebook import (Codebook, ProjectionSet, apsk_projections, codebook_from_json,
                              codebook_to_json, cutoff_rate, expurgate, lift_code,
                              load_codebook, min_euclidean_sq, min_product_distance, mssd,
                              noise_var_from_ebn0, papr, save_codebook)
from scmamds.codes import (explicit_generator, grs_generator, hamming_ternary_generator,
                           span_code)
from scmamds.errors import AlphabetMismatch, NotPowerOfTwo, SizeMismatch, TargetTooLarge
from scmamds.gf import gf_build

PAPER_GRS = [[1, 0, 2, 3], [0, 1, 3, 2]]

# matrix (2) of the design example: entry = index of x_1..x_4, column order = message order
EQ2 = """\
1 3 4 2 1 3 4 2 1 3 4 2 1 3 4 2
1 1 1 1 3 3 3 3 4 4 4 4 2 2 2 2
1 4 2 3 2 3 1 4 3 2 4 1 4 1 3 2
1 2 3 4 4 3 2 1 2 1 4 3 3 4 1 2"""


def hc_codebook(expurgated=True):
    T = gf_build(3)
    cb = lift_code(span_code(hamming_ternary_generator(T)), apsk_projections(3, [3], [1.0]))
    return expurgate(cb, 8, 8.0) if expurgated else cb


def grs_codebook():
    T = gf_build(4)
    return lift_code(span_code(grs_generator(T, 2, 4)), apsk_projections(4, [4], [1.0]))


def test_apsk_examples():
    p3 = apsk_projections(3, [3], [1.0]).points
    np.testing.assert_allclose(p3, [1, np.exp(2j * np.pi / 3), np.exp(4j * np.pi / 3)])
    p4 = apsk_projections(4, [4], [1.0]).points
    np.testing.assert_allclose(p4, [1, 1j, -1, -1j], atol=1e-15)
    p = apsk_projections(4, [1, 3], [0.5, 1.0]).points
    assert p[0] == 0.5
    np.testing.assert_allclose(np.abs(p[1:]), 1.0)


@pytest.mark.parametrize("sizes,radii", [([2, 1], [1.0, 2.0]), ([4], [1.0, 2.0]),
                                         ([2, 2], [1.0, 0.5]), ([4], [-1.0])])
def test_apsk_errors(sizes, radii):
    with pytest.raises(SizeMismatch):
        apsk_projections(4, sizes, radii)


def test_projection_set_distinct():
    with pytest.raises(AlphabetMismatch):
        ProjectionSet([1.0, 1.0 + 1e-14])


def test_lift_matches_matrix_2():
    T = gf_build(4)
    code = span_code(explicit_generator(T, PAPER_GRS), digit_order="power")
    cb = lift_code(code, apsk_projections(4, [4], [1.0]))
    text = "\n".join(" ".join(str(v + 1) for v in row) for row in cb.symbols)
    assert text == EQ2


def test_lift_alphabet_mismatch():
    code = span_code(hamming_ternary_generator(gf_build(3)))
    with pytest.raises(AlphabetMismatch):
        lift_code(code, apsk_projections(4, [4], [1.0]))
    with pytest.raises(AlphabetMismatch):
        lift_code(code, [apsk_projections(3, [3], [1.0])] * 3)


def test_lift_repetition():
    code = span_code(explicit_generator(gf_build(4), [[1, 1, 1]]))
    cb = lift_code(code, apsk_projections(4, [4], [1.0]))
    assert cb.M == 4
    assert (cb.symbols == cb.symbols[0]).all()


def test_hc_lift_pairwise():
    cb = hc_codebook(expurgated=False)
    assert cb.M == 9
    for i, j in itertools.combinations(range(9), 2):
        assert (cb.symbols[:, i] != cb.symbols[:, j]).sum() >= 3


def test_table_values():
    hc, grs = hc_codebook(), grs_codebook()
    assert (hc.M, hc.q, hc.N) == (8, 3, 4)
    assert (grs.M, grs.q, grs.N) == (16, 4, 4)
    assert min_euclidean_sq(hc) == pytest.approx(2.25, abs=1e-12)
    assert min_euclidean_sq(grs) == pytest.approx(2.0, abs=1e-12)
    assert min_product_distance(hc) == pytest.approx(0.75 ** 1.5, abs=1e-12)
    assert min_product_distance(hc) == pytest.approx(0.6495, abs=1e-4)
    assert min_product_distance(grs) == pytest.approx(0.5, abs=1e-12)
    assert mssd(hc) == 3 and mssd(grs) == 3


def test_antipodal():
    cb = Codebook.from_matrix(np.array([[1.0, -1.0]]))
    assert min_euclidean_sq(cb) == pytest.approx(4.0)


def test_normalization():
    for cb in (hc_codebook(), grs_codebook(), hc_codebook(False)):
        assert np.mean(np.sum(np.abs(cb.mat) ** 2, axis=0)) == pytest.approx(1.0, abs=1e-12)


def test_papr():
    assert papr(grs_codebook()) == pytest.approx(1.0)
    code = span_code(grs_generator(gf_build(4), 2, 4))
    assert papr(lift_code(code, apsk_projections(4, [1, 3], [0.5, 1.0]))) > 1.0
    lev = np.array([-3, -1, 1, 3])
    qam = (lev[:, None] + 1j * lev[None, :]).ravel()
    cb = Codebook.from_matrix(qam[None, :])
    assert papr(cb) == pytest.approx(1.8)


def test_cutoff_rate_limits():
    for cb in (hc_codebook(), grs_codebook()):
        assert cutoff_rate(cb, math.inf) == pytest.approx(math.log2(cb.M))
        vals = [cutoff_rate(cb, e) for e in np.arange(-10, 41, 2.5)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert max(vals) <= math.log2(cb.M) + 1e-12


def test_cutoff_rate_independent_route():
    # loop-based recomputation of the cutoff rate
    cb = grs_codebook()
    s2 = 1.0 / (10 ** 0.8 * 4)
    x = cb.mat
    tot = 0.0
    for i in range(cb.M):
        for j in range(cb.M):
            t = 1.0
            for n in range(cb.N):
                t /= 1.0 + abs(x[n, i] - x[n, j]) ** 2 / (4 * s2)
            tot += t
    assert cutoff_rate(cb, 8.0) == pytest.approx(4 - math.log2(tot / cb.M), rel=1e-12)


def test_noise_var():
    assert noise_var_from_ebn0(0.0, 16) == pytest.approx(0.25)
    assert noise_var_from_ebn0(math.inf, 8) == 0.0
    with pytest.raises(NotPowerOfTwo):
        noise_var_from_ebn0(3.0, 9)


def test_expurgation_hc():
    cb = hc_codebook(False)
    e = expurgate(cb, 8, 8.0)
    assert e.M == 8 and len(e.source["removed"]) == 1
    # the HC code is equidistant over equilateral 3-PSK, so all nine removals tie
    scores = [cutoff_rate(expurgate(cb, 8, 8.0, remove=[r]), 8.0) for r in range(9)]
    assert max(scores) - min(scores) < 1e-12
    code = span_code(hamming_ternary_generator(gf_build(3)))
    verbatim = expurgate(cb, 8, 8.0, remove=[code.index_of([2, 2])])
    assert code.index_of([2, 2]) not in verbatim.source["kept"]
    assert mssd(verbatim) == 3


def test_expurgation_identity_and_errors():
    cb = grs_codebook()
    assert expurgate(cb, 16) is cb
    with pytest.raises(TargetTooLarge):
        expurgate(cb, 32)
    with pytest.raises(TargetTooLarge):
        expurgate(cb, 12)


def test_expurgation_toy_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(5):
        mat = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        cb = Codebook.from_matrix(mat)
        best, best_keep = -np.inf, None
        for keep in itertools.combinations(range(4), 2):
            v = cutoff_rate(cb.subset(list(keep)), 3.0)
            if v > best + 1e-12:
                best, best_keep = v, keep
        e = expurgate(cb, 2, 3.0)
        assert cutoff_rate(e, 3.0) == pytest.approx(best, rel=1e-10)
        np.testing.assert_allclose(e.mat, cb.subset(list(best_keep)).mat)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
def test_phase_rotation_invariance(seed, theta):
    rng = np.random.default_rng(seed)
    M, N, q = 8, 3, 3
    syms = np.stack([rng.permutation(np.arange(M) % q) for _ in range(N)])
    if len({tuple(c) for c in syms.T}) < M:
        return
    pts = apsk_projections(q, [q], [1.0])
    cb = Codebook.from_symbols(syms, [pts] * N)
    n = int(rng.integers(N))
    rot = [pts] * N
    rot[n] = ProjectionSet(pts.points * np.exp(1j * theta))
    cb2 = Codebook.from_symbols(syms, rot)
    assert min_euclidean_sq(cb2) == pytest.approx(min_euclidean_sq(cb), rel=1e-9)
    assert min_product_distance(cb2) == pytest.approx(min_product_distance(cb), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lift_preserves_hamming_structure(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.choice([3, 4, 5]))
    T = gf_build(q)
    n = int(rng.integers(2, 5))
    G = rng.integers(0, q, (2, n))
    G[:, :2] = np.eye(2, dtype=int)
    code = span_code(explicit_generator(T, G))
    r = rng.uniform(0.5, 2.0)
    cb = lift_code(code, apsk_projections(q, [q], [r]))
    assert mssd(cb) == code.d_min
    assert papr(cb) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_papr_at_least_one(seed):
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert papr(Codebook.from_matrix(mat)) >= 1.0 - 1e-12


def test_json_roundtrip(tmp_path):
    cb = hc_codebook()
    labels = list(range(8))[::-1]
    obj = codebook_to_json(cb, labels)
    cb2, lab2 = codebook_from_json(obj)
    np.testing.assert_allclose(cb2.mat, cb.mat, atol=1e-15)
    np.testing.assert_array_equal(cb2.symbols, cb.symbols)
    assert list(lab2) == labels
    save_codebook(tmp_path / "cb.json", cb)
    cb3, lab3 = load_codebook(tmp_path / "cb.json")
    assert lab3 is None and cb3.M == 8
