import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semlink.harness import fer_point
from semlink.polar import (
    PolarCodeSpec,
    bhattacharyya,
    construct,
    encode,
    polar_transform,
    sc_decode,
    sc_decode_batch,
)


def kron_matrix(n):
    g = np.array([[1]], dtype=np.uint8)
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    while g.shape[0] < n:
        g = np.kron(g, f)
    return g


def z_oracle(n, z0):
    """Direct recursion: the first branch taken fixes the index MSB."""
    if n == 1:
        return [z0]
    return z_oracle(n // 2, 2 * z0 - z0 * z0) + z_oracle(n // 2, z0 * z0)


def sc_reference(frozen, llr, exact=False):
    """Textbook scalar SC without any special-node shortcuts."""

    def f(a, b):
        if exact:
            return 2 * math.atanh(math.tanh(a / 2) * math.tanh(b / 2))
        return math.copysign(1, a) * math.copysign(1, b) * min(abs(a), abs(b)) if a and b else 0.0

    def node(llr, frozen):
        if len(llr) == 1:
            bit = 0 if frozen[0] or llr[0] >= 0 else 1
            return [bit], [bit]
        h = len(llr) // 2
        a, b = llr[:h], llr[h:]
        ul, xl = node([f(a[i], b[i]) for i in range(h)], frozen[:h])
        ur, xr = node([b[i] + (1 - 2 * xl[i]) * a[i] for i in range(h)], frozen[h:])
        return ul + ur, [xl[i] ^ xr[i] for i in range(h)] + xr

    return node(list(llr), list(frozen))[0]


def sc_bruteforce(frozen, llr):
    """Exact SC: each decision marginalises all later bits, frozen or not."""
    n = len(frozen)
    g = kron_matrix(n)
    u_hat = []
    for i in range(n):
        if frozen[i]:
            u_hat.append(0)
            continue
        score = [-math.inf, -math.inf]
        for bit in (0, 1):
            for tail in itertools.product((0, 1), repeat=n - i - 1):
                u = np.array(u_hat + [bit] + list(tail), dtype=np.uint8)
                x = u @ g % 2
                # log P(y|x) up to a constant: sum of +-llr/2
                score[bit] = np.logaddexp(score[bit], float(np.sum((1 - 2 * x.astype(float)) * llr / 2)))
        u_hat.append(0 if score[0] >= score[1] else 1)
    return u_hat


# construct ---------------------------------------------------------------


def test_bhattacharyya_n4_example():
    z = bhattacharyya(4, 0.5)
    np.testing.assert_allclose(z, z_oracle(4, 0.5))
    np.testing.assert_allclose(z, [0.9375, 0.5625, 0.4375, 0.0625])


def test_construct_n4_freezes_least_reliable():
    spec = construct(4, 2, z0=0.5)
    assert spec.frozen_indices.tolist() == [0, 1]
    assert spec.info_indices.tolist() == [2, 3]


@pytest.mark.parametrize("n", [2, 8, 64, 1024])
def test_bhattacharyya_matches_recursive_oracle(n):
    np.testing.assert_allclose(bhattacharyya(n, 0.37), z_oracle(n, 0.37), rtol=1e-12)


def test_trivial_codes():
    assert not construct(1, 1, 2.5).frozen_mask.any()
    assert construct(2, 2, 2.5).frozen_mask.tolist() == [False, False]


def test_construct_uses_design_ebno():
    spec = construct(16, 8, 2.5)
    z0 = math.exp(-0.5 * 10 ** 0.25)
    expected = construct(16, 8, z0=z0)
    assert np.array_equal(spec.frozen_mask, expected.frozen_mask)
    assert spec.design_ebno_db == 2.5
    assert spec.rate == 0.5


def test_ties_freeze_lower_index_first():
    # z0 = 1 makes every channel useless, so all Z tie at 1.0
    spec = construct(8, 3, z0=1.0)
    assert spec.frozen_indices.tolist() == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("n,k", [(3, 1), (6, 2), (0, 0), (8, 0), (8, 9)])
def test_construct_rejects_bad_sizes(n, k):
    with pytest.raises(ValueError):
        construct(n, k, 2.5)


def test_spec_invariants_checked():
    with pytest.raises(ValueError):
        PolarCodeSpec(4, 2, np.array([True, False, False, False]))


@given(st.floats(-5, 10), st.floats(0.01, 5))
@settings(max_examples=60, deadline=None)
def test_construction_monotone_in_design_ebno(ebno, delta):
    lo = bhattacharyya(256, math.exp(-0.5 * 10 ** (ebno / 10)))
    hi = bhattacharyya(256, math.exp(-0.5 * 10 ** ((ebno + delta) / 10)))
    assert np.all(hi <= lo)
    assert np.all((lo >= 0) & (lo <= 1))


def test_construction_deterministic():
    a, b = construct(4096, 2048, 2.5), construct(4096, 2048, 2.5)
    assert np.array_equal(a.frozen_mask, b.frozen_mask)
    assert int(a.frozen_mask.sum()) == 2048


# encode ------------------------------------------------------------------


def test_encode_n2():
    spec = construct(2, 2, 2.5)
    assert encode(spec, [1, 1]).tolist() == [0, 1]


def test_encode_n4_matches_kronecker_matrix():
    spec = construct(4, 2, z0=0.5)
    u = np.array([0, 0, 1, 1], dtype=np.uint8)
    assert (u @ kron_matrix(4) % 2).tolist() == [0, 1, 0, 1]
    assert encode(spec, [1, 1]).tolist() == [0, 1, 0, 1]


def test_all_zero_message_gives_zero_codeword():
    spec = construct(64, 32, 2.5)
    assert not encode(spec, np.zeros(32, dtype=np.uint8)).any()


@pytest.mark.parametrize("n", [8, 32, 256])
def test_transform_matches_matrix(n):
    rng = np.random.default_rng(n)
    u = rng.integers(0, 2, (20, n), dtype=np.uint8)
    assert np.array_equal(polar_transform(u), u @ kron_matrix(n) % 2)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_encode_is_linear(data):
    spec = construct(64, 32, 2.5)
    bits = st.lists(st.integers(0, 1), min_size=32, max_size=32)
    u = np.array(data.draw(bits), dtype=np.uint8)
    v = np.array(data.draw(bits), dtype=np.uint8)
    assert np.array_equal(encode(spec, u ^ v), encode(spec, u) ^ encode(spec, v))


def test_encode_rejects_wrong_length_and_values():
    spec = construct(8, 4, 2.5)
    with pytest.raises(ValueError):
        encode(spec, [0, 1, 0])
    with pytest.raises(ValueError):
        encode(spec, [0, 1, 2, 0])


# decode ------------------------------------------------------------------


def test_saturated_zero_codeword_decodes_to_zero():
    spec = construct(64, 32, 2.5)
    assert not sc_decode(spec, np.full(64, 20.0)).any()


def test_round_trip_1000_messages():
    spec = construct(64, 32, 2.5)
    rng = np.random.default_rng(7)
    msgs = rng.integers(0, 2, (1000, 32), dtype=np.uint8)
    llrs = (1.0 - 2.0 * encode(spec, msgs)) * 50.0
    assert np.array_equal(sc_decode_batch(spec, llrs), msgs)
    assert np.array_equal(sc_decode(spec, llrs[3]), msgs[3])


def test_frozen_positions_decode_to_zero():
    spec = construct(128, 40, 2.5)
    rng = np.random.default_rng(2)
    u = sc_decode_batch(spec, rng.normal(0, 3, (200, 128)), return_u=True)
    assert not u[:, spec.frozen_mask].any()


@pytest.mark.parametrize("n,k", [(8, 4), (16, 5), (64, 32), (128, 100)])
def test_batch_decoder_matches_textbook_sc(n, k):
    spec = construct(n, k, 1.0)
    rng = np.random.default_rng(n + k)
    llrs = rng.normal(1.0, 2.0, (60, n))
    fast = sc_decode_batch(spec, llrs, return_u=True)
    for row, got in zip(llrs, fast):
        assert got.tolist() == sc_reference(spec.frozen_mask, row)


def test_exact_check_node_matches_bruteforce_sc():
    spec = construct(8, 4, 1.0)
    rng = np.random.default_rng(11)
    llrs = rng.normal(1.5, 2.0, (40, 8))
    got = sc_decode_batch(spec, llrs, check_node="exact", return_u=True)
    for row, u in zip(llrs, got):
        assert u.tolist() == sc_bruteforce(spec.frozen_mask, row)
        assert u.tolist() == sc_reference(spec.frozen_mask, row, exact=True)


def test_sc_agrees_with_ml_on_n4():
    spec = construct(4, 2, 3.0)
    book_msgs = np.array(list(itertools.product((0, 1), repeat=2)), dtype=np.uint8)
    book = encode(spec, book_msgs)
    rng = np.random.default_rng(3)
    sigma2 = 1 / (2 * 0.5 * 10 ** 0.3)
    msgs = rng.integers(0, 2, (10_000, 2), dtype=np.uint8)
    y = 1.0 - 2.0 * encode(spec, msgs) + rng.normal(0, math.sqrt(sigma2), (10_000, 4))
    sc = sc_decode_batch(spec, 2 * y / sigma2)
    ml = book_msgs[np.argmax(y @ (1.0 - 2.0 * book).T, axis=1)]
    agreement = np.mean(np.all(sc == ml, axis=1))
    assert agreement >= 0.99


def test_decode_rejects_bad_llrs():
    spec = construct(8, 4, 2.5)
    with pytest.raises(ValueError):
        sc_decode(spec, np.zeros(7))
    with pytest.raises(ValueError):
        sc_decode(spec, [0, 0, 0, np.inf, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        sc_decode(spec, [0, 0, 0, np.nan, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        sc_decode_batch(spec, np.zeros((2, 8)), check_node="tanh")


def test_fer_lower_at_higher_ebno():
    spec = construct(1024, 512, 2.5)
    low = fer_point(spec, 1.0, 2000, seed=5)
    high = fer_point(spec, 3.0, 2000, seed=5)
    assert high.fer < low.fer
