"""Channel construction, symmetry verdicts, capacities, sampling."""

import math

import numpy as np
import pytest

from polarkit.channels import (
    capacity,
    make_erasure,
    make_qsc,
    make_table_channel,
    sample_output,
    sample_outputs,
    validate_symmetric,
)


def binary_entropy(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_qsc_table():
    c = make_qsc(3, 0.3)
    assert c.kind == "additive"
    for x in range(3):
        for y in range(3):
            expected = 0.7 if x == y else 0.15
            assert abs(c.w[x, y] - expected) < 1e-15


def test_qsc_noiseless_is_identity_table():
    c = make_qsc(2, 0.0)
    assert np.array_equal(c.w, np.eye(2))


def test_qsc_invalid_eps():
    with pytest.raises(ValueError):
        make_qsc(2, 1.5)


def test_erasure_table_and_edge_cases():
    c = make_erasure(2, 0.4)
    assert c.outputs == 3 and c.erasure_symbol == 2
    assert abs(c.w[0, 0] - 0.6) < 1e-15 and abs(c.w[0, 2] - 0.4) < 1e-15
    assert capacity(make_erasure(2, 0.0)) == pytest.approx(1.0, abs=1e-12)
    assert capacity(make_erasure(3, 1.0)) == pytest.approx(0.0, abs=1e-12)


def test_symmetric_verdicts():
    assert validate_symmetric(make_qsc(3, 0.2)).ok
    assert validate_symmetric(make_erasure(2, 0.4)).ok
    z = make_table_channel(2, [[1.0, 0.0], [0.3, 0.7]], require_symmetric=False)
    cert = validate_symmetric(z)
    assert not cert.ok
    assert cert.violation is not None


def test_symmetry_certificate_bijections_verify():
    c = make_erasure(3, 0.25)
    cert = validate_symmetric(c)
    assert cert.ok
    for (a, b), sigma in cert.bijections.items():
        assert sorted(sigma.tolist()) == list(range(c.outputs))
        assert np.max(np.abs(c.w[a] - c.w[b][sigma])) <= 1e-12


def test_table_channel_enforces_symmetry_by_default():
    with pytest.raises(ValueError, match="not symmetric"):
        make_table_channel(2, [[1.0, 0.0], [0.3, 0.7]])


def test_capacity_erasure_closed_form():
    for q in (2, 3, 5):
        for z in (0.0, 0.1, 0.5, 0.9, 1.0):
            assert capacity(make_erasure(q, z)) == pytest.approx(1.0 - z, abs=1e-12)


def test_capacity_qsc_binary():
    # direct mutual-information computation as the oracle
    eps = 0.11
    c = make_qsc(2, eps)
    oracle = 1.0 - binary_entropy(eps)
    assert capacity(c) == pytest.approx(oracle, abs=1e-12)
    assert abs(capacity(c) - 0.5) < 1e-3
    assert capacity(make_qsc(2, 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_capacity_additive_matches_noise_entropy():
    for q in (2, 3, 5):
        for eps in (0.05, 0.2, 0.4):
            c = make_qsc(q, eps)
            h_noise = -(1 - eps) * math.log2(1 - eps) - eps * math.log2(eps / (q - 1))
            assert capacity(c) == pytest.approx(1.0 - h_noise / math.log2(q), abs=1e-12)


def test_capacity_invariant_under_relabeling():
    c = make_erasure(3, 0.35)
    perm = [2, 0, 3, 1]
    w = c.w[:, perm]
    relabeled = make_table_channel(3, w)
    assert capacity(relabeled) == pytest.approx(capacity(c), abs=1e-12)


def test_capacity_rejects_non_symmetric():
    z = make_table_channel(2, [[1.0, 0.0], [0.3, 0.7]], require_symmetric=False)
    with pytest.raises(ValueError, match="symmetric"):
        capacity(z)


def test_sampling_deterministic_cases():
    rng = np.random.default_rng(0)
    noiseless = make_qsc(2, 0.0)
    assert all(sample_output(noiseless, 1, rng) == 1 for _ in range(20))
    always_erased = make_erasure(3, 1.0)
    assert all(sample_output(always_erased, x, rng) == 3 for x in range(3))


def test_sampling_frequencies_match_table():
    rng = np.random.default_rng(123)
    c = make_qsc(2, 0.3)
    draws = sample_outputs(c, np.zeros(100_000, dtype=np.int64), rng)
    flip_rate = float(np.mean(draws == 1))
    assert abs(flip_rate - 0.3) < 0.01


def test_sampling_reproducible_for_fixed_seed():
    c = make_erasure(2, 0.5)
    x = np.arange(256) % 2
    a = sample_outputs(c, x, np.random.default_rng(9))
    b = sample_outputs(c, x, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_row_sum_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        make_table_channel(2, [[0.9, 0.0], [0.0, 1.0]], require_symmetric=False)
