"""Erasure polynomials, tree evolution, sampling, window reports."""

import numpy as np
import pytest

from polarkit.entropy import erasure_joint, polar_entropies
from polarkit.fqlin import FqMatrix, kron
from polarkit.kernelscope import random_mixing
from polarkit.polarlab import (
    erasure_polynomials,
    evolve_tree,
    leading_exponents,
    local_profile,
    polarization_report,
    sample_paths,
)

ARIKAN = FqMatrix(2, [[1, 0], [1, 1]])


def test_two_by_two_pattern_counts():
    eps = erasure_polynomials(ARIKAN)
    assert eps.counts.tolist() == [[0, 2, 1], [0, 0, 1]]
    x = np.linspace(0.0, 1.0, 21)
    f = eps.evaluate(x)
    assert np.allclose(f[:, 0], 2 * x - x * x, atol=1e-15)
    assert np.allclose(f[:, 1], x * x, atol=1e-15)


def test_identity_kernel_polynomials():
    eps = erasure_polynomials(FqMatrix.identity(3, 3))
    x = np.linspace(0.0, 1.0, 11)
    assert np.allclose(eps.evaluate(x), x[:, None], atol=1e-15)


def test_martingale_sum_property_random_kernels():
    rng = np.random.default_rng(2)
    x = np.linspace(0.0, 1.0, 11)
    for q in (2, 3, 5):
        for _ in range(8):
            k = int(rng.integers(2, 5))
            m = random_mixing(q, k, rng)
            f = erasure_polynomials(m).evaluate(x)
            assert np.allclose(f.sum(axis=1), k * x, atol=1e-12)


def test_boundary_values():
    rng = np.random.default_rng(12)
    for q in (2, 3):
        m = random_mixing(q, 4, rng)
        eps = erasure_polynomials(m)
        assert np.allclose(eps.evaluate(0.0), 0.0, atol=1e-15)
        assert np.allclose(eps.evaluate(1.0), 1.0, atol=1e-15)


def test_cross_oracle_against_entropy_engine():
    rng = np.random.default_rng(9)
    zs = np.arange(0.1, 0.95, 0.1)
    for q in (2, 3):
        for k in (2, 3, 4):
            m = random_mixing(q, k, rng)
            eps = erasure_polynomials(m)
            for z in zs:
                h = polar_entropies(m, erasure_joint(q, z)).h
                assert np.allclose(eps.evaluate(z), h, atol=1e-9)


def test_singular_kernel_rejected():
    with pytest.raises(ValueError, match="singular"):
        erasure_polynomials(FqMatrix(2, [[1, 1], [1, 1]]))


def test_leading_exponents_examples():
    lead = leading_exponents(ARIKAN)
    assert lead.d.tolist() == [1, 2]
    assert lead.eta == pytest.approx(0.5) and lead.b == 2
    assert lead.constants.tolist() == [2, 1]

    lead_id = leading_exponents(FqMatrix.identity(2, 3))
    assert lead_id.d.tolist() == [1, 1, 1]
    assert lead_id.eta == 0.0 and lead_id.b is None


def test_evolve_tree_small_levels():
    assert evolve_tree(ARIKAN, 0.5, 0).values.tolist() == [0.5]
    level1 = evolve_tree(ARIKAN, 0.5, 1)
    assert level1.values.tolist() == [0.75, 0.25]
    level2 = evolve_tree(ARIKAN, 0.5, 2)
    # lexicographic: (f1 f1, f2 f1, f1 f2, f2 f2) applied inner-first
    assert level2.values.tolist() == [
        2 * 0.75 - 0.75**2,
        0.75**2,
        2 * 0.25 - 0.25**2,
        0.25**2,
    ]


def test_tree_mean_conservation():
    for z0 in (0.2, 0.5, 0.8):
        for t in (4, 8, 12):
            level = evolve_tree(ARIKAN, z0, t)
            assert level.mean == pytest.approx(z0, abs=1e-9)


def test_tree_budget():
    with pytest.raises(ValueError, match="budget"):
        evolve_tree(ARIKAN, 0.5, 21, budget=10**6)


def test_sample_paths_trivial_and_mean():
    rng = np.random.default_rng(3)
    ends = sample_paths(ARIKAN, 0.5, 0, 100, rng)
    assert np.all(ends == 0.5)
    ends = sample_paths(ARIKAN, 0.5, 10, 100_000, rng)
    assert abs(float(ends.mean()) - 0.5) < 0.01


def test_sampled_endpoints_match_tree_distribution():
    rng = np.random.default_rng(7)
    t = 10
    tree_vals = np.sort(evolve_tree(ARIKAN, 0.5, t).values)
    ends = sample_paths(ARIKAN, 0.5, t, 100_000, rng)
    # Kolmogorov distance at the atoms of the exact tree distribution
    atoms = np.unique(tree_vals)
    tree_cdf = np.searchsorted(tree_vals, atoms, side="right") / tree_vals.size
    emp_cdf = np.searchsorted(np.sort(ends), atoms, side="right") / ends.size
    assert float(np.max(np.abs(tree_cdf - emp_cdf))) < 0.02


def test_polarization_report_trivial_cases():
    fully = polarization_report(
        [evolve_tree(ARIKAN, 0.0, 3), evolve_tree(ARIKAN, 1.0, 3)], 0.45, 0.8, 1e-6
    )
    assert np.all(fully.fraction_exp == 0.0)
    assert np.all(fully.fraction_strong == 0.0)

    # boundary values sit outside the open window
    from polarkit.polarlab import MartingaleTreeLevel

    level = MartingaleTreeLevel(1, np.array([0.5, 0.5]), 0)
    rep = polarization_report(level, 0.45, 0.5, 1e-6)
    assert rep.fraction_strong[0] == 0.0


def test_polarization_report_decay_trend():
    levels = evolve_tree(ARIKAN, 0.5, 14, return_all=True)
    rep = polarization_report(levels[6:], 0.45, 0.8, 1e-6)
    assert rep.rho_hat < 1.0
    fe = rep.fraction_exp
    t8 = list(rep.levels).index(8)
    assert all(fe[i + 1] <= fe[i] for i in range(t8, len(fe) - 1))


def test_polarization_report_validation():
    with pytest.raises(ValueError):
        polarization_report([], 0.45, 0.8, 1e-6)
    with pytest.raises(ValueError):
        polarization_report(evolve_tree(ARIKAN, 0.5, 2), 0.45, 1.5, 1e-6)


def test_underflow_flush_is_counted():
    level = evolve_tree(ARIKAN, 0.5, 12)
    assert level.underflow_count > 0
    assert not ((level.values > 0) & (level.values < 1e-300)).any()


def test_local_profile_identity():
    prof = local_profile(FqMatrix.identity(2, 2))
    assert np.allclose(prof.variance, 0.0, atol=1e-15)
    assert all(row.fraction_low == 0.0 and row.fraction_high == 0.0 for row in prof.suction)


def test_local_profile_arikan():
    prof = local_profile(ARIKAN, grid=np.array([0.5]))
    assert prof.variance[0] == pytest.approx(0.0625, abs=1e-12)
    for row in prof.suction:
        assert row.fraction_low == pytest.approx(0.5)
        assert row.fraction_high == pytest.approx(0.5)


def test_local_profile_mixing_variance_positive():
    rng = np.random.default_rng(5)
    for q in (2, 3):
        m = random_mixing(q, 3, rng)
        prof = local_profile(m)
        assert prof.min_variance(0.05) > 0.0


def test_arikan_square_strong_suction_exponents():
    m2 = kron(ARIKAN, ARIKAN)
    lead = leading_exponents(m2)
    assert lead.d.tolist() == [1, 2, 2, 4]


def test_strong_suction_certificate():
    # if d[j] >= 2 on a fraction eta, then for small x the same fraction of
    # indices satisfies f_j(x) <= x^(b - 0.1)
    rng = np.random.default_rng(31)
    for q in (2, 3):
        for _ in range(5):
            m = random_mixing(q, 3, rng)
            eps = erasure_polynomials(m)
            lead = leading_exponents(eps)
            if lead.eta == 0.0:
                continue
            for x in 2.0 ** -np.arange(12, 21):
                frac = np.mean(eps.evaluate(x) <= x ** (lead.b - 0.1))
                assert frac >= lead.eta - 1e-12


def test_pattern_budget_guard():
    big = FqMatrix.identity(2, 21)
    with pytest.raises(ValueError, match="budget"):
        erasure_polynomials(big)
