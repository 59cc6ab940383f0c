import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from bhescape import finalstate, stats
from bhescape.randsrc import RngStream, random_pure_state
from conftest import random_complex


def test_schmidt_of_maximally_entangled():
    np.testing.assert_allclose(stats.schmidt_spectrum(finalstate.maximally_entangled(4)).lambdas,
                               [0.5] * 4, atol=1e-15)


def test_schmidt_of_product():
    s = finalstate.product_final_state([1, 0, 0], [0, 1, 0])
    np.testing.assert_allclose(stats.schmidt_spectrum(s).lambdas, [1, 0, 0], atol=1e-15)


def test_schmidt_matches_partial_trace_oracle(nprng):
    c = random_complex(nprng, (3, 3))
    rho_a = np.einsum("ab,cb->ac", c, c.conj())
    lam = stats.schmidt_spectrum(finalstate.BipartitePureState(c)).lambdas
    np.testing.assert_allclose(np.sort(lam ** 2), np.linalg.eigvalsh(rho_a), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(a=st.integers(1, 7), b=st.integers(1, 7), seed=st.integers(0, 2**32 - 1))
def test_schmidt_reconstruction_and_bounds(a, b, seed):
    s = random_pure_state(a, b, RngStream(seed))
    sp = stats.schmidt_spectrum(s)
    assert np.linalg.norm(sp.coefficient_matrix() - s.coeffs) <= 1e-10
    assert abs(np.sum(sp.lambdas ** 2) - 1) <= 1e-12
    assert np.all(np.diff(sp.lambdas) <= 0)
    for basis in (sp.basis_a, sp.basis_b):
        assert np.linalg.norm(basis.conj().T @ basis - np.eye(basis.shape[1])) <= 1e-10
    e = stats.entanglement_entropy_bits(sp)
    assert -1e-12 <= e <= math.log2(min(a, b)) + 1e-12


def test_entropy_examples():
    assert stats.entanglement_entropy_bits([1.0, 0.0, 0.0]) == 0.0
    for n in (1, 2, 5, 64):
        assert stats.entanglement_entropy_bits(np.full(n, n ** -0.5)) == pytest.approx(math.log2(n), abs=1e-12)
    assert stats.entanglement_entropy_bits([math.sqrt(0.5)] * 2) == pytest.approx(1.0, abs=1e-15)
    # coefficients at or below 1e-14 are exact zeros
    assert stats.entanglement_entropy_bits([1.0, 1e-15]) == 0.0


def test_trace_norm_sum_examples():
    assert stats.trace_norm_sum([1, 0, 0]) == 1
    assert stats.trace_norm_sum(np.full(16, 0.25)) == pytest.approx(4.0)


def test_banaszek_examples():
    for n in (1, 2, 7, 64):
        assert stats.banaszek_fidelity(np.full(n, n ** -0.5), n) == pytest.approx(1.0, abs=1e-12)
    assert stats.banaszek_fidelity([1, 0], 2) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        stats.banaszek_fidelity([0.6, 0.8], 1)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_banaszek_monotone_in_trace_norm(n, seed):
    a, b = (stats.schmidt_coefficients(random_pure_state(n, n, RngStream(seed, i))) for i in (0, 1))
    if stats.trace_norm_sum(a) > stats.trace_norm_sum(b):
        a, b = b, a
    assert stats.banaszek_fidelity(a, n) <= stats.banaszek_fidelity(b, n)


def test_page_entropy_examples():
    assert stats.page_entropy_exact(1, 7) == 0.0
    # (1/3 + 1/4 - 1/4) / ln 2
    assert stats.page_entropy_exact(2, 2) == pytest.approx(0.48089834696298783, abs=1e-14)
    assert stats.page_entropy_exact(5, 3) == stats.page_entropy_exact(3, 5)
    deficit = 6 - stats.page_entropy_exact(64, 64)
    assert deficit == pytest.approx(1 / (2 * math.log(2)), abs=0.01)
    assert stats.page_deficit_limit_bits() == pytest.approx(0.7213475204444817)


def test_page_entropy_matches_digamma_form():
    from scipy.special import digamma
    for m, n in [(2, 3), (8, 8), (10, 100), (1000, 1000)]:
        ref = (digamma(m * n + 1) - digamma(n + 1) - (m - 1) / (2 * n)) / math.log(2)
        assert stats.page_entropy_exact(m, n) == pytest.approx(ref, rel=1e-12)


def test_lubkin_examples():
    assert stats.lubkin_purity_exact(1, 1) == 1
    assert stats.lubkin_purity_exact(2, 2) == pytest.approx(0.8)
    assert stats.lubkin_purity_exact(2, 4) == pytest.approx(6 / 9)


@pytest.mark.parametrize("m,n", [(2, 2), (2, 4)])
def test_lubkin_monte_carlo(m, n):
    rng = RngStream(2024, 0)
    from bhescape.randsrc import ginibre
    g = ginibre(100_000 * m, n, rng).reshape(100_000, m, n)
    g /= np.linalg.norm(g, axis=(1, 2), keepdims=True)
    lam = np.linalg.svd(g, compute_uv=False)
    assert abs(np.mean(np.sum(lam ** 4, axis=1)) - stats.lubkin_purity_exact(m, n)) < 0.005


def test_trace_norm_constant_from_gamma_ratio():
    assert stats.trace_norm_constant() == pytest.approx(8 / (3 * math.pi), rel=1e-15)
    assert stats.asymptotic_mean_trace_norm(1) == pytest.approx(0.84883, abs=1e-5)
    assert stats.asymptotic_mean_trace_norm(64) == pytest.approx(6.7907, abs=1e-4)
    assert stats.asymptotic_fidelity() == pytest.approx(64 / (9 * math.pi ** 2), rel=1e-15)
    assert stats.asymptotic_fidelity() == pytest.approx(0.720506, abs=1e-6)
    assert stats.printed_fidelity_value() == pytest.approx(0.8488, abs=1e-4)


def _haar_lambdas(n, trials, seed):
    return [stats.schmidt_coefficients(random_pure_state(n, n, RngStream(seed, i)))
            for i in range(trials)]


def test_trace_norm_monte_carlo_n64():
    lams = _haar_lambdas(64, 500, 3)
    mean = np.mean([stats.trace_norm_sum(l) for l in lams])
    assert mean / stats.asymptotic_mean_trace_norm(64) == pytest.approx(1.0, abs=0.01)
    ratio = np.array([stats.trace_norm_sum(l) / 8 for l in lams])
    # concentration behind replacing <(sum l)^2> by <sum l>^2
    assert ratio.var(ddof=1) <= 0.01
    banaszek = np.mean([stats.banaszek_fidelity(l, 64) for l in lams])
    assert banaszek == pytest.approx((1 + stats.trace_norm_constant() ** 2 * 64) / 65, abs=0.02)


def test_banaszek_finite_size_and_limit():
    small = np.mean([stats.banaszek_fidelity(l, 4) for l in _haar_lambdas(4, 2000, 8)])
    assert small > stats.asymptotic_fidelity() + 0.03
    big = np.mean([stats.banaszek_fidelity(l, 256) for l in _haar_lambdas(256, 500, 9)])
    assert big == pytest.approx(stats.asymptotic_fidelity(), abs=0.01)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
def test_entropy_and_purity_within_three_sigma(n):
    lams = _haar_lambdas(n, 2000, 100 + n)
    ent = np.array([stats.entanglement_entropy_bits(l) for l in lams])
    pur = np.array([stats.purity(l) for l in lams])
    assert abs(ent.mean() - stats.page_entropy_exact(n, n)) <= 3 * ent.std(ddof=1) / np.sqrt(ent.size)
    assert abs(pur.mean() - stats.lubkin_purity_exact(n, n)) <= 3 * pur.std(ddof=1) / np.sqrt(pur.size)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n1=st.integers(1, 60), n2=st.integers(1, 60))
def test_ks_statistic_matches_scipy(seed, n1, n2):
    g = np.random.default_rng(seed)
    x, y = g.normal(size=n1), g.normal(0.3, 1.0, size=n2)
    assert stats.ks_statistic(x, y) == pytest.approx(sps.ks_2samp(x, y).statistic, abs=1e-12)


def test_ks_critical_value():
    assert stats.ks_critical_value(100, 100, 0.01) == pytest.approx(1.6276 * math.sqrt(0.02), rel=1e-4)
    with pytest.raises(ValueError):
        stats.ks_statistic([], [1.0])
