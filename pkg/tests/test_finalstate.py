import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhescape import finalstate as fs
from bhescape import linalg, randsrc, stats
from bhescape.randsrc import RngStream


def brute_force_channel(final, u, n):
    """Contract <final|_{matter,in} U |m>_matter |pair>_{in,out} over the full
    N^3-dimensional matter (x) in (x) out space, one basis input at a time."""
    pair = np.eye(n).reshape(-1) / math.sqrt(n)          # index (in, out)
    u = np.eye(n * n) if u is None else u
    t = np.zeros((n, n), dtype=complex)
    for m in range(n):
        matter = np.zeros(n)
        matter[m] = 1.0
        full = np.kron(matter, pair).reshape(n * n, n)   # (matter*in, out)
        full = u @ full
        t[:, m] = final.vector().conj() @ full
    return t


def test_maximally_entangled():
    np.testing.assert_array_equal(fs.maximally_entangled(1).coeffs, [[1]])
    np.testing.assert_allclose(fs.maximally_entangled(2).coeffs, np.eye(2) / math.sqrt(2))
    for n in (3, 9):
        np.testing.assert_allclose(stats.schmidt_spectrum(fs.maximally_entangled(n)).lambdas,
                                   np.full(n, n ** -0.5), atol=1e-15)
    with pytest.raises(ValueError):
        fs.maximally_entangled(0)


def test_hm_final_state(rng):
    np.testing.assert_allclose(fs.hm_final_state(np.eye(2)).coeffs, fs.maximally_entangled(2).coeffs)
    s = randsrc.haar_unitary(5, rng)
    np.testing.assert_allclose(stats.schmidt_spectrum(fs.hm_final_state(s)).lambdas,
                               np.full(5, 5 ** -0.5), atol=1e-12)
    x = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(fs.hm_final_state(x).coeffs, x / math.sqrt(2))
    with pytest.raises(ValueError):
        fs.hm_final_state(np.diag([1.0, 2.0]))


def test_product_final_state():
    s = fs.product_final_state([1, 0], [1, 0])
    np.testing.assert_array_equal(s.coeffs, [[1, 0], [0, 0]])
    np.testing.assert_allclose(stats.schmidt_spectrum(s).lambdas, [1, 0], atol=1e-15)
    ch = fs.channel_from_final_state(fs.product_final_state([0.6, 0.8j], [0, 1]))
    assert np.sum(linalg.svd(ch.t_tilde, "jacobi").singular_values > 1e-12) == 1
    with pytest.raises(ValueError):
        fs.product_final_state([0, 0], [1, 0])
    with pytest.raises(ValueError):
        fs.product_final_state([1, 1], [1, 0])


def test_state_requires_unit_norm():
    with pytest.raises(ValueError):
        fs.BipartitePureState(np.eye(2))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["hm", "haar", "product"])
def test_channel_matches_brute_force_contraction(n, kind):
    rng = RngStream(17, n)
    if kind == "hm":
        final = fs.hm_final_state(randsrc.haar_unitary(n, rng))
    elif kind == "haar":
        final = randsrc.random_pure_state(n, n, rng)
    else:
        final = fs.product_final_state(randsrc.random_unit_vector(n, rng),
                                       randsrc.random_unit_vector(n, rng))
    u = randsrc.haar_unitary(n * n, rng)
    for uu in (None, u):
        ch = fs.channel_from_final_state(final, uu, n)
        assert np.abs(ch.t_raw - brute_force_channel(final, uu, n)).max() < 1e-13


def test_hm_channel_is_unitary_s_dagger(rng):
    for n in (1, 2, 5, 16):
        s = randsrc.haar_unitary(n, rng)
        ch = fs.channel_from_final_state(fs.hm_final_state(s))
        np.testing.assert_allclose(ch.t_raw, s.conj().T / n, atol=1e-14)
        assert linalg.unitarity_defect(ch.normalized()) <= 1e-10
        assert np.linalg.norm(ch.t_tilde.conj().T @ ch.t_tilde * n - np.eye(n)) <= 1e-10
        assert fs.process_fidelity(ch.normalized(), s.conj().T) == pytest.approx(1.0, abs=1e-10)


def test_maximally_entangled_channel():
    ch = fs.channel_from_final_state(fs.maximally_entangled(3))
    np.testing.assert_allclose(ch.t_raw, np.eye(3) / 3, atol=1e-15)
    np.testing.assert_allclose(ch.t_tilde, np.eye(3) / math.sqrt(3), atol=1e-15)
    np.testing.assert_allclose(ch.t_prime, np.eye(3), atol=1e-14)


def test_product_channel_collapses_every_input_to_one_ray(rng):
    final = fs.product_final_state(randsrc.random_unit_vector(2, rng), randsrc.random_unit_vector(2, rng))
    t = brute_force_channel(final, None, 2)
    outs = []
    for _ in range(5):
        v = t @ randsrc.random_unit_vector(2, rng)
        outs.append(v / np.linalg.norm(v))
    for o in outs[1:]:
        assert abs(abs(np.vdot(outs[0], o)) - 1) < 1e-12


def test_channel_argument_errors(rng):
    final = fs.maximally_entangled(2)
    with pytest.raises(ValueError):
        fs.channel_from_final_state(final, np.eye(3))
    with pytest.raises(ValueError, match="not unitary"):
        fs.channel_from_final_state(final, 2 * np.eye(4))
    with pytest.raises(ValueError):
        fs.channel_from_final_state(final, None, n=3)
    with pytest.raises(ValueError, match="capped"):
        fs.channel_from_final_state(fs.maximally_entangled(65), np.eye(1))
    with pytest.raises(ValueError):
        fs.channel_from_random_state(fs.BipartitePureState(np.ones((2, 3)) / math.sqrt(6)))


def test_random_state_channel_examples():
    ch = fs.channel_from_random_state(fs.maximally_entangled(4))
    assert linalg.unitarity_defect(ch.normalized()) < 1e-12
    ch = fs.channel_from_spectrum([1, 0])
    assert ch.t_prime is None
    assert np.sum(linalg.singular_values(ch.t_tilde) > 1e-12) == 1


def test_cross_path_consistency_n4():
    for seed in range(10):
        rng = RngStream(seed, 0)
        final = fs.hm_final_state(np.eye(4))
        u = randsrc.haar_unitary(16, rng)
        explicit = fs.channel_from_final_state(final, u)
        shortcut = fs.channel_from_random_state(fs.post_interaction_state(final, u))
        assert np.abs(explicit.t_raw - shortcut.t_raw).max() <= 1e-12


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1),
       kind=st.sampled_from(["hm", "haar", "product"]), interact=st.booleans())
def test_channel_invariants(n, seed, kind, interact):
    rng = RngStream(seed)
    if kind == "hm":
        final = fs.hm_final_state(randsrc.haar_unitary(n, rng))
    elif kind == "haar":
        final = randsrc.random_pure_state(n, n, rng)
    else:
        final = fs.product_final_state(randsrc.random_unit_vector(n, rng), randsrc.random_unit_vector(n, rng))
    u = randsrc.haar_unitary(n * n, rng) if interact else None
    ch = fs.channel_from_final_state(final, u)
    assert abs(np.linalg.norm(ch.t_tilde) - 1) <= 1e-10
    np.testing.assert_allclose(linalg.svd(ch.t_tilde, "jacobi").singular_values, ch.lambdas, atol=1e-10)
    # T_tilde maps matter Schmidt vectors onto lambda * out Schmidt vectors
    np.testing.assert_allclose(ch.t_tilde @ ch.spectrum.basis_a, ch.out_basis * ch.lambdas, atol=1e-10)
    if ch.t_prime is not None:
        assert np.linalg.norm(ch.t_prime - linalg.polar_unitary(ch.t_tilde)) < 1e-8


def test_apply_channel_examples(rng):
    n = 4
    ch = fs.channel_from_random_state(fs.hm_final_state(randsrc.haar_unitary(n, rng)))
    mu = fs.InputState(randsrc.random_unit_vector(n, rng))
    out, pre = fs.apply_channel(ch, mu)
    np.testing.assert_allclose(out, ch.t_prime @ ch.spectrum.basis_a @ mu.amplitudes, atol=1e-12)
    # (1/sqrt N) * sqrt(sum lambda^2 |mu|^2) with lambda = 1/sqrt N
    assert pre == pytest.approx(1 / n, abs=1e-14)

    ch = fs.channel_from_spectrum([1, 0])
    out, pre = fs.apply_channel(ch, fs.InputState([1, 0]))
    np.testing.assert_allclose(abs(np.vdot(ch.out_basis[:, 0], out)), 1.0, atol=1e-14)
    assert pre == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    with pytest.raises(fs.AnnihilatedInputError, match="annihilated"):
        fs.apply_channel(ch, fs.InputState([0, 1]))
    with pytest.raises(ValueError):
        fs.apply_channel(ch, fs.InputState([1, 0, 0]))


def test_escape_fidelity_examples(rng):
    flat = fs.channel_from_random_state(fs.maximally_entangled(5))
    for _ in range(5):
        assert fs.escape_fidelity(flat, fs.InputState(randsrc.random_unit_vector(5, rng))) == pytest.approx(1.0, abs=1e-12)
    ch = fs.channel_from_spectrum([1, 0])
    mu = fs.InputState(np.array([1, 1]) / math.sqrt(2))
    assert fs.escape_fidelity(ch, mu) == pytest.approx(0.5, abs=1e-14)
    # literal vectors: renormalized output vs the Schmidt-basis image of mu
    out, _ = fs.apply_channel(ch, mu)
    target = ch.out_basis @ mu.amplitudes
    assert abs(np.vdot(out, target)) ** 2 == pytest.approx(0.5, abs=1e-14)
    assert fs.escape_fidelity(ch, fs.InputState([1, 0])) == pytest.approx(1.0)
    # the typical-input approximation is not a fidelity off the typical regime
    assert fs.overlap_approximation(ch, fs.InputState([1, 0])) == pytest.approx(2.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), theta=st.floats(0, 2 * math.pi))
def test_escape_fidelity_properties(n, seed, theta):
    rng = RngStream(seed)
    ch = fs.channel_from_random_state(randsrc.random_pure_state(n, n, rng))
    mu = fs.InputState(randsrc.random_unit_vector(n, rng))
    f = fs.escape_fidelity(ch, mu)
    assert 0 <= f <= 1 + 1e-12
    assert f == pytest.approx(fs.overlap_fidelity(ch, mu), abs=1e-9)
    out1, _ = fs.apply_channel(ch, mu)
    out2, _ = fs.apply_channel(ch, fs.InputState(np.exp(1j * theta) * mu.amplitudes))
    assert abs(abs(np.vdot(out1, out2)) - 1) < 1e-12


def test_flat_spectrum_iff_all_inputs_perfect(rng):
    ch = fs.channel_from_random_state(randsrc.random_pure_state(4, 4, rng))
    fids = [fs.escape_fidelity(ch, fs.InputState(randsrc.random_unit_vector(4, rng))) for _ in range(20)]
    assert min(fids) < 1 - 1e-10


def test_typical_fidelity_estimate(rng):
    assert fs.typical_fidelity_estimate(fs.channel_from_random_state(fs.maximally_entangled(7))) == pytest.approx(1.0)
    assert fs.typical_fidelity_estimate(fs.channel_from_spectrum([1, 0])) == pytest.approx(0.5)
    vals = [fs.typical_fidelity_estimate(fs.channel_from_random_state(
        randsrc.random_pure_state(64, 64, RngStream(4, i)))) for i in range(200)]
    assert np.mean(vals) == pytest.approx(64 / (9 * math.pi ** 2), abs=0.02)


def test_input_state_from_matter_vector(rng):
    ch = fs.channel_from_random_state(randsrc.random_pure_state(3, 3, rng))
    v = randsrc.random_unit_vector(3, rng)
    mu = fs.InputState.from_matter_vector(ch, v)
    np.testing.assert_allclose(ch.spectrum.basis_a @ mu.amplitudes, v, atol=1e-12)
