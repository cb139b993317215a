"""Exponential models, evaluation, and calibrated noise."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import index_sets
from gdesprit.domains import IndexSet, make_box
from gdesprit.errors import DomainError, GenerationError, NonFiniteError
from gdesprit.signal import (
    NODE_COLLISION_TOL,
    ExponentialModel,
    MdSequence,
    add_noise,
    eval_model,
    random_model,
    vandermonde,
)

EPS = np.finfo(np.float64).eps


def small_model(dim=2, K=3, seed=7, damping=0.2):
    rng = np.random.default_rng(seed)
    return random_model(K, dim, rng, layout="random_complex", damping_bound=damping)


class TestExponentialModel:
    def test_basic_construction(self):
        m = ExponentialModel(dim=2, zetas=[[0.1j, 0.2j], [0.3j, 0.4j]], coeffs=[1.0, 2.0])
        assert m.order == 2
        assert m.nodes.shape == (2, 2)
        np.testing.assert_allclose(m.nodes, np.exp(np.asarray(m.zetas)))

    def test_one_dimensional_zetas_promote(self):
        m = ExponentialModel(dim=1, zetas=[0.1j, 0.5j], coeffs=[1, 1])
        assert m.zetas.shape == (2, 1)

    def test_zero_coefficient_rejected(self):
        with pytest.raises(DomainError):
            ExponentialModel(dim=1, zetas=[[0.1j]], coeffs=[0.0])

    def test_duplicate_nodes_rejected(self):
        with pytest.raises(DomainError):
            ExponentialModel(dim=1, zetas=[[0.2j], [0.2j]], coeffs=[1, 1])

    def test_aliased_frequencies_evaluate_identically(self):
        # frequencies 2*pi*i apart are indistinguishable on integer lattices
        omega = make_box((9,))
        a = eval_model(ExponentialModel(1, [[0.5j]], [1.0]), omega)
        b = eval_model(ExponentialModel(1, [[0.5j + 2j * np.pi]], [1.0]), omega)
        np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-13)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteError):
            ExponentialModel(dim=1, zetas=[[np.inf + 0j]], coeffs=[1])

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            ExponentialModel(dim=2, zetas=[[0.1j, 0.2j]], coeffs=[1, 2])

    def test_arrays_read_only(self):
        m = small_model()
        with pytest.raises(ValueError):
            m.coeffs[0] = 0


class TestMdSequence:
    def test_length_checked(self):
        with pytest.raises(DomainError):
            MdSequence(make_box((2, 2)), np.ones(3))

    def test_norm(self):
        f = MdSequence(make_box((4,)), [3, 4, 0, 0])
        assert f.norm() == pytest.approx(5.0)

    def test_restrict_matches_direct_evaluation(self):
        model = small_model()
        omega = make_box((5, 5))
        sub = make_box((3, 2), offset=(1, 2))
        full = eval_model(model, omega)
        np.testing.assert_allclose(
            full.restrict(sub).values, eval_model(model, sub).values, rtol=0, atol=1e-14
        )

    def test_restrict_outside_raises(self):
        f = MdSequence(make_box((2, 2)), np.arange(4))
        with pytest.raises(DomainError):
            f.restrict(make_box((2, 2), offset=(5, 5)))


class TestVandermondeAndEval:
    @given(index_sets(dim=2, max_size=8, lo=-3, hi=3), st.integers(0, 10_000))
    def test_vandermonde_matches_scalar_loop(self, domain, seed):
        rng = np.random.default_rng(seed)
        zetas = rng.uniform(-0.3, 0.3, (3, 2)) + 1j * rng.uniform(-np.pi, np.pi, (3, 2))
        V = vandermonde(domain, zetas)
        for k in range(3):
            expected = oracles.eval_ref([zetas[k]], [1.0], domain.points)
            np.testing.assert_allclose(V[:, k], expected, rtol=1e-12)

    @given(st.integers(0, 10_000))
    def test_eval_matches_scalar_loop(self, seed):
        rng = np.random.default_rng(seed)
        model = random_model(4, 2, rng, layout="random_complex", damping_bound=0.3)
        omega = make_box((4, 3), offset=(-1, 0))
        got = eval_model(model, omega)
        expected = oracles.eval_ref(model.zetas, model.coeffs, omega.points)
        np.testing.assert_allclose(got.values, expected, rtol=1e-12)

    def test_eval_is_linear_in_coefficients(self):
        rng = np.random.default_rng(3)
        zetas = 1j * rng.uniform(-np.pi, np.pi, (3, 2))
        c1 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        c2 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        omega = make_box((4, 4))
        v1 = eval_model(ExponentialModel(2, zetas, c1), omega).values
        v2 = eval_model(ExponentialModel(2, zetas, c2), omega).values
        v12 = eval_model(ExponentialModel(2, zetas, c1 + c2), omega).values
        np.testing.assert_allclose(v12, v1 + v2, rtol=0, atol=1e-12 * np.abs(v12).max())

    def test_single_term_is_separable_product(self):
        zeta = np.array([[0.1 + 0.4j, -0.2 + 1.1j]])
        model = ExponentialModel(2, zeta, [2.5])
        omega = make_box((3, 4))
        vals = eval_model(model, omega).values.reshape(4, 3)  # canonical: dim 1 fastest
        g1 = np.exp(zeta[0, 0] * np.arange(3))
        g2 = np.exp(zeta[0, 1] * np.arange(4))
        np.testing.assert_allclose(vals, 2.5 * np.outer(g2, g1), rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            eval_model(small_model(dim=2), make_box((4,)))

    def test_overflow_raises(self):
        model = ExponentialModel(1, [[60.0 + 0j]], [1.0])
        with pytest.raises(NonFiniteError):
            eval_model(model, make_box((20,)))


class TestAddNoise:
    @given(st.integers(0, 10_000), st.sampled_from([1.0, 10 ** -0.5, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6]))
    def test_exact_energy_ratio(self, seed, ratio):
        rng = np.random.default_rng(seed)
        model = random_model(3, 2, rng, layout="uniform_imag")
        f = eval_model(model, make_box((5, 5)))
        noisy = add_noise(f, ratio, np.random.default_rng(seed + 1))
        measured = np.linalg.norm(noisy.values - f.values) / np.linalg.norm(f.values)
        # reconstruction of the noise by subtraction adds ~eps cancellation
        assert abs(measured - ratio) <= 16 * EPS + 1e-12 * ratio

    def test_zero_ratio_identity(self):
        f = eval_model(small_model(), make_box((4, 4)))
        out = add_noise(f, 0.0, np.random.default_rng(0))
        assert np.array_equal(out.values, f.values)
        assert out.domain is f.domain

    def test_deterministic_given_rng_state(self):
        f = eval_model(small_model(), make_box((4, 4)))
        a = add_noise(f, 1e-2, np.random.default_rng(42))
        b = add_noise(f, 1e-2, np.random.default_rng(42))
        assert np.array_equal(a.values, b.values)

    def test_negative_ratio_rejected(self):
        f = eval_model(small_model(), make_box((3, 3)))
        with pytest.raises(DomainError):
            add_noise(f, -0.1, np.random.default_rng(0))

    def test_zero_signal_rejected(self):
        f = MdSequence(make_box((3,)), np.zeros(3))
        with pytest.raises(DomainError):
            add_noise(f, 0.5, np.random.default_rng(0))


class TestRandomModel:
    @given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 8))
    def test_uniform_imag_layout(self, seed, d, K):
        model = random_model(K, d, np.random.default_rng(seed))
        assert model.order == K
        assert model.dim == d
        assert np.all(model.zetas.real == 0)
        assert np.all(np.abs(model.zetas.imag) < np.pi)
        mods = np.abs(model.coeffs)
        assert np.all((0.5 <= mods) & (mods <= 1.5))

    def test_spiral_frequencies_are_deterministic(self):
        K = 12
        model = random_model(K, 2, np.random.default_rng(0), layout="spiral")
        k = np.arange(1, K + 1)
        r = np.pi * k / K
        phi = 4 * np.pi * k / K
        expected = 1j * np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
        np.testing.assert_allclose(model.zetas, expected, rtol=0, atol=1e-15)

    def test_spiral_requires_2d(self):
        with pytest.raises(DomainError):
            random_model(5, 3, np.random.default_rng(0), layout="spiral")

    @given(st.integers(0, 10_000))
    def test_random_complex_damping_bound(self, seed):
        bound = 0.15
        model = random_model(
            6, 2, np.random.default_rng(seed), layout="random_complex", damping_bound=bound
        )
        assert np.all(np.abs(model.zetas.real) <= bound)

    @given(st.integers(0, 10_000), st.integers(2, 10))
    def test_nodes_are_separated(self, seed, K):
        model = random_model(K, 2, np.random.default_rng(seed))
        diff = np.abs(model.nodes[:, None, :] - model.nodes[None, :, :]).max(axis=2)
        np.fill_diagonal(diff, np.inf)
        assert diff.min() >= NODE_COLLISION_TOL

    def test_unknown_layout(self):
        with pytest.raises(DomainError):
            random_model(3, 2, np.random.default_rng(0), layout="lattice")

    def test_generation_gives_up_on_constant_rng(self):
        class ConstantRng:
            def uniform(self, low=0.0, high=1.0, size=None):
                return np.full(size, (low + high) / 2) if size is not None else (low + high) / 2

        with pytest.raises(GenerationError):
            random_model(2, 2, ConstantRng(), max_retries=5)
