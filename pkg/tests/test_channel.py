"""
Unit tests for channel realization, grouping and the effective gain.
"""
import math
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from app.exceptions import DimensionMismatchError, DomainError
from app.services.channel import (
    ElementwiseChannels,
    array_response,
    cascade_elementwise,
    cascaded_channel,
    direction_cosine,
    draw_rician,
    effective_gain,
    expand_reflection,
    group_channel,
    group_vector,
    los_channel,
    path_loss,
    realize_channels,
    surface_response,
)


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


class TestPathLoss:
    """Test the distance-dependent power gain."""

    def test_reference_distance_gives_beta0(self, scenario):
        """Test that the gain at d0 equals beta0."""
        assert path_loss(scenario.d0, 2.2, scenario) == pytest.approx(scenario.beta0)

    def test_exponent_scaling(self, scenario):
        """Test beta0 * (d/d0)^-alpha at d = 10 m, alpha = 2."""
        assert path_loss(10.0, 2.0, scenario) == pytest.approx(scenario.beta0 * 0.01)

    @pytest.mark.parametrize("distance", [0.0, -1.0])
    def test_nonpositive_distance_rejected(self, scenario, distance):
        """Test that zero or negative distances raise DomainError."""
        with pytest.raises(DomainError):
            path_loss(distance, 2.0, scenario)

    def test_domain_error_is_value_error(self, scenario):
        """Test that numerical callers can catch ValueError."""
        with pytest.raises(ValueError):
            path_loss(0.0, 2.0, scenario)


class TestArrayResponse:
    """Test the ULA response and direction cosines."""

    def test_broadside_is_all_ones(self):
        """Test that a zero cosine gives an all-ones response."""
        assert np.allclose(array_response(5, 1.0, 0.0), np.ones(5))

    def test_endfire_half_wavelength(self):
        """Test exp(-j*pi*n) alternation at cosine 1."""
        assert np.allclose(array_response(3, 1.0, 1.0), [1, -1, 1])

    def test_single_element(self):
        """Test that one element has response 1."""
        assert np.allclose(array_response(1, 1.0, 0.7), [1.0])

    def test_unit_modulus(self):
        """Test that every entry has modulus one."""
        assert np.allclose(np.abs(array_response(8, 1.0, -0.37)), 1.0)

    def test_cosine_out_of_range(self):
        """Test that |cos| > 1 is rejected."""
        with pytest.raises(DomainError):
            array_response(4, 1.0, 1.5)

    def test_direction_cosine_axes(self):
        """Test cosines along and across the array axis."""
        assert direction_cosine((0, 0, 0), 0.0, (5, 0, 0)) == pytest.approx(1.0)
        assert direction_cosine((0, 0, 0), 0.0, (0, 3, 0)) == pytest.approx(0.0, abs=1e-12)

    def test_direction_cosine_default_user(self, scenario):
        """Test the IRS 1 to user cosine of the default deployment (cos 130 degrees)."""
        cosine = direction_cosine(scenario.irs1_pos, scenario.irs1_azimuth, scenario.user_pos)
        assert cosine == pytest.approx(math.cos(math.radians(130)))

    def test_direction_cosine_coincident(self):
        """Test that coincident points have no direction."""
        with pytest.raises(DomainError):
            direction_cosine((1, 1, 0), 0.0, (1, 1, 0))


class TestSurfaceResponse:
    """Test the two surface layouts."""

    def test_subsurface_layout_repeats(self):
        """Test that elements of one sub-surface share its phase."""
        response = surface_response(4, 3, 0.4, "subsurface")
        assert response.shape == (12,)
        assert np.allclose(response, np.repeat(array_response(4, 1.0, 0.4), 3))
        assert np.allclose(response[0:3], response[0])

    def test_element_layout(self):
        """Test that the element layout is a ULA over all elements."""
        assert np.allclose(surface_response(4, 3, 0.4, "element"), array_response(12, 1.0, 0.4))

    def test_unknown_layout(self):
        """Test that an unknown layout is rejected."""
        with pytest.raises(DomainError):
            surface_response(2, 2, 0.0, "planar")


class TestDrawRician:
    """Test unit-power Rician draws."""

    def test_infinite_k_returns_los(self, rng):
        """Test that K = inf returns a copy of the LoS shape."""
        los = array_response(6, 1.0, 0.3)
        draw = draw_rician(los, math.inf, rng)
        assert np.array_equal(draw, los)
        assert draw is not los

    def test_rayleigh_unit_power(self, rng):
        """Test that K = 0 has unit average power and no LoS mean."""
        draw = draw_rician(np.ones(20000, dtype=complex), 0.0, rng)
        assert np.mean(np.abs(draw) ** 2) == pytest.approx(1.0, rel=0.05)
        assert abs(np.mean(draw)) < 0.05

    def test_rician_mean_and_power(self, rng):
        """Test mean sqrt(K/(1+K)) * los and unit power at K = 10."""
        los = np.ones(20000, dtype=complex)
        draw = draw_rician(los, 10.0, rng)
        assert np.mean(draw).real == pytest.approx(math.sqrt(10 / 11), abs=0.02)
        assert np.mean(np.abs(draw) ** 2) == pytest.approx(1.0, rel=0.05)

    def test_large_k_approaches_los(self, rng):
        """Test that K = 1e6 stays within 1e-2 relative Frobenius of the LoS shape."""
        los = np.outer(array_response(8, 0.5, 0.2), array_response(6, 0.5, -0.4).conj())
        draw = draw_rician(los, 1e6, rng)
        assert np.linalg.norm(draw - los) / np.linalg.norm(los) < 1e-2

    def test_negative_k_rejected(self, rng):
        """Test that a negative Rician factor is rejected."""
        with pytest.raises(DomainError):
            draw_rician(np.ones(2), -1.0, rng)


class TestRealizeChannels:
    """Test geometry-consistent realizations."""

    def test_shapes(self, scenario, rng):
        """Test element-wise dimensions N1 = M1*N0 and N2 = M2*N0."""
        ch = realize_channels(scenario, rng)
        assert ch.g_U.shape == (60,)
        assert ch.G_I.shape == (60, 60)
        assert ch.g_A.shape == (60,)
        assert (ch.N1, ch.N2) == (scenario.N1, scenario.N2)

    def test_seed_reproducibility(self, scenario):
        """Test that one seed reproduces a realization bit for bit."""
        first = realize_channels(scenario, np.random.default_rng(5))
        second = realize_channels(scenario, np.random.default_rng(5))
        other = realize_channels(scenario, np.random.default_rng(6))
        assert first.canonical_bytes() == second.canonical_bytes()
        assert first.canonical_bytes() != other.canonical_bytes()

    def test_inter_irs_path_loss(self, scenario, rng):
        """Test that beta_I follows the 20 m IRS 1-IRS 2 distance."""
        ch = realize_channels(scenario, rng)
        assert ch.beta_I == pytest.approx(path_loss(20.0, scenario.alpha_I, scenario))

    def test_pure_los_inter_link_is_rank_one(self, scenario, rng):
        """Test G_I = sqrt(beta_I) s q2 q1^H when K_I is infinite."""
        cfg = scenario.with_updates(K_I=math.inf)
        ch = realize_channels(cfg, rng)
        q1, q2, s = ch.los_factors
        assert ch.inter_los_exact
        assert abs(abs(s) - 1.0) < 1e-12
        assert np.allclose(ch.G_I, np.sqrt(ch.beta_I) * s * np.outer(q2, q1.conj()))
        assert np.linalg.matrix_rank(ch.G_I) == 1

    def test_user_link_power(self, scenario, rng):
        """Test that g_U entries have mean power beta_U = 10^-3.5 at the 1 m user distance."""
        powers = np.concatenate([np.abs(realize_channels(scenario, rng).g_U) ** 2 for _ in range(200)])
        assert powers.size >= 10_000
        assert np.mean(powers) == pytest.approx(10 ** -3.5, rel=0.05)

    def test_strong_los_inter_link_is_numerically_rank_one(self, scenario, rng):
        """Test that a finite K_I = 1e6 leaves sigma_2 / sigma_1 of G_I below 1e-3."""
        ch = realize_channels(scenario.with_updates(K_I=1e6), rng)
        singular_values = np.linalg.svd(ch.G_I, compute_uv=False)
        assert singular_values[1] / singular_values[0] < 1e-3

    def test_element_layout_option(self, scenario, rng):
        """Test that the element layout yields the same shapes."""
        ch = realize_channels(scenario, rng, layout="element")
        assert ch.G_I.shape == (60, 60)


class TestGrouping:
    """Test element-wise cascading and sub-surface grouping."""

    def test_cascade_matches_diagonal_product(self, rng):
        """Test diag(g_A) G_I diag(g_U)."""
        ch = ElementwiseChannels(g_U=_cn(rng, 4), G_I=_cn(rng, 6, 4), g_A=_cn(rng, 6))
        expected = np.diag(ch.g_A) @ ch.G_I @ np.diag(ch.g_U)
        assert np.allclose(cascade_elementwise(ch), expected)

    def test_cascade_shape_mismatch(self, rng):
        """Test that an inconsistent G_I is rejected."""
        ch = ElementwiseChannels(g_U=_cn(rng, 4), G_I=_cn(rng, 4, 4), g_A=_cn(rng, 6))
        with pytest.raises(DimensionMismatchError):
            cascade_elementwise(ch)

    def test_block_sums(self):
        """Test 2 x 2 block sums by hand."""
        H_bar = np.arange(16, dtype=float).reshape(4, 4)
        assert np.allclose(group_channel(H_bar, 2).H, [[10, 18], [42, 50]])

    def test_group_vector(self):
        """Test sums of consecutive groups."""
        assert np.allclose(group_vector(np.arange(6), 3), [3, 12])

    def test_row_index_example(self):
        """Test a 4 x 2 channel holding its 1-based row index in every entry."""
        H_bar = np.repeat(np.arange(1.0, 5.0)[:, None], 2, axis=1)
        assert np.array_equal(group_channel(H_bar, 2).H, [[6.0], [14.0]])

    def test_group_vector_matches_group_channel(self, rng):
        """Test group(v2) group(v1^H) = group(v2 v1^H) for an outer product."""
        v2, v1_h = _cn(rng, 8), _cn(rng, 6)
        expected = group_channel(np.outer(v2, v1_h), 2).H
        assert np.allclose(np.outer(group_vector(v2, 2), group_vector(v1_h, 2)), expected)

    def test_indivisible_grouping(self):
        """Test that N0 must divide the element counts."""
        with pytest.raises(DimensionMismatchError):
            group_channel(np.ones((4, 6)), 4)
        with pytest.raises(DimensionMismatchError):
            group_vector(np.ones(5), 2)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        a=st.floats(min_value=-10, max_value=10),
        b=st.floats(min_value=-10, max_value=10),
    )
    def test_grouping_is_linear(self, seed, a, b):
        """Test group(aX + bY) = a group(X) + b group(Y)."""
        gen = np.random.default_rng(seed)
        X, Y = _cn(gen, 6, 9), _cn(gen, 6, 9)
        lhs = group_channel(a * X + b * Y, 3).H
        rhs = a * group_channel(X, 3).H + b * group_channel(Y, 3).H
        assert np.allclose(lhs, rhs, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), n0=st.integers(min_value=1, max_value=4))
    def test_grouped_gain_matches_expanded_reflection(self, seed, n0):
        """Test theta2^H H theta1 = (theta2 kron 1)^H H_bar (theta1 kron 1)."""
        gen = np.random.default_rng(seed)
        H_bar = _cn(gen, 3 * n0, 2 * n0)
        theta1 = np.exp(1j * gen.uniform(0, 2 * np.pi, 2))
        theta2 = np.exp(1j * gen.uniform(0, 2 * np.pi, 3))
        grouped = effective_gain(group_channel(H_bar, n0), theta1, theta2)
        expanded = np.vdot(expand_reflection(theta2, n0), H_bar @ expand_reflection(theta1, n0))
        assert grouped == pytest.approx(complex(expanded), abs=1e-9)

    def test_los_form_of_rank_one_channel(self, scenario, rng):
        """Test that the grouped pure-LoS channel equals v2 v1^H."""
        cfg = scenario.with_updates(K_I=math.inf)
        ch = realize_channels(cfg, rng)
        cascaded = cascaded_channel(ch, cfg.N0)
        assert cascaded.los_form is not None
        v1_h, v2 = cascaded.los_form
        rel = np.linalg.norm(cascaded.H - np.outer(v2, v1_h)) / np.linalg.norm(cascaded.H)
        assert rel < 1e-10
        assert np.allclose(los_channel(ch, cfg.N0).H, np.outer(v2, v1_h))

    def test_rician_channel_has_no_los_form(self, scenario, rng):
        """Test that a finite K_I leaves the rank-one form unset."""
        assert cascaded_channel(realize_channels(scenario, rng), scenario.N0).los_form is None


class TestEffectiveGain:
    """Test the equivalent SISO gain."""

    def test_scalar_channel(self):
        """Test the 1 x 1 case with conjugated theta2."""
        H = np.array([[2 + 1j]])
        assert effective_gain(H, np.array([1.0]), np.array([1.0])) == pytest.approx(2 + 1j)
        assert effective_gain(H, np.array([1.0]), np.array([1j])) == pytest.approx(1 - 2j)

    def test_dimension_mismatch(self):
        """Test that reflection vectors must fit H."""
        with pytest.raises(DimensionMismatchError):
            effective_gain(np.ones((2, 3)), np.ones(2), np.ones(2))
