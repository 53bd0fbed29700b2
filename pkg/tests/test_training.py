"""
Unit tests for training schedules and pilot observations.
"""
import pytest
import numpy as np

from app.exceptions import DimensionMismatchError, DomainError, SingularTrainingMatrixError
from app.services.channel import CascadedChannel
from app.services.training import (
    check_training_matrix,
    dft_matrix,
    is_unit_modulus,
    observe,
    random_training_matrix,
    schedule_scheme1,
    schedule_scheme2,
)


class TestDftMatrix:
    """Test DFT training matrices."""

    @pytest.mark.parametrize("m", range(1, 17))
    def test_scaled_unitary(self, m):
        """Test D D^H = m I to 1e-10."""
        D = dft_matrix(m)
        assert np.max(np.abs(D @ D.conj().T - m * np.eye(m))) < 1e-10

    def test_unit_modulus_entries(self):
        """Test that every DFT entry is a pure phase."""
        assert is_unit_modulus(dft_matrix(7))

    def test_first_row_and_column_are_ones(self):
        """Test [D]_{0,k} = [D]_{l,0} = 1."""
        D = dft_matrix(4)
        assert np.allclose(D[0], 1.0)
        assert np.allclose(D[:, 0], 1.0)
        assert D[1, 1] == pytest.approx(-1j)

    def test_zero_size_rejected(self):
        """Test that m = 0 is rejected."""
        with pytest.raises(DomainError):
            dft_matrix(0)

    def test_random_training_matrix(self, rng):
        """Test random unit-modulus training matrices."""
        Theta = random_training_matrix(4, rng)
        assert Theta.shape == (4, 4)
        assert is_unit_modulus(Theta)

    def test_singular_matrix_rejected(self):
        """Test that a rank-deficient training matrix is rejected."""
        with pytest.raises(SingularTrainingMatrixError):
            check_training_matrix(np.ones((3, 3)), 3)

    def test_wrong_shape_rejected(self):
        """Test that a training matrix must be m x m."""
        with pytest.raises(DimensionMismatchError):
            check_training_matrix(np.eye(2), 3)


class TestSchedules:
    """Test the two training schedules."""

    def test_scheme1_length_and_order(self):
        """Test M1*M2 entries with IRS 2 sweeping fastest."""
        sched = schedule_scheme1(2, 3)
        assert sched.length == 6
        assert sched.scheme == "S1"
        theta1, theta2 = sched.entries[4]
        assert np.allclose(theta1, sched.Theta1[:, 1])
        assert np.allclose(theta2, sched.Theta2[:, 1])

    def test_scheme2_sub_blocks(self):
        """Test M2 entries with IRS 1 at ones followed by M1 entries with IRS 2 at ones."""
        sched = schedule_scheme2(3, 2)
        assert sched.length == 5
        assert sched.scheme == "S2"
        assert sched.tags == ["S2-sub1"] * 2 + ["S2-sub2"] * 3
        assert np.allclose(sched.entries[0][0], np.ones(3))
        assert np.allclose(sched.entries[1][1], sched.Theta2[:, 1])
        assert np.allclose(sched.entries[4][0], sched.Theta1[:, 2])
        assert np.allclose(sched.entries[4][1], np.ones(2))

    def test_custom_training_matrices(self):
        """Test that non-unit-modulus matrices are accepted but flagged."""
        sched = schedule_scheme1(2, 2, Theta1=np.eye(2), Theta2=np.eye(2))
        assert not sched.unit_modulus
        assert schedule_scheme1(2, 2).unit_modulus


class TestObserve:
    """Test received pilots."""

    def test_noise_free_scheme1_matrix(self, cn):
        """Test Y = Theta2^H H Theta1 for the reshaped Scheme 1 observations."""
        H = cn(3, 2)
        sched = schedule_scheme1(2, 3)
        obs = observe(H, sched, 0.0)
        expected = sched.Theta2.conj().T @ H @ sched.Theta1
        assert np.allclose(obs.as_matrix(), expected)
        assert np.allclose(obs.noise, 0.0)

    def test_noise_free_scheme2_blocks(self, cn):
        """Test y1 = Theta2^H H 1 and y2^T = 1^T H Theta1."""
        H = cn(3, 2)
        sched = schedule_scheme2(2, 3)
        y1, y2 = observe(CascadedChannel(H=H), sched, 0.0).sub_blocks()
        assert np.allclose(y1, sched.Theta2.conj().T @ H @ np.ones(2))
        assert np.allclose(y2, np.ones(3) @ H @ sched.Theta1)

    def test_noise_power(self, cn, rng):
        """Test that injected noise has variance sigma^2."""
        H = cn(4, 4)
        sched = schedule_scheme1(4, 4)
        noise = np.concatenate([observe(H, sched, 0.5, rng).noise for _ in range(500)])
        assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.5, rel=0.05)

    def test_wrong_reshape_kind(self, cn):
        """Test that each observation kind only offers its own view."""
        H = cn(2, 2)
        with pytest.raises(DimensionMismatchError):
            observe(H, schedule_scheme2(2, 2), 0.0).as_matrix()
        with pytest.raises(DimensionMismatchError):
            observe(H, schedule_scheme1(2, 2), 0.0).sub_blocks()

    def test_dimension_mismatch(self, cn):
        """Test that the channel must fit the schedule."""
        with pytest.raises(DimensionMismatchError):
            observe(cn(3, 3), schedule_scheme1(2, 2), 0.0)

    def test_noise_requires_generator(self, cn):
        """Test that noisy observations need an explicit generator."""
        with pytest.raises(DomainError):
            observe(cn(2, 2), schedule_scheme1(2, 2), 0.1)
        with pytest.raises(DomainError):
            observe(cn(2, 2), schedule_scheme1(2, 2), -0.1)
