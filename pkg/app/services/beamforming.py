"""
Cooperative passive beamforming of the two surfaces.

Scheme 1 optimises the bilinear gain ``|phi2^H H_hat phi1|^2`` by alternating
optimisation; each subproblem is solved exactly by phase alignment. Scheme 2
has a closed form: align each surface with its estimated signature vector.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from app.exceptions import DegenerateEstimateError, DimensionMismatchError, DomainError, ScenarioValidationError
from app.services.channel import effective_gain
from app.services.estimation import EstimateS2

logger = logging.getLogger(__name__)

AO_MAX_ITERS = 50
AO_REL_TOL = 1e-6


@dataclass(frozen=True)
class BeamformingPair:
    """Unit-modulus reflection vectors for data transmission."""
    phi1: np.ndarray
    phi2: np.ndarray
    objective: float
    iterations: int = 0
    history: Tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class RateParams:
    """Coherence block, training overhead, rate gap and normalised noise power."""
    T: int
    T_t: int
    Gamma: float
    sigma_sq: float

    def __post_init__(self):
        if self.T < 1:
            raise ScenarioValidationError(f"Coherence block must hold at least one symbol, got T={self.T}")
        if not 0 <= self.T_t <= self.T:
            raise ScenarioValidationError(
                f"Training length T_t={self.T_t} must lie in [0, T={self.T}]",
                {"T": self.T, "T_t": self.T_t},
            )
        if self.Gamma < 1:
            raise ScenarioValidationError(f"Rate gap must be at least 1, got {self.Gamma}")
        if self.sigma_sq < 0:
            raise DomainError(f"Noise power must be non-negative, got {self.sigma_sq}")

    @property
    def overhead_factor(self) -> float:
        """Fraction of the block left for data, ``(T - T_t) / T``."""
        return (self.T - self.T_t) / self.T


def phase_align(v: np.ndarray) -> np.ndarray:
    """
    Unit-modulus vector in phase with ``v``.

    Zero entries map to 1.
    """
    v = np.asarray(v, dtype=complex)
    magnitude = np.abs(v)
    aligned = np.ones_like(v)
    nonzero = magnitude > 0
    aligned[nonzero] = v[nonzero] / magnitude[nonzero]
    return aligned


def _normalize_phase(u: np.ndarray) -> np.ndarray:
    """Rotate ``u`` so that its first nonzero component is real positive."""
    nonzero = np.flatnonzero(np.abs(u) > 0)
    if nonzero.size == 0:
        return u
    first = u[nonzero[0]]
    return u * (abs(first) / first)


def _bilinear_power(H_hat: np.ndarray, phi1: np.ndarray, phi2: np.ndarray) -> float:
    return abs(effective_gain(H_hat, phi1, phi2)) ** 2


def svd_init(H_hat: np.ndarray) -> BeamformingPair:
    """
    Initial pair from the strongest singular triplet of ``H_hat``.

    phi1 aligns with the strongest right singular vector and phi2 with the
    strongest left one. Ties follow the descending order returned by numpy.

    Raises:
        DegenerateEstimateError: If H_hat is all zero
    """
    H_hat = np.asarray(H_hat, dtype=complex)
    if H_hat.ndim != 2:
        raise DimensionMismatchError(f"Expected a matrix, got {H_hat.ndim} dimensions")
    if not np.any(H_hat):
        raise DegenerateEstimateError("Cannot beamform on an all-zero channel")
    U, _, Vh = np.linalg.svd(H_hat)
    left = _normalize_phase(U[:, 0])
    right = _normalize_phase(Vh[0].conj())
    phi1 = phase_align(right)
    phi2 = phase_align(left)
    return BeamformingPair(phi1=phi1, phi2=phi2, objective=_bilinear_power(H_hat, phi1, phi2))


def ao_optimize(H_hat: np.ndarray, max_iters: int = AO_MAX_ITERS, rel_tol: float = AO_REL_TOL) -> BeamformingPair:
    """
    Alternating optimisation of ``|phi2^H H_hat phi1|^2``.

    Starting from svd_init, each iteration sets ``phi2 = phase_align(H_hat phi1)``
    and then ``phi1 = phase_align(H_hat^H phi2)``. Every half-step solves its
    subproblem exactly, so the recorded history is non-decreasing.

    Args:
        H_hat: M2 x M1 channel (estimate)
        max_iters: Maximum number of full iterations
        rel_tol: Stop once an iteration improves the objective by less than this fraction

    Returns:
        BeamformingPair: Final pair with its objective and half-step history
    """
    if max_iters < 1:
        raise DomainError(f"max_iters must be at least 1, got {max_iters}")
    H_hat = np.asarray(H_hat, dtype=complex)
    start = svd_init(H_hat)
    phi1, phi2 = start.phi1, start.phi2
    objective = start.objective
    history = [objective]
    iterations = 0

    for iterations in range(1, max_iters + 1):
        previous = objective
        phi2 = phase_align(H_hat @ phi1)
        history.append(_bilinear_power(H_hat, phi1, phi2))
        phi1 = phase_align(H_hat.conj().T @ phi2)
        objective = _bilinear_power(H_hat, phi1, phi2)
        history.append(objective)
        if objective - previous <= rel_tol * previous:
            break

    logger.debug(f"AO finished after {iterations} iterations, objective={objective:.6e}")
    return BeamformingPair(phi1=phi1, phi2=phi2, objective=objective, iterations=iterations, history=tuple(history))


def expected_gain_s1(pair: BeamformingPair, H_hat: np.ndarray, sigma_sq: float) -> float:
    """Expected channel power gain under Scheme 1 estimation error: ``|phi2^H H_hat phi1|^2 + sigma^2``."""
    return _bilinear_power(H_hat, pair.phi1, pair.phi2) + sigma_sq


def beamform_s2(est: EstimateS2) -> BeamformingPair:
    """Closed-form Scheme 2 design: ``phi1 = phase_align(u1_hat)``, ``phi2 = phase_align(u2_hat)``."""
    est.require_valid()
    phi1 = phase_align(est.u1)
    phi2 = phase_align(est.u2)
    return BeamformingPair(phi1=phi1, phi2=phi2, objective=_bilinear_power(est.HL_hat, phi1, phi2))


def expected_gain_s2(pair: BeamformingPair, est: EstimateS2, sigma_sq: float) -> float:
    """
    Expected channel power gain under Scheme 2 estimation error.

    ``|rho|^2 [ |phi2^H u2|^2 |u1^H phi1|^2 + sigma^2 (|phi2^H u2|^2 + |u1^H phi1|^2) ]``
    """
    est.require_valid()
    gain2 = abs(np.vdot(pair.phi2, est.u2)) ** 2
    gain1 = abs(np.dot(est.u1_h, pair.phi1)) ** 2
    return float(abs(est.rho_hat) ** 2 * (gain2 * gain1 + sigma_sq * (gain2 + gain1)))


def snr_from_gain(power_gain: float, sigma_sq: float) -> float:
    """``power_gain / sigma^2``; a zero noise floor gives ``inf`` for any positive gain."""
    if sigma_sq < 0:
        raise DomainError(f"Noise power must be non-negative, got {sigma_sq}")
    if sigma_sq == 0:
        return math.inf if power_gain > 0 else 0.0
    return power_gain / sigma_sq


def receive_snr(H_true: np.ndarray, pair: BeamformingPair, sigma_sq: float) -> float:
    """Receive SNR ``|phi2^H H phi1|^2 / sigma^2`` on the true channel."""
    return snr_from_gain(_bilinear_power(H_true, pair.phi1, pair.phi2), sigma_sq)


def rate_from_gain(power_gain: float, rp: RateParams) -> float:
    """``((T - T_t) / T) * log2(1 + power_gain / (Gamma sigma^2))`` in bps/Hz."""
    if rp.T_t == rp.T:
        return 0.0
    return rp.overhead_factor * math.log2(1.0 + snr_from_gain(power_gain, rp.sigma_sq) / rp.Gamma)


def achievable_rate(H_true: np.ndarray, pair: BeamformingPair, rp: RateParams) -> float:
    """Achievable rate of a beamforming pair on the true channel."""
    return rate_from_gain(_bilinear_power(H_true, pair.phi1, pair.phi2), rp)
