"""
Comparison systems: the single-IRS deployment and the perfect-CSI bound.

The single-IRS benchmark places all M1+M2 sub-surfaces at the location of
IRS 1. The user side keeps the K_U Rician link; the IRS-AP side is Rayleigh
with exponent alpha_single. Its channel is the group-wise cascaded vector
``h`` with received signal ``h^T theta``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.exceptions import DimensionMismatchError
from app.schemas.scenario import ScenarioConfig
from app.services.beamforming import BeamformingPair, ao_optimize, phase_align, snr_from_gain
from app.services.channel import (
    ArrayLayout,
    direction_cosine,
    draw_rician,
    group_vector,
    path_loss,
    surface_response,
)
from app.services.training import complex_noise, dft_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingleIrsRealization:
    """Group-wise single-reflection channel of the single-IRS deployment."""
    h: np.ndarray
    alpha_single: float
    K_U: float

    @property
    def n_subsurfaces(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class SingleIrsBeam:
    """Single-IRS reflection vector; ``degenerate`` when the estimate was all zero."""
    theta: np.ndarray
    degenerate: bool = False


def realize_single_irs(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    layout: ArrayLayout = "subsurface",
    unit_ap_link: bool = False,
) -> SingleIrsRealization:
    """
    Draw one single-IRS channel with ``M1 + M2`` sub-surfaces at IRS 1.

    Args:
        cfg: Scenario (IRS 1 position and azimuth, K_U, alpha_U, alpha_single)
        rng: Random generator
        layout: Surface layout, as in realize_channels
        unit_ap_link: Replace the Rayleigh IRS-AP link with ones (deterministic test mode)

    Returns:
        SingleIrsRealization: The grouped channel vector of length M1 + M2
    """
    n_subsurfaces = cfg.M1 + cfg.M2
    beta_U = path_loss(math.dist(cfg.user_pos, cfg.irs1_pos), cfg.alpha_U, cfg)
    cos_user = direction_cosine(cfg.irs1_pos, cfg.irs1_azimuth, cfg.user_pos)
    a_U = surface_response(n_subsurfaces, cfg.N0, cos_user, layout)
    g_U = np.sqrt(beta_U) * draw_rician(a_U, cfg.K_U, rng)

    if unit_ap_link:
        g_A = np.ones(n_subsurfaces * cfg.N0, dtype=complex)
    else:
        beta_A = path_loss(math.dist(cfg.irs1_pos, cfg.ap_pos), cfg.alpha_single, cfg)
        g_A = np.sqrt(beta_A) * draw_rician(np.zeros(n_subsurfaces * cfg.N0, dtype=complex), 0.0, rng)

    h = group_vector(g_U * g_A, cfg.N0)
    return SingleIrsRealization(h=h, alpha_single=cfg.alpha_single, K_U=cfg.K_U)


def estimate_single_irs(
    h: np.ndarray,
    sigma_sq: float,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    LS estimate of ``h`` from ``len(h)`` DFT pilots: ``y = D^H h + z``, ``h_hat = (D^H)^{-1} y``.

    The MSE with DFT training is sigma^2.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 1:
        raise DimensionMismatchError(f"Expected a vector, got {h.ndim} dimensions")
    D = dft_matrix(h.shape[0])
    y = D.conj().T @ h + complex_noise(h.shape, sigma_sq, rng)
    return D @ y / h.shape[0]


def beamform_single_irs(h_hat: np.ndarray) -> SingleIrsBeam:
    """``theta = phase_align(conj(h_hat))`` so that ``h_hat^T theta = sum |h_hat_i|``."""
    h_hat = np.asarray(h_hat, dtype=complex)
    if not np.any(h_hat):
        logger.debug("Single-IRS estimate is all zero; using the all-ones reflection")
        return SingleIrsBeam(theta=np.ones_like(h_hat), degenerate=True)
    return SingleIrsBeam(theta=phase_align(h_hat.conj()))


def single_irs_gain(h: np.ndarray, theta: np.ndarray) -> float:
    """Channel power gain ``|h^T theta|^2``."""
    h = np.asarray(h)
    theta = np.asarray(theta)
    if h.shape != theta.shape:
        raise DimensionMismatchError(f"Channel {h.shape} does not match reflection {theta.shape}")
    return float(abs(np.dot(h, theta)) ** 2)


def expected_gain_single(h_hat: np.ndarray, theta: np.ndarray, sigma_sq: float) -> float:
    """Expected gain under DFT-LS estimation error: ``|h_hat^T theta|^2 + sigma^2``."""
    return single_irs_gain(h_hat, theta) + sigma_sq


def single_irs_snr(h: np.ndarray, theta: np.ndarray, sigma_sq: float) -> float:
    """Receive SNR of the single-IRS link on the true channel."""
    return snr_from_gain(single_irs_gain(h, theta), sigma_sq)


def perfect_csi_bound(H_true: np.ndarray) -> BeamformingPair:
    """AO beamforming on the true channel; its rate carries no training overhead."""
    return ao_optimize(H_true)
