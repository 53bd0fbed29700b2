"""
Least-squares estimators for the cascaded channel and their MSE theory.

Scheme 1 recovers all M1*M2 coefficients of H from ``Y = Theta2^H H Theta1 + Z``.
Scheme 2 recovers the two signature vectors of the rank-one channel
``H_L = rho u2 u1^H`` from M1+M2 pilots.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.exceptions import DegenerateEstimateError, DimensionMismatchError, SingularTrainingMatrixError
from app.services.training import check_training_matrix

logger = logging.getLogger(__name__)

DEGENERACY_RATIO = 1e-8


def is_scaled_unitary(Theta: np.ndarray, tol: float = 1e-9) -> bool:
    """True when ``Theta Theta^H = m I`` (DFT-like training)."""
    m = Theta.shape[0]
    return bool(np.allclose(Theta @ Theta.conj().T, m * np.eye(m), atol=tol * m))


def left_solve_hermitian(Theta: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``(Theta^H)^{-1} Y``; uses ``Theta Y / m`` for DFT-like Theta."""
    if is_scaled_unitary(Theta):
        return Theta @ Y / Theta.shape[0]
    return np.linalg.solve(Theta.conj().T, Y)


def right_solve(Y: np.ndarray, Theta: np.ndarray) -> np.ndarray:
    """``Y Theta^{-1}``; uses ``Y Theta^H / m`` for DFT-like Theta."""
    if is_scaled_unitary(Theta):
        return Y @ Theta.conj().T / Theta.shape[0]
    return np.linalg.solve(Theta.T, Y.T).T


def _inverse_trace(A: np.ndarray) -> float:
    try:
        return float(np.real(np.trace(np.linalg.inv(A))))
    except np.linalg.LinAlgError as exc:
        raise SingularTrainingMatrixError("Training Gram matrix is singular") from exc


@dataclass(frozen=True)
class EstimateS1:
    """Scheme 1 LS estimate of the full cascaded channel."""
    H_hat: np.ndarray
    sigma_sq: float
    Theta1: np.ndarray
    Theta2: np.ndarray


@dataclass(frozen=True)
class EstimateS2:
    """Scheme 2 estimate of the rank-one channel ``HL_hat = rho_hat u2 u1^H``."""
    u1_h: np.ndarray
    u2: np.ndarray
    rho_hat: complex
    HL_hat: np.ndarray
    degenerate: bool
    U1_dagger: complex
    U2: complex

    @property
    def u1(self) -> np.ndarray:
        """Column form of the row signature ``u1^H``."""
        return self.u1_h.conj()

    def require_valid(self) -> None:
        if self.degenerate:
            raise DegenerateEstimateError(
                "Scheme 2 estimate is degenerate: |U1 + U2| below threshold",
                {"U1_dagger": str(self.U1_dagger), "U2": str(self.U2)},
            )


def estimate_scheme1(Y: np.ndarray, Theta1: np.ndarray, Theta2: np.ndarray, sigma_sq: float = 0.0) -> EstimateS1:
    """
    LS estimate ``H_hat = (Theta2^H)^{-1} Y Theta1^{-1}``.

    Args:
        Y: M2 x M1 observation matrix
        Theta1: M1 x M1 training matrix of IRS 1
        Theta2: M2 x M2 training matrix of IRS 2
        sigma_sq: Noise power the observation was taken at (recorded only)

    Returns:
        EstimateS1: The estimate with its training metadata
    """
    Y = np.asarray(Y, dtype=complex)
    M2, M1 = Y.shape
    Theta1 = check_training_matrix(Theta1, M1, "Theta1")
    Theta2 = check_training_matrix(Theta2, M2, "Theta2")
    H_hat = right_solve(left_solve_hermitian(Theta2, Y), Theta1)
    return EstimateS1(H_hat=H_hat, sigma_sq=sigma_sq, Theta1=Theta1, Theta2=Theta2)


def mse_scheme1_theory(Theta1: np.ndarray, Theta2: np.ndarray, sigma_sq: float) -> float:
    """``sigma^2 tr{(Theta1^* Theta1^T)^{-1}} tr{(Theta2 Theta2^H)^{-1}}``; equals sigma^2 for DFT training."""
    Theta1 = np.asarray(Theta1, dtype=complex)
    Theta2 = np.asarray(Theta2, dtype=complex)
    return sigma_sq * _inverse_trace(Theta1.conj() @ Theta1.T) * _inverse_trace(Theta2 @ Theta2.conj().T)


def error_covariance_scheme1(Theta1: np.ndarray, Theta2: np.ndarray, sigma_sq: float) -> np.ndarray:
    """
    ``E[H_e H_e^H] = sigma^2 tr{(Theta1^H Theta1)^{-1}} (Theta2 Theta2^H)^{-1}``.

    With DFT training this is ``(sigma^2 / M2) I``.
    """
    Theta1 = np.asarray(Theta1, dtype=complex)
    Theta2 = np.asarray(Theta2, dtype=complex)
    try:
        row_part = np.linalg.inv(Theta2 @ Theta2.conj().T)
    except np.linalg.LinAlgError as exc:
        raise SingularTrainingMatrixError("Theta2 is singular") from exc
    return sigma_sq * _inverse_trace(Theta1.conj().T @ Theta1) * row_part


def estimate_scheme2(
    y1: np.ndarray,
    y2: np.ndarray,
    Theta1: np.ndarray,
    Theta2: np.ndarray,
    threshold: Optional[float] = None,
) -> EstimateS2:
    """
    Rank-one estimate from the two Scheme 2 sub-blocks.

    ``u2_hat = (Theta2^H)^{-1} y1``, ``u1_hat^H = y2^T Theta1^{-1}`` and
    ``rho_hat = 2 / (U1_hat + U2_hat)`` where U are the entry sums. The
    estimate is flagged degenerate when ``|U1_hat + U2_hat|`` is below
    ``threshold`` (default ``1e-8 * max(||u1_hat||, ||u2_hat||)``).
    """
    y1 = np.asarray(y1, dtype=complex)
    y2 = np.asarray(y2, dtype=complex)
    Theta1 = check_training_matrix(Theta1, y2.shape[0], "Theta1")
    Theta2 = check_training_matrix(Theta2, y1.shape[0], "Theta2")

    u2 = left_solve_hermitian(Theta2, y1)
    u1_h = right_solve(y2[None, :], Theta1)[0]
    U1_dagger = complex(u1_h.sum())
    U2 = complex(u2.sum())
    denominator = U1_dagger + U2

    if threshold is None:
        threshold = DEGENERACY_RATIO * max(np.linalg.norm(u1_h), np.linalg.norm(u2))
    degenerate = bool(abs(denominator) <= threshold)

    if degenerate:
        logger.debug(f"Degenerate Scheme 2 estimate: |U1+U2|={abs(denominator):.3e} <= {threshold:.3e}")
        rho_hat = 0j
        HL_hat = np.zeros((u2.shape[0], u1_h.shape[0]), dtype=complex)
    else:
        rho_hat = 2.0 / denominator
        HL_hat = rho_hat * np.outer(u2, u1_h)

    return EstimateS2(
        u1_h=u1_h,
        u2=u2,
        rho_hat=complex(rho_hat),
        HL_hat=HL_hat,
        degenerate=degenerate,
        U1_dagger=U1_dagger,
        U2=U2,
    )


def mse_scheme2_approx(est: EstimateS2, Theta1: np.ndarray, Theta2: np.ndarray, sigma_sq: float) -> float:
    """
    First-order MSE of Scheme 2.

    ``sigma^2 |rho|^2 (||u2||^2 tr{(Theta1 Theta1^H)^{-1}} + ||u1^H||^2 tr{(Theta2 Theta2^H)^{-1}})``
    """
    est.require_valid()
    Theta1 = np.asarray(Theta1, dtype=complex)
    Theta2 = np.asarray(Theta2, dtype=complex)
    trace1 = _inverse_trace(Theta1 @ Theta1.conj().T)
    trace2 = _inverse_trace(Theta2 @ Theta2.conj().T)
    return float(
        sigma_sq * abs(est.rho_hat) ** 2
        * (np.linalg.norm(est.u2) ** 2 * trace1 + np.linalg.norm(est.u1_h) ** 2 * trace2)
    )


def signature_vectors(H: np.ndarray) -> Tuple[np.ndarray, np.ndarray, complex]:
    """
    Noise-free Scheme 2 targets of a channel: ``(u2 = H 1, u1^H = 1^T H, rho = 1 / 1^T H 1)``.

    For a rank-one ``H = v2 v1^H`` these are ``v2 V1``, ``V2 v1^H`` and ``1/(V1 V2)``.
    """
    H = np.asarray(H, dtype=complex)
    u2 = H.sum(axis=1)
    u1_h = H.sum(axis=0)
    total = complex(H.sum())
    if total == 0:
        raise DegenerateEstimateError("Channel entries sum to zero; rho is undefined")
    return u2, u1_h, 1.0 / total


def scheme2_error_terms(
    z1: np.ndarray,
    z2: np.ndarray,
    Theta1: np.ndarray,
    Theta2: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Signature errors ``(u2_e = (Theta2^H)^{-1} z1, u1_e^H = z2^T Theta1^{-1})`` of injected noise."""
    Theta1 = np.asarray(Theta1, dtype=complex)
    Theta2 = np.asarray(Theta2, dtype=complex)
    u2_e = left_solve_hermitian(Theta2, np.asarray(z1, dtype=complex))
    u1_e_h = right_solve(np.asarray(z2, dtype=complex)[None, :], Theta1)[0]
    return u2_e, u1_e_h


def linearized_error_scheme2(est: EstimateS2, u2_e: np.ndarray, u1_e_h: np.ndarray) -> np.ndarray:
    """First-order error ``rho_hat (u2_hat u1_e^H + u2_e u1_hat^H)``."""
    est.require_valid()
    return est.rho_hat * (np.outer(est.u2, u1_e_h) + np.outer(u2_e, est.u1_h))


def nmse(H_hats: Sequence[np.ndarray], Hs: Sequence[np.ndarray]) -> float:
    """
    Normalized MSE ``sum ||H_hat - H||_F^2 / sum ||H||_F^2``.

    Raises:
        DimensionMismatchError: For empty or unequal-length inputs
    """
    if len(H_hats) == 0 or len(H_hats) != len(Hs):
        raise DimensionMismatchError(
            f"NMSE needs equal-length non-empty lists, got {len(H_hats)} and {len(Hs)}"
        )
    error = sum(float(np.linalg.norm(np.asarray(a) - np.asarray(b)) ** 2) for a, b in zip(H_hats, Hs))
    energy = sum(float(np.linalg.norm(np.asarray(b)) ** 2) for b in Hs)
    if energy == 0:
        raise DimensionMismatchError("NMSE is undefined for all-zero reference channels")
    return error / energy
