"""
Training reflection schedules and pilot observations.

Scheme 1 spends M1*M2 pilots: IRS 1 holds column i of Theta1 for a
sub-block of M2 symbols while IRS 2 sweeps the columns of Theta2. Scheme 2
spends M1+M2 pilots in two sub-blocks with one surface held at all-ones.
The pilot symbol is fixed to 1.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple, Union

import numpy as np

from app.exceptions import DimensionMismatchError, DomainError, SingularTrainingMatrixError
from app.services.channel import CascadedChannel

logger = logging.getLogger(__name__)

EntryTag = Literal["S1", "S2-sub1", "S2-sub2"]

UNIT_MODULUS_TOL = 1e-12


def dft_matrix(m: int) -> np.ndarray:
    """
    m x m DFT matrix ``[D]_{l,k} = exp(-j*2*pi*(l-1)*(k-1)/m)``.

    Satisfies ``D D^H = m I``, the MSE-optimal training condition.
    """
    if m < 1:
        raise DomainError(f"DFT size must be at least 1, got {m}")
    idx = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / m)


def random_training_matrix(m: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit-modulus m x m training matrix with i.i.d. uniform phases."""
    if m < 1:
        raise DomainError(f"Training matrix size must be at least 1, got {m}")
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(m, m)))


def is_unit_modulus(values: np.ndarray, tol: float = UNIT_MODULUS_TOL) -> bool:
    """True when every entry has modulus one within ``tol``."""
    return bool(np.all(np.abs(np.abs(values) - 1.0) < tol))


def check_training_matrix(Theta: np.ndarray, m: int, name: str = "Theta") -> np.ndarray:
    """Validate a square invertible training matrix and return it as complex."""
    Theta = np.asarray(Theta, dtype=complex)
    if Theta.shape != (m, m):
        raise DimensionMismatchError(f"{name} has shape {Theta.shape}, expected {(m, m)}")
    if np.linalg.matrix_rank(Theta) < m:
        raise SingularTrainingMatrixError(f"{name} is singular", {"size": m})
    return Theta


@dataclass(frozen=True)
class TrainingSchedule:
    """Ordered reflection pairs (theta1, theta2) sent during channel training."""
    entries: List[Tuple[np.ndarray, np.ndarray]]
    tags: List[EntryTag]
    Theta1: np.ndarray
    Theta2: np.ndarray

    @property
    def scheme(self) -> str:
        return "S1" if all(tag == "S1" for tag in self.tags) else "S2"

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def M1(self) -> int:
        return self.Theta1.shape[0]

    @property
    def M2(self) -> int:
        return self.Theta2.shape[0]

    @property
    def unit_modulus(self) -> bool:
        """False for test-only matrices that a physical IRS cannot apply."""
        return is_unit_modulus(self.Theta1) and is_unit_modulus(self.Theta2)

    def stacked(self) -> Tuple[np.ndarray, np.ndarray]:
        """Reflection vectors stacked row-wise: (length x M1, length x M2)."""
        theta1 = np.array([pair[0] for pair in self.entries])
        theta2 = np.array([pair[1] for pair in self.entries])
        return theta1, theta2


@dataclass(frozen=True)
class PilotObservation:
    """Received pilots of one training phase and the noise that was injected."""
    y: np.ndarray
    sigma_sq: float
    schedule: TrainingSchedule
    noise: np.ndarray = field(repr=False, default=None)

    def as_matrix(self) -> np.ndarray:
        """Scheme 1 observations as the M2 x M1 matrix ``Y_t``."""
        if self.schedule.scheme != "S1":
            raise DimensionMismatchError("Only Scheme 1 observations reshape to a matrix")
        return self.y.reshape(self.schedule.M1, self.schedule.M2).T

    def sub_blocks(self) -> Tuple[np.ndarray, np.ndarray]:
        """Scheme 2 observations split into (y1 of length M2, y2 of length M1)."""
        if self.schedule.scheme != "S2":
            raise DimensionMismatchError("Only Scheme 2 observations split into sub-blocks")
        M2 = self.schedule.M2
        return self.y[:M2], self.y[M2:]


def schedule_scheme1(
    M1: int,
    M2: int,
    Theta1: Optional[np.ndarray] = None,
    Theta2: Optional[np.ndarray] = None,
) -> TrainingSchedule:
    """
    Scheme 1 schedule of M1*M2 entries.

    Entry ``t = (i-1)*M2 + j`` carries column i of Theta1 and column j of
    Theta2. DFT matrices are used when none are given.
    """
    Theta1 = check_training_matrix(dft_matrix(M1) if Theta1 is None else Theta1, M1, "Theta1")
    Theta2 = check_training_matrix(dft_matrix(M2) if Theta2 is None else Theta2, M2, "Theta2")
    entries = [(Theta1[:, i], Theta2[:, j]) for i in range(M1) for j in range(M2)]
    return TrainingSchedule(entries=entries, tags=["S1"] * len(entries), Theta1=Theta1, Theta2=Theta2)


def schedule_scheme2(
    M1: int,
    M2: int,
    Theta1: Optional[np.ndarray] = None,
    Theta2: Optional[np.ndarray] = None,
) -> TrainingSchedule:
    """
    Scheme 2 schedule of M2 + M1 entries.

    Sub-block 1 holds IRS 1 at all-ones and sweeps Theta2; sub-block 2 holds
    IRS 2 at all-ones and sweeps Theta1.
    """
    Theta1 = check_training_matrix(dft_matrix(M1) if Theta1 is None else Theta1, M1, "Theta1")
    Theta2 = check_training_matrix(dft_matrix(M2) if Theta2 is None else Theta2, M2, "Theta2")
    ones1 = np.ones(M1, dtype=complex)
    ones2 = np.ones(M2, dtype=complex)
    entries = [(ones1, Theta2[:, j]) for j in range(M2)]
    entries += [(Theta1[:, i], ones2) for i in range(M1)]
    tags: List[EntryTag] = ["S2-sub1"] * M2 + ["S2-sub2"] * M1
    return TrainingSchedule(entries=entries, tags=tags, Theta1=Theta1, Theta2=Theta2)


def complex_noise(shape, sigma_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian samples with variance ``sigma_sq``."""
    if sigma_sq == 0:
        return np.zeros(shape, dtype=complex)
    return np.sqrt(sigma_sq / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def observe(
    H: Union[CascadedChannel, np.ndarray],
    sched: TrainingSchedule,
    sigma_sq: float,
    rng: Optional[np.random.Generator] = None,
) -> PilotObservation:
    """
    Received pilots ``y[t] = theta2[t]^H H theta1[t] + z[t]``.

    ``sigma_sq = 0`` is the noise-free test mode and needs no generator.
    """
    matrix = H.H if isinstance(H, CascadedChannel) else np.asarray(H)
    if matrix.shape != (sched.M2, sched.M1):
        raise DimensionMismatchError(
            f"Channel {matrix.shape} does not match schedule ({sched.M2} x {sched.M1})"
        )
    if sigma_sq < 0:
        raise DomainError(f"Noise power must be non-negative, got {sigma_sq}")
    if sigma_sq > 0 and rng is None:
        raise DomainError("A random generator is required when sigma_sq > 0")
    theta1, theta2 = sched.stacked()
    clean = np.einsum("tj,ji,ti->t", theta2.conj(), matrix, theta1)
    noise = complex_noise(clean.shape, sigma_sq, rng)
    return PilotObservation(y=clean + noise, sigma_sq=sigma_sq, schedule=sched, noise=noise)
