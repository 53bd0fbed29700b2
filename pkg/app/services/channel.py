"""
Channel realizations for the cascaded user-IRS 1-IRS 2-AP link.

Builds geometry-consistent Rician draws of the three physical links at
element resolution, forms the element-wise cascaded matrix
``diag(g_A) G_I diag(g_U)`` and reduces it to the group-wise M2 x M1
matrix that the estimators and beamformers work on.

Conventions:
    * The effective SISO gain is ``theta2^H H theta1``; theta vectors are the
      design variables (the physical reflection phase is their conjugate).
    * Path loss is applied as an amplitude factor ``sqrt(beta(d))`` on top of
      a unit-power Rician draw.
    * The inter-IRS LoS path gain ``s`` is unit modulus with a uniform phase;
      its magnitude is carried by ``sqrt(beta_I)``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import DimensionMismatchError, DomainError
from app.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

ArrayLayout = Literal["subsurface", "element"]

# Element spacing in half-wavelengths
HALF_WAVELENGTH = 1.0


@dataclass(frozen=True)
class ElementwiseChannels:
    """The three physical links at per-element resolution."""
    g_U: np.ndarray
    G_I: np.ndarray
    g_A: np.ndarray
    q1: Optional[np.ndarray] = None
    q2: Optional[np.ndarray] = None
    s: complex = 1.0 + 0.0j
    beta_I: float = 1.0
    inter_los_exact: bool = False

    @property
    def N1(self) -> int:
        return self.g_U.shape[0]

    @property
    def N2(self) -> int:
        return self.g_A.shape[0]

    @property
    def los_factors(self) -> Tuple[Optional[np.ndarray], Optional[np.ndarray], complex]:
        """(q1, q2, s) of the inter-IRS LoS component."""
        return self.q1, self.q2, self.s

    def canonical_bytes(self) -> bytes:
        """Byte serialization used to compare realizations exactly."""
        parts = [np.ascontiguousarray(self.g_U, dtype=np.complex128).tobytes(),
                 np.ascontiguousarray(self.G_I, dtype=np.complex128).tobytes(),
                 np.ascontiguousarray(self.g_A, dtype=np.complex128).tobytes(),
                 np.complex128(self.s).tobytes()]
        for q in (self.q1, self.q2):
            if q is not None:
                parts.append(np.ascontiguousarray(q, dtype=np.complex128).tobytes())
        return b"".join(parts)


@dataclass(frozen=True)
class CascadedChannel:
    """Group-wise M2 x M1 double-reflection channel, optionally in rank-one form."""
    H: np.ndarray
    los_form: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def M1(self) -> int:
        return self.H.shape[1]

    @property
    def M2(self) -> int:
        return self.H.shape[0]

    @classmethod
    def from_signatures(cls, v1_h: np.ndarray, v2: np.ndarray) -> "CascadedChannel":
        """Build the rank-one channel ``v2 v1^H`` and keep its factors."""
        v1_h = np.asarray(v1_h, dtype=complex)
        v2 = np.asarray(v2, dtype=complex)
        return cls(H=np.outer(v2, v1_h), los_form=(v1_h, v2))


def path_loss(d: float, alpha: float, cfg: ScenarioConfig) -> float:
    """
    Distance-dependent power gain ``beta0 * (d / d0) ** (-alpha)``.

    Args:
        d: Link distance in meters
        alpha: Path-loss exponent
        cfg: Scenario providing beta0 and d0

    Returns:
        float: Linear power gain

    Raises:
        DomainError: If the distance is not positive
    """
    if not d > 0:
        raise DomainError(f"Path loss needs a positive distance, got {d}", {"distance": d})
    return cfg.beta0 * (d / cfg.d0) ** (-alpha)


def array_response(n_elems: int, spacing: float, incidence_cosine: float) -> np.ndarray:
    """
    Uniform linear array response ``exp(-j*pi*spacing*(n-1)*cos)``.

    Args:
        n_elems: Number of elements
        spacing: Inter-element spacing in half-wavelengths
        incidence_cosine: Cosine between the array axis and the path direction

    Returns:
        np.ndarray: Unit-modulus complex vector of length n_elems
    """
    if n_elems < 1:
        raise DomainError(f"Array needs at least one element, got {n_elems}")
    if abs(incidence_cosine) > 1.0 + 1e-12:
        raise DomainError(f"Direction cosine {incidence_cosine} outside [-1, 1]")
    cosine = float(np.clip(incidence_cosine, -1.0, 1.0))
    return np.exp(-1j * np.pi * spacing * np.arange(n_elems) * cosine)


def direction_cosine(origin: Sequence[float], azimuth: float, target: Sequence[float]) -> float:
    """Cosine between an array axis (azimuth in the x-y plane) and the direction to ``target``."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(target, dtype=float) - origin
    distance = float(np.linalg.norm(direction))
    if distance <= 0:
        raise DomainError("Coincident endpoints have no direction", {"origin": origin.tolist()})
    axis = np.array([math.cos(azimuth), math.sin(azimuth), 0.0])
    return float(axis @ direction / distance)


def surface_response(
    n_subsurfaces: int,
    n0: int,
    incidence_cosine: float,
    layout: ArrayLayout = "subsurface",
    spacing: float = HALF_WAVELENGTH,
) -> np.ndarray:
    """
    Element-wise LoS response of an IRS made of ``n_subsurfaces`` groups of ``n0`` elements.

    ``subsurface``: a ULA of sub-surfaces whose elements share the phase of
    their sub-surface. ``element``: a ULA over all elements.
    """
    if layout == "subsurface":
        return np.repeat(array_response(n_subsurfaces, spacing, incidence_cosine), n0)
    if layout == "element":
        return array_response(n_subsurfaces * n0, spacing, incidence_cosine)
    raise DomainError(f"Unknown array layout '{layout}'")


def draw_rician(los: np.ndarray, K: float, rng: np.random.Generator) -> np.ndarray:
    """
    Unit-power Rician draw around a unit-modulus LoS shape.

    Returns ``sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * W`` with W i.i.d.
    CN(0, 1). ``K = inf`` returns the LoS shape itself.
    """
    los = np.asarray(los, dtype=complex)
    if K < 0:
        raise DomainError(f"Rician factor must be non-negative, got {K}")
    if math.isinf(K):
        return los.copy()
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / np.sqrt(2)
    return np.sqrt(K / (1 + K)) * los + np.sqrt(1 / (1 + K)) * nlos


def realize_channels(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    layout: ArrayLayout = "subsurface",
) -> ElementwiseChannels:
    """
    Draw one realization of g_U, G_I and g_A for a scenario.

    The draw order is fixed (s phase, g_U, G_I, g_A) so a seeded generator
    reproduces the realization bit for bit.
    """
    d_U = math.dist(cfg.user_pos, cfg.irs1_pos)
    d_I = math.dist(cfg.irs1_pos, cfg.irs2_pos)
    d_A = math.dist(cfg.irs2_pos, cfg.ap_pos)
    beta_U = path_loss(d_U, cfg.alpha_U, cfg)
    beta_I = path_loss(d_I, cfg.alpha_I, cfg)
    beta_A = path_loss(d_A, cfg.alpha_A, cfg)

    cos_user = direction_cosine(cfg.irs1_pos, cfg.irs1_azimuth, cfg.user_pos)
    cos_12 = direction_cosine(cfg.irs1_pos, cfg.irs1_azimuth, cfg.irs2_pos)
    cos_21 = direction_cosine(cfg.irs2_pos, cfg.irs2_azimuth, cfg.irs1_pos)
    cos_ap = direction_cosine(cfg.irs2_pos, cfg.irs2_azimuth, cfg.ap_pos)

    a_U = surface_response(cfg.M1, cfg.N0, cos_user, layout)
    q1 = surface_response(cfg.M1, cfg.N0, cos_12, layout)
    q2 = surface_response(cfg.M2, cfg.N0, cos_21, layout)
    a_A = surface_response(cfg.M2, cfg.N0, cos_ap, layout)

    s = np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    g_U = np.sqrt(beta_U) * draw_rician(a_U, cfg.K_U, rng)
    G_I = np.sqrt(beta_I) * draw_rician(s * np.outer(q2, q1.conj()), cfg.K_I, rng)
    g_A = np.sqrt(beta_A) * draw_rician(a_A, cfg.K_A, rng)

    return ElementwiseChannels(
        g_U=g_U,
        G_I=G_I,
        g_A=g_A,
        q1=q1,
        q2=q2,
        s=complex(s),
        beta_I=beta_I,
        inter_los_exact=math.isinf(cfg.K_I),
    )


def cascade_elementwise(ch: ElementwiseChannels) -> np.ndarray:
    """Element-wise cascaded channel ``diag(g_A) G_I diag(g_U)`` (N2 x N1)."""
    if ch.G_I.shape != (ch.N2, ch.N1):
        raise DimensionMismatchError(
            f"G_I has shape {ch.G_I.shape}, expected {(ch.N2, ch.N1)}",
            {"G_I": list(ch.G_I.shape), "N1": ch.N1, "N2": ch.N2},
        )
    return ch.g_A[:, None] * ch.G_I * ch.g_U[None, :]


def group_channel(H_bar: np.ndarray, N0: int) -> CascadedChannel:
    """
    Sum each N0 x N0 block of the element-wise channel.

    ``[H]_{j,i}`` is the sum over the rows of sub-surface j of IRS 2 and the
    columns of sub-surface i of IRS 1.
    """
    H_bar = np.asarray(H_bar)
    if H_bar.ndim != 2:
        raise DimensionMismatchError(f"Expected a matrix, got {H_bar.ndim} dimensions")
    N2, N1 = H_bar.shape
    if N0 < 1 or N1 % N0 or N2 % N0:
        raise DimensionMismatchError(
            f"Element-wise channel {H_bar.shape} is not divisible into {N0}-element groups",
            {"shape": [N2, N1], "N0": N0},
        )
    H = H_bar.reshape(N2 // N0, N0, N1 // N0, N0).sum(axis=(1, 3))
    return CascadedChannel(H=H)


def group_vector(v_bar: np.ndarray, N0: int) -> np.ndarray:
    """Sum consecutive N0-element groups of an element-wise vector."""
    v_bar = np.asarray(v_bar)
    if v_bar.ndim != 1:
        raise DimensionMismatchError(f"Expected a vector, got {v_bar.ndim} dimensions")
    if N0 < 1 or v_bar.shape[0] % N0:
        raise DimensionMismatchError(
            f"Vector of length {v_bar.shape[0]} is not divisible into {N0}-element groups",
            {"length": v_bar.shape[0], "N0": N0},
        )
    return v_bar.reshape(-1, N0).sum(axis=1)


def los_signatures(ch: ElementwiseChannels, N0: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Group-wise signature vectors of the LoS-reduced channel.

    Returns ``(v1_h, v2)`` with ``v1_h = group(q1^H diag(g_U))`` and
    ``v2 = group(diag(g_A) sqrt(beta_I) s q2)``.
    """
    if ch.q1 is None or ch.q2 is None:
        raise DimensionMismatchError("Realization carries no LoS factors")
    v1_h_bar = ch.q1.conj() * ch.g_U
    v2_bar = ch.g_A * (np.sqrt(ch.beta_I) * ch.s) * ch.q2
    return group_vector(v1_h_bar, N0), group_vector(v2_bar, N0)


def cascaded_channel(ch: ElementwiseChannels, N0: int) -> CascadedChannel:
    """Group-wise channel of a realization; carries its rank-one form when G_I is pure LoS."""
    grouped = group_channel(cascade_elementwise(ch), N0)
    if ch.inter_los_exact and ch.q1 is not None:
        v1_h, v2 = los_signatures(ch, N0)
        return CascadedChannel(H=grouped.H, los_form=(v1_h, v2))
    return grouped


def los_channel(ch: ElementwiseChannels, N0: int) -> CascadedChannel:
    """The LoS-reduced rank-one channel ``H_L = v2 v1^H`` of a realization."""
    v1_h, v2 = los_signatures(ch, N0)
    return CascadedChannel.from_signatures(v1_h, v2)


def expand_reflection(theta: np.ndarray, N0: int) -> np.ndarray:
    """Element-wise reflection vector ``theta kron 1_{N0}``."""
    return np.kron(np.asarray(theta), np.ones(N0))


def effective_gain(
    H: Union[CascadedChannel, np.ndarray],
    theta1: np.ndarray,
    theta2: np.ndarray,
) -> complex:
    """
    Equivalent SISO gain ``theta2^H H theta1``.

    Raises:
        DimensionMismatchError: If the reflection vectors do not fit H
    """
    matrix = H.H if isinstance(H, CascadedChannel) else np.asarray(H)
    theta1 = np.asarray(theta1)
    theta2 = np.asarray(theta2)
    if matrix.shape != (theta2.shape[0], theta1.shape[0]):
        raise DimensionMismatchError(
            f"Channel {matrix.shape} does not match theta2 ({theta2.shape[0]}) x theta1 ({theta1.shape[0]})"
        )
    return complex(np.vdot(theta2, matrix @ theta1))
