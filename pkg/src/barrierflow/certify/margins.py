import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial import cKDTree
from scipy.stats import qmc

from ..errors import DimensionError

logger = logging.getLogger(__name__)


class Margins(BaseModel):
    """Certified quantities carried through training and verification.

    Attributes:
        lipschitz_bound: Prescribed Lipschitz bound L_B of the barrier
        epsilon_bar: Latent covering radius of the dataset
        delta: Worst one-step latent consistency error
        psi: Completeness margin, L_B * epsilon_bar
        eta: Dynamics margin, L_B * delta
    """

    model_config = ConfigDict(extra="forbid")

    lipschitz_bound: float = Field(ge=0.0)
    epsilon_bar: float = Field(default=0.0, ge=0.0)
    delta: float = Field(default=0.0, ge=0.0)
    psi: float = Field(default=0.0, ge=0.0)
    eta: float = Field(default=0.0, ge=0.0)

    @classmethod
    def from_estimates(cls, lipschitz_bound: float, epsilon_bar: float, delta: float) -> "Margins":
        return cls(
            lipschitz_bound=lipschitz_bound,
            epsilon_bar=epsilon_bar,
            delta=delta,
            psi=psi_margin(lipschitz_bound, epsilon_bar),
            eta=eta_margin(lipschitz_bound, delta),
        )

    @property
    def sound(self) -> bool:
        return (
            self.psi >= self.lipschitz_bound * self.epsilon_bar
            and self.eta >= self.lipschitz_bound * self.delta
        )


def psi_margin(lipschitz_bound: float, epsilon_bar: float) -> float:
    """Smallest completeness margin, psi = L_B * epsilon_bar."""
    if lipschitz_bound < 0 or epsilon_bar < 0:
        raise ValueError("Lipschitz bound and covering radius must be non-negative")
    return lipschitz_bound * epsilon_bar


def eta_margin(lipschitz_bound: float, delta: float) -> float:
    """Smallest dynamics margin, eta = L_B * delta."""
    if lipschitz_bound < 0 or delta < 0:
        raise ValueError("Lipschitz bound and consistency error must be non-negative")
    return lipschitz_bound * delta


def covering_radius(latents: np.ndarray, probes: np.ndarray) -> float:
    """Largest distance from any probe point to its nearest dataset latent.

    Raises:
        DimensionError: If either set is empty or the dimensions differ
    """
    latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    if latents.size == 0 or probes.size == 0:
        raise DimensionError("covering radius needs non-empty dataset and probe sets")
    if latents.shape[1] != probes.shape[1]:
        raise DimensionError(
            f"latent dimension {latents.shape[1]} != probe dimension {probes.shape[1]}"
        )
    distances, _ = cKDTree(latents).query(probes, k=1)
    return float(np.max(distances))


def probe_set(
    latents: np.ndarray,
    resolution: int = 100,
    sobol_points: int = 100_000,
    seed: int = 0,
    mode: Optional[Literal["grid", "sobol"]] = None,
) -> np.ndarray:
    """Probe points over the bounding box of the dataset latents.

    Up to two dimensions use a regular grid with ``resolution`` points per
    axis; higher dimensions use a scrambled Sobol sequence rounded up to a
    power of two.
    """
    latents = np.atleast_2d(latents)
    low, high = latents.min(axis=0), latents.max(axis=0)
    dim = latents.shape[1]
    mode = mode or ("grid" if dim <= 2 else "sobol")
    if mode == "grid":
        axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(low, high)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    unit = sampler.random_base2(m=int(math.ceil(math.log2(max(sobol_points, 2)))))
    return qmc.scale(unit, low, np.where(high > low, high, low + 1e-12))
