import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest singular value, exact to floating point."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def lipschitz_upper_bound(weights: Sequence[np.ndarray]) -> float:
    """Product of layer spectral norms, valid for 1-Lipschitz activations."""
    bound = 1.0
    for weight in weights:
        bound *= spectral_norm(weight)
    return bound


def random_pairs(
    latents: np.ndarray, n_pairs: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform pairs over the bounding box of a latent set."""
    latents = np.atleast_2d(latents)
    low, high = latents.min(axis=0), latents.max(axis=0)
    shape = (n_pairs, latents.shape[1])
    return rng.uniform(low, high, shape), rng.uniform(low, high, shape)


def empirical_lipschitz(
    barrier: Callable[[np.ndarray], np.ndarray],
    first: np.ndarray,
    second: np.ndarray,
) -> float:
    """max |B(z1) - B(z2)| / ||z1 - z2|| over pairs; coincident pairs are skipped.

    Raises:
        ValueError: If every pair is coincident
    """
    first, second = np.atleast_2d(first), np.atleast_2d(second)
    distance = np.linalg.norm(first - second, axis=1)
    keep = distance > 0.0
    if not np.any(keep):
        raise ValueError("empirical Lipschitz ratio needs at least one pair of distinct points")
    skipped = int(np.sum(~keep))
    if skipped:
        logger.debug("Skipping %d coincident pairs", skipped)
    change = np.abs(
        np.asarray(barrier(first[keep])).reshape(-1) - np.asarray(barrier(second[keep])).reshape(-1)
    )
    return float(np.max(change / distance[keep]))


def empirical_lipschitz_probe(
    barrier: Callable[[np.ndarray], np.ndarray],
    latents: np.ndarray,
    n_pairs: int = 100_000,
    seed: Optional[int] = 0,
) -> float:
    """Monte-Carlo lower bound of the barrier's Lipschitz constant near the data."""
    first, second = random_pairs(latents, n_pairs, np.random.default_rng(seed))
    return empirical_lipschitz(barrier, first, second)
