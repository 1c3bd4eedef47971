import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..errors import DimensionError, NotPDError
from .tensor import Tensor, make_result


def symmetric_pivots(matrix: np.ndarray) -> np.ndarray:
    """Diagonal pivots of an unpivoted LDL^T elimination of a symmetric matrix.

    The elimination keeps going past non-positive pivots (a zero pivot
    skips its update), so the pivots describe how far the matrix is from
    the positive definite cone.
    """
    work = np.array(matrix, dtype=np.float64)
    n = work.shape[0]
    pivots = np.empty(n)
    for k in range(n):
        pivot = work[k, k]
        pivots[k] = pivot
        if pivot == 0.0:
            continue
        column = work[k + 1 :, k].copy()
        work[k + 1 :, k + 1 :] -= np.outer(column, column) / pivot
    return pivots


def pivot_deficit(matrix: np.ndarray) -> float:
    """Magnitude of the most negative pivot; 0 when every pivot is >= 0."""
    pivots = symmetric_pivots(0.5 * (matrix + matrix.T))
    return float(max(0.0, -pivots.min())) if pivots.size else 0.0


def is_positive_definite(matrix: np.ndarray) -> bool:
    try:
        cho_factor(0.5 * (matrix + matrix.T), lower=True)
    except LinAlgError:
        return False
    return True


def logdet(m: Tensor) -> Tensor:
    """Log-determinant of a symmetric positive definite matrix.

    The input is symmetrized as (M + M^T)/2 and factored with Cholesky;
    the gradient is the (symmetric) inverse.

    Raises:
        DimensionError: If ``m`` is not square
        NotPDError: If the factorization fails
    """
    if m.data.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"logdet expects a square matrix, got {m.shape}")
    sym = 0.5 * (m.data + m.data.T)
    try:
        factor = cho_factor(sym, lower=True)
    except LinAlgError as exc:
        deficit = pivot_deficit(sym)
        raise NotPDError(
            f"matrix of size {m.shape[0]} is not positive definite "
            f"(pivot deficit {deficit:.3e})",
            pivot_deficit=deficit,
        ) from exc

    value = 2.0 * np.sum(np.log(np.diag(factor[0])))

    def backward(g):
        inverse = cho_solve(factor, np.eye(sym.shape[0]))
        return (float(g) * 0.5 * (inverse + inverse.T),)

    return make_result(np.array(value), (m,), backward)
