"""Lipschitz certificate matrix of the barrier network and its log-det loss.

For a network with weights W_0..W_l, hidden widths h_1..h_l (N in total),
input width n_0 and output width m, the matrix has size n_0 + N + m::

    [A; B]^T [[2ab Lam, -(a+b) Lam], [-(a+b) Lam, 2 Lam]] [A; B]   (padded)
    + [[L^2 I, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, -W_l^T], [0, 0, -W_l, I]]

with A = blockdiag(W_0..W_{l-1}) followed by a zero column block for the
last hidden layer and B = [0 I_N]. Positive semi-definiteness certifies an
L-Lipschitz network for activations with slopes in [a, b].
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, NotPDError
from ..tensor import Tensor, logdet
from ..tensor import functional as F

logger = logging.getLogger(__name__)

INFEASIBLE_PENALTY = 1e3
INITIAL_SHIFT = 1e-3


@dataclass
class LMIMatrix:
    """Assembled certificate matrix with its block layout."""

    matrix: Tensor
    input_dim: int
    hidden_widths: List[int]
    output_dim: int

    @property
    def dim(self) -> int:
        return self.input_dim + sum(self.hidden_widths) + self.output_dim

    def numpy(self) -> np.ndarray:
        return self.matrix.numpy()


@dataclass
class LMIResult:
    """Outcome of the log-det loss.

    Attributes:
        loss: Scalar to minimize
        feasible: The matrix passed the Cholesky factorization
        satisfied: Feasible and -logdet <= 0
        logdet: log det M when feasible, NaN otherwise
        pivot_deficit: Most negative pivot magnitude (0 when feasible)
        shift: Diagonal shift used by the infeasible penalty (0 when feasible)
    """

    loss: Tensor
    feasible: bool
    satisfied: bool
    logdet: float
    pivot_deficit: float = 0.0
    shift: float = 0.0


def _validate_layers(weights: Sequence[Tensor], multipliers: Tensor) -> Tuple[int, List[int], int]:
    if len(weights) < 2:
        raise DimensionError("the certificate needs at least one hidden layer")
    for previous, current in zip(weights[:-1], weights[1:]):
        if previous.shape[0] != current.shape[1]:
            raise DimensionError(
                f"incompatible widths: layer {previous.shape} feeds layer {current.shape}"
            )
    hidden = [w.shape[0] for w in weights[:-1]]
    if multipliers.shape != (sum(hidden),):
        raise DimensionError(
            f"{sum(hidden)} hidden neurons need as many multipliers, got {multipliers.shape}"
        )
    return weights[0].shape[1], hidden, weights[-1].shape[0]


def build_lmi(
    weights: Sequence[Tensor],
    multipliers: Tensor,
    slopes: Tuple[float, float],
    lipschitz_bound: float,
) -> LMIMatrix:
    """Assemble the Lipschitz certificate matrix on the tape.

    Args:
        weights: Barrier network weights W_0..W_l, each (out, in)
        multipliers: Positive diagonal of Lam, one entry per hidden neuron
        slopes: (alpha, beta) slope bounds shared by the hidden activations
        lipschitz_bound: Prescribed constant L

    Raises:
        DimensionError: If consecutive widths or the multiplier count disagree
    """
    n0, hidden, out = _validate_layers(weights, multipliers)
    alpha, beta = slopes
    n_hidden = sum(hidden)
    inner = n0 + n_hidden
    dim = inner + out

    # A: (N, n0 + N), W_k placed right of the block that feeds it
    blocks = []
    row = col = 0
    for weight in weights[:-1]:
        blocks.append(F.embed(weight, (n_hidden, inner), row, col))
        row += weight.shape[0]
        col += weight.shape[1]
    a_mat = blocks[0]
    for block in blocks[1:]:
        a_mat = F.add(a_mat, block)
    b_mat = Tensor(np.hstack([np.zeros((n_hidden, n0)), np.eye(n_hidden)]))

    lam = F.diag(multipliers)
    lam_a = F.matmul(lam, a_mat)
    quadratic = F.scale(F.matmul(F.transpose(a_mat), lam_a), 2.0 * alpha * beta)
    cross = F.matmul(b_mat.T, lam_a)
    quadratic = F.sub(quadratic, F.scale(F.add(cross, F.transpose(cross)), alpha + beta))
    quadratic = F.add(quadratic, F.scale(F.matmul(b_mat.T, F.matmul(lam, b_mat)), 2.0))

    last = weights[-1]
    last_row = n0 + n_hidden - last.shape[1]
    constant = np.zeros((dim, dim))
    constant[:n0, :n0] = lipschitz_bound**2 * np.eye(n0)
    constant[inner:, inner:] = np.eye(out)
    matrix = F.add(F.embed(quadratic, (dim, dim), 0, 0), Tensor(constant))
    matrix = F.sub(matrix, F.embed(F.transpose(last), (dim, dim), last_row, inner))
    matrix = F.sub(matrix, F.embed(last, (dim, dim), inner, last_row))
    return LMIMatrix(F.symmetrize(matrix), n0, hidden, out)


def lmi_loss(lmi: LMIMatrix) -> LMIResult:
    """-log det M, or a finite penalty when M is not positive definite.

    Outside the cone the loss is ``P0 + s - log det(M + s I)`` with the
    smallest shift ``s`` of the doubling sequence that makes the shifted
    matrix factorizable, so the gradient still points towards feasibility.
    """
    try:
        value = logdet(lmi.matrix)
    except NotPDError as exc:
        deficit = exc.pivot_deficit
        shift = deficit + INITIAL_SHIFT
        identity = np.eye(lmi.dim)
        while True:
            try:
                shifted = logdet(F.add(lmi.matrix, Tensor(shift * identity)))
                break
            except NotPDError:
                shift *= 2.0
        loss = F.sub(INFEASIBLE_PENALTY + shift, shifted)
        logger.debug("LMI infeasible: pivot deficit %.3e, shift %.3e", deficit, shift)
        return LMIResult(
            loss=loss,
            feasible=False,
            satisfied=False,
            logdet=float("nan"),
            pivot_deficit=deficit,
            shift=shift,
        )
    loss = F.neg(value)
    return LMIResult(loss=loss, feasible=True, satisfied=loss.item() <= 0.0, logdet=value.item())
