import math

import numpy as np
import pytest

from barrierflow.errors import DimensionError, NotPDError
from barrierflow.tensor import Tensor, logdet
from barrierflow.tensor.gradcheck import check_gradients
from barrierflow.tensor.linalg import is_positive_definite, pivot_deficit


def test_logdet_identity():
    assert logdet(Tensor(np.eye(3))).item() == pytest.approx(0.0)


def test_logdet_diagonal():
    assert logdet(Tensor(np.diag([2.0, 2.0]))).item() == pytest.approx(2 * math.log(2), abs=1e-12)


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("c", [0.25, 1.0, 2.0, 7.5])
def test_logdet_scaled_identity(n, c):
    expected = n * math.log(c)
    assert logdet(Tensor(c * np.eye(n))).item() == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_logdet_indefinite_raises_with_deficit():
    with pytest.raises(NotPDError) as exc_info:
        logdet(Tensor([[1.0, 2.0], [2.0, 1.0]]))
    # second pivot of the elimination is 1 - 4 = -3
    assert exc_info.value.pivot_deficit == pytest.approx(3.0)


def test_logdet_rejects_non_square():
    with pytest.raises(DimensionError):
        logdet(Tensor(np.ones((2, 3))))


def test_logdet_gradient():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 4))
    m = Tensor(a @ a.T + 4 * np.eye(4), requires_grad=True)
    assert check_gradients(lambda: logdet(m), [m]) < 1e-4


def test_positive_definite_helpers():
    assert is_positive_definite(np.eye(2))
    assert not is_positive_definite(np.diag([1.0, -1.0]))
    assert pivot_deficit(np.eye(3)) == 0.0
