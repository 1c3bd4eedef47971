import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..errors import DimensionError
from ..tensor import Tensor
from ..tensor import functional as F

logger = logging.getLogger(__name__)

HiddenActivation = Literal["relu", "tanh"]
OutputActivation = Literal["linear", "tanh_scaled"]

# (alpha, beta): minimum and maximum slope of each hidden activation
ACTIVATION_SLOPES = {"relu": (0.0, 1.0), "tanh": (0.0, 1.0)}


class MLPSpec(BaseModel):
    """Architecture of a dense feed-forward network.

    Attributes:
        widths: Layer widths from input to output
        activations: One tag per hidden layer
        output_activation: ``linear`` or ``tanh_scaled`` into ``output_bounds``
        output_bounds: Closed output interval for ``tanh_scaled``
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    widths: List[int]
    activations: List[HiddenActivation]
    output_activation: OutputActivation = "linear"
    output_bounds: Optional[Tuple[float, float]] = None

    @field_validator("widths")
    @classmethod
    def _validate_widths(cls, widths: List[int]) -> List[int]:
        if len(widths) < 3:
            raise ValueError("an MLP needs an input, at least one hidden and an output layer")
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be >= 1")
        return widths

    @model_validator(mode="after")
    def _validate_layers(self) -> "MLPSpec":
        if len(self.activations) != len(self.widths) - 2:
            raise ValueError(
                f"{len(self.widths) - 2} hidden layers need as many activation tags, "
                f"got {len(self.activations)}"
            )
        if len({ACTIVATION_SLOPES[a] for a in self.activations}) != 1:
            raise ValueError("hidden activations must share one slope pair")
        if self.output_activation == "tanh_scaled":
            if self.output_bounds is None:
                raise ValueError("tanh_scaled output needs output_bounds")
            low, high = self.output_bounds
            if not low < high:
                raise ValueError("output_bounds must satisfy low < high")
        return self

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def output_dim(self) -> int:
        return self.widths[-1]

    @property
    def hidden_widths(self) -> List[int]:
        return self.widths[1:-1]

    @property
    def slopes(self) -> Tuple[float, float]:
        return ACTIVATION_SLOPES[self.activations[0]]


class MLP:
    """Dense network evaluated on the tape.

    Attributes:
        spec: Architecture
        weights: One (out, in) matrix per layer
        biases: One (out,) vector per layer
    """

    def __init__(self, spec: MLPSpec, weights: List[Tensor], biases: List[Tensor]) -> None:
        self.spec = spec
        self.weights = weights
        self.biases = biases
        self._validate_shapes()

    @classmethod
    def initialize(
        cls, spec: MLPSpec, rng: np.random.Generator, requires_grad: bool = True
    ) -> "MLP":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization."""
        weights, biases = [], []
        for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(
                Tensor(rng.uniform(-bound, bound, (fan_out, fan_in)), requires_grad)
            )
            biases.append(Tensor(rng.uniform(-bound, bound, fan_out), requires_grad))
        return cls(spec, weights, biases)

    @classmethod
    def zeros(cls, spec: MLPSpec, requires_grad: bool = True) -> "MLP":
        weights = [
            Tensor(np.zeros((o, i)), requires_grad)
            for i, o in zip(spec.widths[:-1], spec.widths[1:])
        ]
        biases = [Tensor(np.zeros(o), requires_grad) for o in spec.widths[1:]]
        return cls(spec, weights, biases)

    def _validate_shapes(self) -> None:
        expected = list(zip(self.spec.widths[1:], self.spec.widths[:-1]))
        actual = [w.shape for w in self.weights]
        if actual != expected or [b.shape for b in self.biases] != [
            (o,) for o, _ in expected
        ]:
            raise DimensionError(f"weights {actual} do not match widths {self.spec.widths}")

    def parameters(self) -> List[Tensor]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def copy(self, requires_grad: bool = False) -> "MLP":
        return MLP(
            self.spec,
            [Tensor(w.data, requires_grad) for w in self.weights],
            [Tensor(b.data, requires_grad) for b in self.biases],
        )

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.shape[1] != self.spec.input_dim:
            raise DimensionError(
                f"network expects (n, {self.spec.input_dim}) inputs, got {x.shape}"
            )
        h = x
        last = len(self.weights) - 1
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            h = F.linear(h, weight, bias)
            if index < last:
                h = F.relu(h) if self.spec.activations[index] == "relu" else F.tanh(h)

        if self.spec.output_activation == "tanh_scaled":
            low, high = self.spec.output_bounds
            h = F.add(F.scale(F.tanh(h), 0.5 * (high - low)), 0.5 * (high + low))
        return h
