from typing import Dict

from pydantic import BaseModel, ConfigDict, Field


class LossWeights(BaseModel):
    """Relative weights of the latent-dynamics terms and of the total loss.

    Attributes:
        xi1: Safe-set hinge weight
        xi2: Unsafe-set hinge weight
        xi3: Latent consistency weight
        lambda1: Synthesis loss weight
        lambda2: Latent-dynamics loss weight
        lambda3: Performance loss weight
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    xi1: float = Field(default=1.0, gt=0.0)
    xi2: float = Field(default=1.0, gt=0.0)
    xi3: float = Field(default=1.0, gt=0.0)
    lambda1: float = Field(default=1.0, gt=0.0)
    lambda2: float = Field(default=0.5, gt=0.0)
    lambda3: float = Field(default=0.1, gt=0.0)

    def as_dict(self) -> Dict[str, float]:
        return self.model_dump()
