"""Binary checkpoint format.

Layout (all integers unsigned little-endian, all reals little-endian f64)::

    b"SLDC" | u32 version
    metadata: str env_id | u32 latent_dim | f64 L_B, psi, eta, epsilon_bar, delta
              | u64 seed | u32 iteration | u8 converged | u8 certified | f64 rho
    str JSON {"networks": {name: spec}, "settings": {...}}
    u32 network count, then per network:
        str name | u32 layer count | (u32 out, u32 in) per layer
        | weight then bias arrays per layer
    u32 array count, then per array: str name | u32 ndim | u32 dims | data

Strings are a u32 byte length followed by UTF-8 bytes.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..certify.margins import Margins
from ..errors import CheckpointError, EnvironmentMismatchError
from ..tensor import Tensor
from .mlp import MLP, MLPSpec
from .param_store import NETWORK_NAMES, ParamStore

logger = logging.getLogger(__name__)

MAGIC = b"SLDC"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """Everything needed to evaluate, verify or resume a run."""

    env_id: str
    params: ParamStore
    margins: Margins
    seed: int = 0
    iteration: int = 0
    converged: bool = False
    certified: bool = False
    settings: Dict[str, Any] = field(default_factory=dict)
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    @property
    def latent_dim(self) -> int:
        return self.params.latent_dim

    @property
    def lipschitz_bound(self) -> float:
        return self.margins.lipschitz_bound


class _Writer:
    def __init__(self) -> None:
        self.parts: List[bytes] = []

    def pack(self, fmt: str, *values) -> None:
        self.parts.append(struct.pack("<" + fmt, *values))

    def string(self, value: str) -> None:
        raw = value.encode("utf-8")
        self.pack("I", len(raw))
        self.parts.append(raw)

    def array(self, values: np.ndarray) -> None:
        self.parts.append(np.ascontiguousarray(values, dtype="<f8").tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, payload: bytes) -> None:
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointError(
                f"checkpoint truncated at byte {self.offset} (needed {size} more)"
            )
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        fmt = "<" + fmt
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (length,) = self.unpack("I")
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CheckpointError("checkpoint string field is not valid UTF-8") from exc

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape)) if len(shape) else 1
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    """Write a checkpoint; parameters round-trip bit-exactly."""
    path = Path(path)
    params = checkpoint.params
    margins = checkpoint.margins
    w = _Writer()
    w.parts.append(MAGIC)
    w.pack("I", FORMAT_VERSION)
    w.string(checkpoint.env_id)
    w.pack("I", params.latent_dim)
    w.pack(
        "5d",
        margins.lipschitz_bound,
        margins.psi,
        margins.eta,
        margins.epsilon_bar,
        margins.delta,
    )
    w.pack("QIBBd", checkpoint.seed, checkpoint.iteration,
           int(checkpoint.converged), int(checkpoint.certified), params.rho)
    w.string(
        json.dumps(
            {
                "networks": {name: spec.model_dump(mode="json") for name, spec in params.specs.items()},
                "settings": checkpoint.settings,
            },
            sort_keys=True,
        )
    )

    networks = [(f"online.{n}", params.online[n]) for n in NETWORK_NAMES] + [
        (f"target.{n}", params.target[n]) for n in NETWORK_NAMES
    ]
    w.pack("I", len(networks))
    for name, net in networks:
        w.string(name)
        w.pack("I", len(net.weights))
        for weight in net.weights:
            w.pack("II", *weight.shape)
        for weight, bias in zip(net.weights, net.biases):
            w.array(weight.data)
            w.array(bias.data)

    arrays = {"lmi_free": params.lmi_free.data, **checkpoint.arrays}
    w.pack("I", len(arrays))
    for name, values in arrays.items():
        values = np.asarray(values, dtype=np.float64)
        w.string(name)
        w.pack("I", values.ndim)
        if values.ndim:
            w.pack(f"{values.ndim}I", *values.shape)
        w.array(values)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(w.getvalue())
    logger.info("Saved checkpoint for %s to %s", checkpoint.env_id, path)
    return path


def load_checkpoint(path: Union[str, Path], expected_env: Optional[str] = None) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointError: Missing, truncated, corrupt or wrong-version file
        EnvironmentMismatchError: If ``expected_env`` differs from the file's
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint {path} does not exist")
    r = _Reader(path.read_bytes())
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path} is not a barrierflow checkpoint")
    (version,) = r.unpack("I")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint version {version} is not supported (expected {FORMAT_VERSION})"
        )

    env_id = r.string()
    if expected_env is not None and env_id != expected_env:
        raise EnvironmentMismatchError(
            f"checkpoint was trained on {env_id!r}, not {expected_env!r}"
        )
    (latent_dim,) = r.unpack("I")
    lipschitz_bound, psi, eta, epsilon_bar, delta = r.unpack("5d")
    seed, iteration, converged, certified, rho = r.unpack("QIBBd")
    try:
        header = json.loads(r.string())
        specs = {name: MLPSpec(**spec) for name, spec in header["networks"].items()}
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt network description in {path}: {exc}") from exc

    (network_count,) = r.unpack("I")
    nets: Dict[str, MLP] = {}
    for _ in range(network_count):
        name = r.string()
        role, _, net_name = name.partition(".")
        if net_name not in specs:
            raise CheckpointError(f"unknown network {name!r} in {path}")
        (layers,) = r.unpack("I")
        shapes = [r.unpack("II") for _ in range(layers)]
        weights, biases = [], []
        trainable = role == "online"
        for shape in shapes:
            weights.append(Tensor(r.array(shape), requires_grad=trainable))
            biases.append(Tensor(r.array((shape[0],)), requires_grad=trainable))
        try:
            nets[name] = MLP(specs[net_name], weights, biases)
        except ValueError as exc:
            raise CheckpointError(f"network {name!r} does not match its spec") from exc

    (array_count,) = r.unpack("I")
    arrays: Dict[str, np.ndarray] = {}
    for _ in range(array_count):
        name = r.string()
        (ndim,) = r.unpack("I")
        shape = r.unpack(f"{ndim}I") if ndim else ()
        arrays[name] = r.array(shape)
    if r.offset != len(r.payload):
        raise CheckpointError(f"{len(r.payload) - r.offset} trailing bytes in {path}")

    try:
        params = ParamStore(
            online={n: nets[f"online.{n}"] for n in NETWORK_NAMES},
            target={n: nets[f"target.{n}"] for n in NETWORK_NAMES},
            lmi_free=Tensor(arrays.pop("lmi_free"), requires_grad=True, name="lmi_free"),
            rho=rho,
        )
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"incomplete parameter set in {path}: {exc}") from exc
    if params.latent_dim != latent_dim:
        raise CheckpointError("latent dimension does not match the encoder output")
    try:
        margins = Margins(
            lipschitz_bound=lipschitz_bound,
            epsilon_bar=epsilon_bar,
            delta=delta,
            psi=psi,
            eta=eta,
        )
    except ValueError as exc:
        raise CheckpointError(f"invalid margins in {path}: {exc}") from exc

    logger.info("Loaded %s checkpoint from %s (iteration %d)", env_id, path, iteration)
    return Checkpoint(
        env_id=env_id,
        params=params,
        margins=margins,
        seed=seed,
        iteration=iteration,
        converged=bool(converged),
        certified=bool(certified),
        settings=header.get("settings", {}),
        arrays=arrays,
        version=version,
    )
