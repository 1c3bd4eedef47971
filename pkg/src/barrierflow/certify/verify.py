"""Margin estimation and verification of the margined barrier conditions."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.spatial import cKDTree

from ..config.settings import VerifyConfig
from ..envs.buffer import DataBuffer
from ..envs.dynamics import previous_state
from ..envs.labels import sample_region
from ..envs.render import render_batch
from ..envs.rollout import LatentPolicy, rollout_batch
from ..errors import DimensionError, EnvironmentMismatchError
from ..losses.lmi import build_lmi, lmi_loss
from ..nets.checkpoint import Checkpoint
from ..nets.param_store import ParamStore
from ..tensor import no_grad
from .lipschitz import empirical_lipschitz_probe, lipschitz_upper_bound
from .margins import Margins, covering_radius, probe_set

logger = logging.getLogger(__name__)

VERIFY_STREAM = 2


def action_grid(params: ParamStore, size: int) -> np.ndarray:
    """Evenly spaced admissible actions of the policy's output interval."""
    low, high = params.specs["policy"].output_bounds
    return np.linspace(low, high, size)


def consistency_error(
    params: ParamStore,
    observations: np.ndarray,
    actions: np.ndarray,
    next_observations: np.ndarray,
    grid: Optional[np.ndarray] = None,
    latents: Optional[np.ndarray] = None,
) -> float:
    """Worst one-step latent prediction error max ||d(E(O), a) - E(O')||.

    Uses the stored action of each record, or the worst action of ``grid``
    when one is given.

    Raises:
        ValueError: If there are no records
    """
    if len(observations) == 0:
        raise ValueError("consistency error needs at least one record")
    if latents is None:
        latents = params.encode_all(observations)
    targets = params.encode_all(next_observations)
    if grid is None:
        predicted = params.evaluate_step(latents, np.asarray(actions).reshape(len(latents), -1))
        return float(np.max(np.linalg.norm(predicted - targets, axis=1)))
    worst = 0.0
    for action in np.asarray(grid, dtype=np.float64).reshape(-1):
        predicted = params.evaluate_step(latents, np.full((len(latents), 1), action))
        worst = max(worst, float(np.max(np.linalg.norm(predicted - targets, axis=1))))
    return worst


def refresh_margins(
    params: ParamStore,
    buffer: DataBuffer,
    lipschitz_bound: float,
    settings: Optional[VerifyConfig] = None,
    seed: int = 0,
    include_delta: bool = True,
) -> Margins:
    """Recompute the covering radius and consistency error, then psi and eta."""
    settings = settings or VerifyConfig()
    if len(buffer) == 0:
        raise DimensionError("cannot estimate margins from an empty buffer")
    latents = params.encode_all(buffer.observations)
    probes = probe_set(latents, settings.probe_resolution, settings.sobol_points, seed)
    epsilon_bar = covering_radius(latents, probes)
    delta = 0.0
    if include_delta:
        grid = (
            action_grid(params, settings.action_grid_size)
            if settings.delta_mode == "action_grid"
            else None
        )
        delta = consistency_error(
            params, buffer.observations, buffer.actions, buffer.next_observations, grid, latents
        )
    margins = Margins.from_estimates(lipschitz_bound, epsilon_bar, delta)
    logger.debug(
        "Margins: eps_bar=%.6g delta=%.6g psi=%.6g eta=%.6g",
        margins.epsilon_bar, margins.delta, margins.psi, margins.eta,
    )
    return margins


@dataclass
class ConditionSlacks:
    """Per-record slacks of the margined conditions; a record violates when slack > 0."""

    indices: Dict[str, np.ndarray] = field(default_factory=dict)
    slacks: Dict[str, np.ndarray] = field(default_factory=dict)

    def violations(self, name: str) -> int:
        return int(np.sum(self.slacks[name] > 0.0))


def evaluate_conditions(params: ParamStore, buffer: DataBuffer, margins: Margins) -> ConditionSlacks:
    """Slacks of q1 + psi on S, q2 + psi on U and the decrease condition on D.

    ``q3`` uses the online networks throughout; ``q3_target`` is the form the
    synthesis loss trains (target encoder and barrier at the successor).
    """
    psi, eta = margins.psi, margins.eta
    latents = params.encode_all(buffer.observations)
    target_latents = params.encode_all(buffer.observations, target=True)
    barrier = params.evaluate_barrier(latents) if len(latents) else np.zeros(0)
    result = ConditionSlacks()
    safe, unsafe = buffer.safe_indices, buffer.unsafe_indices
    result.indices = {
        "q1": safe,
        "q2": unsafe,
        "q3": buffer.all_indices,
        "q3_target": buffer.all_indices,
    }
    result.slacks["q1"] = barrier[safe] + psi
    result.slacks["q2"] = -barrier[unsafe] + psi
    if len(latents) == 0:
        result.slacks["q3"] = result.slacks["q3_target"] = np.zeros(0)
        return result

    actions = params.evaluate_policy(latents)
    successor = params.evaluate_barrier(params.evaluate_step(latents, actions))
    result.slacks["q3"] = successor + eta - barrier + psi
    successor_target = params.evaluate_barrier(
        params.evaluate_step(target_latents, actions), target=True
    )
    result.slacks["q3_target"] = successor_target + eta - barrier + psi
    return result


class ConditionStats(BaseModel):
    """Violation count and worst slack of one condition."""

    model_config = ConfigDict(extra="forbid")

    count: int
    violations: int
    worst_slack: Optional[float] = None

    @classmethod
    def from_slacks(cls, slacks: np.ndarray) -> "ConditionStats":
        return cls(
            count=len(slacks),
            violations=int(np.sum(slacks > 0.0)),
            worst_slack=float(np.max(slacks)) if len(slacks) else None,
        )


class ExtensionStats(BaseModel):
    """Unmargined conditions on a dense latent grid within eps_bar of the data."""

    model_config = ConfigDict(extra="forbid")

    n_points: int
    n_near_safe: int
    n_near_unsafe: int
    q1_violations: int
    q2_violations: int
    q3_violations: int

    @property
    def violations(self) -> int:
        return self.q1_violations + self.q2_violations + self.q3_violations


class CertificateReport(BaseModel):
    """Outcome of a verification pass."""

    model_config = ConfigDict(extra="forbid")

    env_id: str
    n_records: int
    lipschitz_bound: float
    epsilon_bar: float
    delta: float
    psi: float
    eta: float
    q1: ConditionStats
    q2: ConditionStats
    q3: ConditionStats
    q3_target: ConditionStats
    lmi_feasible: bool
    lmi_satisfied: bool
    lmi_logdet: float
    lipschitz_upper_bound: float
    empirical_lipschitz: Optional[float] = None
    n_rollouts: int = 0
    n_unsafe_trajectories: int = 0
    n_unsafe_entries: int = 0
    safe_separation: Optional[float] = None
    unsafe_separation: Optional[float] = None
    extension: Optional[ExtensionStats] = None

    @property
    def condition_violations(self) -> int:
        return self.q1.violations + self.q2.violations + self.q3.violations

    @property
    def certified(self) -> bool:
        return (
            self.condition_violations == 0
            and self.lmi_satisfied
            and self.n_unsafe_entries == 0
        )


def lmi_status(params: ParamStore, lipschitz_bound: float):
    """Certificate matrix check of the current barrier weights."""
    with no_grad():
        lmi = build_lmi(
            params.barrier_weights(),
            params.lmi_multipliers(),
            params.specs["barrier"].slopes,
            lipschitz_bound,
        )
        return lmi_loss(lmi)


def extension_check(
    params: ParamStore,
    buffer: DataBuffer,
    margins: Margins,
    resolution: int = 200,
    sobol_points: int = 100_000,
    seed: int = 0,
) -> ExtensionStats:
    """Check the unmargined conditions on probe latents close to the data.

    A probe within ``epsilon_bar`` of a safe latent must have B <= 0, one
    within ``epsilon_bar`` of an unsafe latent must have B >= 0, and every
    probe within ``epsilon_bar`` of any latent must satisfy the decrease
    condition under the learned policy and dynamics.
    """
    latents = params.encode_all(buffer.observations)
    probes = probe_set(latents, resolution, sobol_points, seed)
    radius = margins.epsilon_bar * (1.0 + 1e-12)
    near_any = cKDTree(latents).query(probes, k=1)[0] <= radius
    probes = probes[near_any]
    barrier = params.evaluate_barrier(probes) if len(probes) else np.zeros(0)

    def near(indices: np.ndarray) -> np.ndarray:
        if len(indices) == 0 or len(probes) == 0:
            return np.zeros(len(probes), dtype=bool)
        return cKDTree(latents[indices]).query(probes, k=1)[0] <= radius

    near_safe = near(buffer.safe_indices)
    near_unsafe = near(buffer.unsafe_indices)
    q3_violations = 0
    if len(probes):
        successor = params.evaluate_barrier(
            params.evaluate_step(probes, params.evaluate_policy(probes))
        )
        q3_violations = int(np.sum(successor - barrier > 0.0))
    stats = ExtensionStats(
        n_points=len(probes),
        n_near_safe=int(near_safe.sum()),
        n_near_unsafe=int(near_unsafe.sum()),
        q1_violations=int(np.sum(barrier[near_safe] > 0.0)),
        q2_violations=int(np.sum(barrier[near_unsafe] < 0.0)),
        q3_violations=q3_violations,
    )
    logger.info("Extension check on %d probes: %d violations", stats.n_points, stats.violations)
    return stats


def separation_rates(
    params: ParamStore, buffer: DataBuffer, n: int, rng: np.random.Generator
):
    """Fraction of fresh safe states with B <= 0 and fresh unsafe states with B > 0."""
    if n == 0:
        return None, None
    spec = buffer.spec
    rates = []
    for region, check in (("safe", lambda b: b <= 0.0), ("unsafe", lambda b: b > 0.0)):
        states = sample_region(region, n, spec, rng)
        observations = render_batch(previous_state(states, spec), states, spec)
        values = params.evaluate_barrier(params.encode_all(observations))
        rates.append(float(np.mean(check(values))))
    return rates[0], rates[1]


def verify(
    checkpoint: Checkpoint,
    buffer: DataBuffer,
    settings: Optional[VerifyConfig] = None,
    seed: Optional[int] = None,
):
    """Recompute the margins and check every certificate condition.

    Args:
        checkpoint: Trained networks and their prescribed Lipschitz bound
        buffer: Dataset the certificate is checked on
        settings: Probe densities, rollout budget and held-out sizes
        seed: Root of the rollout and held-out streams (checkpoint seed by default)

    Returns:
        The report and the per-record slacks

    Raises:
        EnvironmentMismatchError: If the checkpoint and dataset environments differ
    """
    if checkpoint.env_id != buffer.spec.env_id:
        raise EnvironmentMismatchError(
            f"checkpoint is for {checkpoint.env_id!r}, dataset for {buffer.spec.env_id!r}"
        )
    settings = settings or VerifyConfig()
    seed = checkpoint.seed if seed is None else seed
    params = checkpoint.params
    spec = buffer.spec
    lipschitz_bound = checkpoint.lipschitz_bound
    rng = np.random.default_rng(np.random.SeedSequence([seed, VERIFY_STREAM]))

    margins = refresh_margins(params, buffer, lipschitz_bound, settings, seed)
    slacks = evaluate_conditions(params, buffer, margins)
    lmi = lmi_status(params, lipschitz_bound)
    latents = params.encode_all(buffer.observations)
    empirical = None
    if len(latents) > 1:
        empirical = empirical_lipschitz_probe(
            params.evaluate_barrier, latents, settings.lipschitz_pairs, seed
        )

    unsafe_trajectories = unsafe_entries = 0
    if settings.n_rollouts > 0:
        starts = sample_region("safe", settings.n_rollouts, spec, rng)
        trajectories = rollout_batch(LatentPolicy(params), starts, settings.horizon, spec)
        unsafe_trajectories = sum(not t.safe for t in trajectories)
        unsafe_entries = sum(t.unsafe_entries for t in trajectories)
    safe_rate, unsafe_rate = separation_rates(params, buffer, settings.holdout, rng)
    extension = None
    if settings.extension_check:
        extension = extension_check(
            params, buffer, margins, settings.extension_resolution, settings.sobol_points, seed
        )

    report = CertificateReport(
        env_id=spec.env_id,
        n_records=len(buffer),
        lipschitz_bound=lipschitz_bound,
        epsilon_bar=margins.epsilon_bar,
        delta=margins.delta,
        psi=margins.psi,
        eta=margins.eta,
        q1=ConditionStats.from_slacks(slacks.slacks["q1"]),
        q2=ConditionStats.from_slacks(slacks.slacks["q2"]),
        q3=ConditionStats.from_slacks(slacks.slacks["q3"]),
        q3_target=ConditionStats.from_slacks(slacks.slacks["q3_target"]),
        lmi_feasible=lmi.feasible,
        lmi_satisfied=lmi.satisfied,
        lmi_logdet=lmi.logdet,
        lipschitz_upper_bound=lipschitz_upper_bound([w.data for w in params.barrier_weights()]),
        empirical_lipschitz=empirical,
        n_rollouts=settings.n_rollouts,
        n_unsafe_trajectories=unsafe_trajectories,
        n_unsafe_entries=unsafe_entries,
        safe_separation=safe_rate,
        unsafe_separation=unsafe_rate,
        extension=extension,
    )
    logger.info(
        "Verification of %s: %d condition violations, LMI %s, %d unsafe rollout entries",
        spec.env_id,
        report.condition_violations,
        "satisfied" if report.lmi_satisfied else "not satisfied",
        unsafe_entries,
    )
    return report, slacks
