"""The steps of one outer training iteration."""

import logging
import math
import time
from typing import Optional

import numpy as np

from ..certify.verify import evaluate_conditions, lmi_status, refresh_margins
from ..core.interfaces.context import TrainingContext
from ..core.interfaces.training_step import TrainingStep
from ..envs.labels import sample_region
from ..envs.rollout import LatentPolicy, rollout_batch
from ..errors import DivergenceError
from ..losses.lmi import build_lmi, lmi_loss
from ..losses.performance import USER_POLICIES, UserPolicy
from ..losses.total import compute_losses
from ..tensor import Tape
from .log import TrainLog, TrainRecord

logger = logging.getLogger(__name__)


def ensure_finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        logger.error("%s became %s; aborting", what, value)
        raise DivergenceError(f"{what} is not finite ({value})")
    return value


def sample_indices(pool: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws from ``pool``, with replacement only when the pool is smaller."""
    if len(pool) == 0:
        return pool
    return rng.choice(pool, size=size, replace=len(pool) < size)


def user_policy_for(context: TrainingContext) -> Optional[UserPolicy]:
    name = context.config.user_policy
    if name == "none":
        return None
    return USER_POLICIES[name](context.config.env.action_dim)


class CollectRollouts(TrainingStep):
    """Runs the current closed-loop policy and appends the visited transitions to D."""

    @property
    def step_id(self) -> str:
        return "collect_rollouts"

    def execute(self, context: TrainingContext) -> TrainingContext:
        settings = context.config.rollout
        spec = context.buffer.spec
        starts = sample_region(settings.start_region, settings.n_rollouts, spec, context.random)
        before = len(context.buffer)
        trajectories = rollout_batch(
            LatentPolicy(context.params), starts, settings.horizon, spec, buffer=context.buffer
        )
        context.metadata["appended"] = len(context.buffer) - before
        context.metadata["rollout_unsafe_entries"] = sum(t.unsafe_entries for t in trajectories)
        return context


class RefreshMargins(TrainingStep):
    """psi <- L_B * eps_bar and eta <- L_B * delta before the loss step."""

    @property
    def step_id(self) -> str:
        return "refresh_margins"

    def execute(self, context: TrainingContext) -> TrainingContext:
        config = context.config
        context.margins = refresh_margins(
            context.params, context.buffer, config.lipschitz_bound, config.verify, config.seed
        )
        context.metadata["margins"] = context.margins
        return context


class TotalLossStep(TrainingStep):
    """Gradient steps on the weighted synthesis, latent-dynamics and performance losses.

    The step size is halved while the certificate matrix is infeasible.
    """

    @property
    def step_id(self) -> str:
        return "total_loss"

    def execute(self, context: TrainingContext) -> TrainingContext:
        config = context.config
        buffer, params = context.buffer, context.params
        optimizer = context.optimizer
        optimizer.lr = config.lr if context.lmi_feasible else 0.5 * config.lr
        if not context.lmi_feasible:
            logger.warning("LMI infeasible; total-loss learning rate halved to %g", optimizer.lr)
        user_policy = user_policy_for(context)

        for _ in range(config.loss_steps):
            rng = context.random
            safe = sample_indices(buffer.safe_indices, config.batch_size, rng)
            unsafe = sample_indices(buffer.unsafe_indices, config.batch_size, rng)
            batch = buffer.batch(sample_indices(buffer.all_indices, config.batch_size, rng))
            params.zero_grad()
            with Tape() as tape:
                losses = compute_losses(
                    params,
                    buffer.observations[safe].astype(np.float64),
                    buffer.observations[unsafe].astype(np.float64),
                    batch,
                    context.margins.psi,
                    context.margins.eta,
                    config.weights,
                    user_policy,
                    config.policy_input,
                    config.synthesis_target_encoder,
                )
                ensure_finite(losses.total.item(), "total loss")
                tape.backward(losses.total)
            optimizer.step()

        context.metadata["losses"] = losses.as_dict()
        context.metadata["lr"] = optimizer.lr
        return context


class LMIStep(TrainingStep):
    """Gradient steps on -log det of the certificate matrix over barrier weights and multipliers."""

    @property
    def step_id(self) -> str:
        return "lmi"

    def execute(self, context: TrainingContext) -> TrainingContext:
        config = context.config
        params = context.params
        optimizer = context.lmi_optimizer
        slopes = params.specs["barrier"].slopes

        for _ in range(config.lmi_steps):
            optimizer.zero_grad()
            with Tape() as tape:
                result = lmi_loss(
                    build_lmi(
                        params.barrier_weights(),
                        params.lmi_multipliers(),
                        slopes,
                        config.lipschitz_bound,
                    )
                )
                ensure_finite(result.loss.item(), "LMI loss")
                tape.backward(result.loss)
            optimizer.step()

        status = lmi_status(params, config.lipschitz_bound)
        context.lmi_feasible = status.feasible
        if not status.feasible:
            logger.warning(
                "LMI infeasible after step (pivot deficit %.3e)", status.pivot_deficit
            )
        context.metadata["lmi"] = {
            "loss": status.loss.item(),
            "logdet": status.logdet,
            "feasible": status.feasible,
            "satisfied": status.satisfied,
        }
        return context


class PolyakStep(TrainingStep):
    @property
    def step_id(self) -> str:
        return "polyak"

    def execute(self, context: TrainingContext) -> TrainingContext:
        context.params.polyak_update(context.config.rho)
        return context


class ConvergenceGate(TrainingStep):
    """Decides whether the iteration ends the run.

    An iteration is a candidate when the batch safety losses (synthesis and
    both set hinges) are within tolerance and the LMI is satisfied. The run
    converges when, in addition, freshly recomputed margins leave no
    violation of the margined conditions anywhere in D.
    """

    @property
    def step_id(self) -> str:
        return "convergence_gate"

    def execute(self, context: TrainingContext) -> TrainingContext:
        config = context.config
        losses = context.metadata["losses"]
        lmi = context.metadata["lmi"]
        safety = losses["syn"] + losses["salad_safe"] + losses["salad_unsafe"]
        candidate = safety <= config.tolerance and lmi["satisfied"]

        margins = refresh_margins(
            context.params, context.buffer, config.lipschitz_bound, config.verify, config.seed
        )
        slacks = evaluate_conditions(context.params, context.buffer, margins)
        violations = {name: slacks.violations(name) for name in ("q1", "q2", "q3")}
        converged = candidate and sum(violations.values()) == 0
        if converged:
            context.margins = margins
            context.converged = True
        context.metadata.update(candidate=candidate, converged=converged, violations=violations)
        if candidate:
            logger.info(
                "Iteration %d is a convergence candidate: violations %s",
                context.iteration, violations,
            )
        return context


class TrainLogSink(TrainingStep):
    """Appends the iteration's record to the run log."""

    def __init__(self, log: TrainLog) -> None:
        self.log = log

    @property
    def step_id(self) -> str:
        return "train_log"

    def execute(self, context: TrainingContext) -> TrainingContext:
        meta = context.metadata
        losses, lmi, margins = meta["losses"], meta["lmi"], meta["margins"]
        violations = meta["violations"]
        record = TrainRecord(
            iteration=context.iteration,
            total=losses["total"],
            syn=losses["syn"],
            salad=losses["salad"],
            salad_safe=losses["salad_safe"],
            salad_unsafe=losses["salad_unsafe"],
            salad_consistency=losses["salad_consistency"],
            perf=losses["perf"],
            lmi_loss=lmi["loss"],
            lmi_logdet=lmi["logdet"],
            lmi_feasible=lmi["feasible"],
            lmi_satisfied=lmi["satisfied"],
            epsilon_bar=margins.epsilon_bar,
            delta=margins.delta,
            psi=margins.psi,
            eta=margins.eta,
            q1_violations=violations["q1"],
            q2_violations=violations["q2"],
            q3_violations=violations["q3"],
            n_records=len(context.buffer),
            rollout_unsafe_entries=meta.get("rollout_unsafe_entries", 0),
            lr=meta["lr"],
            candidate=meta["candidate"],
            converged=meta["converged"],
            wall_time=time.perf_counter() - meta["started"],
        )
        self.log.append(record)
        logger.info(
            "Iteration %d: total %.5g syn %.5g salad %.5g lmi %.5g psi %.4g eta %.4g "
            "violations %d/%d/%d (%.2fs)",
            record.iteration, record.total, record.syn, record.salad, record.lmi_loss,
            record.psi, record.eta, record.q1_violations, record.q2_violations,
            record.q3_violations, record.wall_time,
        )
        return context
