import numpy as np
import pytest

from barrierflow.certify.margins import Margins
from barrierflow.certify.verify import (
    CertificateReport,
    ConditionStats,
    action_grid,
    consistency_error,
    evaluate_conditions,
    lmi_status,
    refresh_margins,
    verify,
)
from barrierflow.config.settings import VerifyConfig
from barrierflow.envs.buffer import sample_datasets
from barrierflow.envs.spec import make_env_spec
from barrierflow.errors import EnvironmentMismatchError
from barrierflow.nets.checkpoint import Checkpoint

from tests.helpers import TINY_VERIFY, make_constant


def test_perfect_dynamics_has_zero_error(params, buffer):
    latent = np.array([0.2, 0.4])
    make_constant(params.online["encoder"], latent)
    make_constant(params.online["dynamics"], latent)
    error = consistency_error(params, buffer.observations, buffer.actions, buffer.next_observations)
    assert error == 0.0


def test_single_offset_is_its_norm(params, buffer):
    make_constant(params.online["encoder"], 0.0)
    make_constant(params.online["dynamics"], np.array([0.3, 0.4]))
    error = consistency_error(
        params, buffer.observations[:1], buffer.actions[:1], buffer.next_observations[:1]
    )
    assert error == pytest.approx(0.5)


def test_subset_error_is_no_larger(params, buffer):
    full = consistency_error(params, buffer.observations, buffer.actions, buffer.next_observations)
    part = consistency_error(
        params, buffer.observations[:5], buffer.actions[:5], buffer.next_observations[:5]
    )
    assert part <= full


def test_action_grid_bounds_stored_error(params, buffer):
    grid = action_grid(params, 5)
    np.testing.assert_allclose(grid, [-10.0, -5.0, 0.0, 5.0, 10.0])
    with_grid = consistency_error(
        params, buffer.observations, buffer.actions, buffer.next_observations, grid
    )
    assert with_grid >= 0.0


def test_consistency_error_needs_records(params, pendulum_spec):
    empty = np.zeros((0, pendulum_spec.observation_dim))
    with pytest.raises(ValueError):
        consistency_error(params, empty, np.zeros((0, 1)), empty)


def test_refresh_margins_is_sound(params, buffer):
    margins = refresh_margins(params, buffer, 2.0, VerifyConfig(**TINY_VERIFY))
    assert margins.sound
    assert margins.psi == pytest.approx(2.0 * margins.epsilon_bar)
    no_delta = refresh_margins(params, buffer, 2.0, VerifyConfig(**TINY_VERIFY), include_delta=False)
    assert no_delta.delta == 0.0 and no_delta.eta == 0.0


def test_condition_slacks_follow_barrier_sign(params, buffer):
    make_constant(params.online["barrier"], -1.0)
    make_constant(params.target["barrier"], -1.0)
    slacks = evaluate_conditions(params, buffer, Margins(lipschitz_bound=2.0, psi=0.1))
    assert slacks.violations("q1") == 0
    assert slacks.violations("q2") == len(buffer.unsafe_indices)
    np.testing.assert_allclose(slacks.slacks["q3"], 0.1)
    assert slacks.violations("q3") == len(buffer)


def test_condition_stats():
    stats = ConditionStats.from_slacks(np.array([-1.0, 0.5, 0.0]))
    assert (stats.count, stats.violations, stats.worst_slack) == (3, 1, 0.5)
    assert ConditionStats.from_slacks(np.zeros(0)).worst_slack is None


def test_lmi_status_of_zero_barrier(params):
    for weight in params.barrier_weights():
        weight.data = np.zeros_like(weight.data)
    status = lmi_status(params, 2.0)
    assert status.feasible and status.satisfied


def _report(**overrides) -> CertificateReport:
    clean = ConditionStats(count=3, violations=0, worst_slack=-0.1)
    values = dict(
        env_id="pendulum", n_records=3, lipschitz_bound=2.0, epsilon_bar=0.1, delta=0.0,
        psi=0.2, eta=0.0, q1=clean, q2=clean, q3=clean, q3_target=clean,
        lmi_feasible=True, lmi_satisfied=True, lmi_logdet=1.0, lipschitz_upper_bound=1.0,
    )
    values.update(overrides)
    return CertificateReport(**values)


def test_certified_needs_every_check():
    assert _report().certified
    assert not _report(lmi_satisfied=False).certified
    assert not _report(q2=ConditionStats(count=3, violations=1, worst_slack=0.2)).certified
    assert not _report(n_unsafe_entries=2).certified
    # the target-network form is reported but does not gate the certificate
    assert _report(q3_target=ConditionStats(count=3, violations=3, worst_slack=1.0)).certified


def test_verify_produces_report(params, buffer):
    checkpoint = Checkpoint(env_id="pendulum", params=params, margins=Margins(lipschitz_bound=2.0), seed=4)
    report, slacks = verify(checkpoint, buffer, VerifyConfig(**TINY_VERIFY))
    assert report.n_records == len(buffer)
    assert report.q1.count == len(buffer.safe_indices)
    assert report.q3.violations == slacks.violations("q3")
    assert report.psi == pytest.approx(2.0 * report.epsilon_bar)
    assert report.n_rollouts == TINY_VERIFY["n_rollouts"]
    assert report.extension is not None
    assert 0.0 <= report.safe_separation <= 1.0
    again, _ = verify(checkpoint, buffer, VerifyConfig(**TINY_VERIFY))
    assert again.epsilon_bar == report.epsilon_bar
    assert again.q3 == report.q3
    assert again.n_unsafe_entries == report.n_unsafe_entries


def test_verify_rejects_other_environment(params):
    vehicle = sample_datasets(make_env_spec("vehicle", frame_size=8), 2, 2, 2, seed=0)
    checkpoint = Checkpoint(env_id="pendulum", params=params, margins=Margins(lipschitz_bound=2.0))
    with pytest.raises(EnvironmentMismatchError):
        verify(checkpoint, vehicle)
