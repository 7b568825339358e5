import math

import numpy as np # type: ignore
import pytest # type: ignore

from core.rng import normal_block
from models.params import ModelParams, Point3
from services.exceptions import TrajectoryEscapedError
from services.sde_core import (
    deterministic_endpoint_errors,
    diffusion_row,
    drift,
    drift_array,
    escaped_mask,
    local_step_defect,
    simulate,
    simulate_ensemble,
    step_em,
    step_em_array,
)


def test_drift_matches_lorenz_equations(classic_params):
    b = drift(classic_params, Point3(x=1.0, y=2.0, z=3.0))
    assert b.x == pytest.approx(10.0)
    assert b.y == pytest.approx(1.0 * 25.0 - 2.0)
    assert b.z == pytest.approx(2.0 - 8.0)


def test_drift_array_agrees_with_scalar(classic_params, sample_points):
    rows = drift_array(classic_params, sample_points)
    for p, row in zip(sample_points[:10], rows[:10]):
        assert np.array_equal(np.array(drift(classic_params, Point3.of(p)).as_tuple()), row)


def test_diffusion_row():
    params = ModelParams(sigma=1.0, gamma1=2.0, gamma3=0.5)
    assert diffusion_row(params).as_tuple() == (2.0, 0.0, 1.0)


def test_vectorised_step_is_bitwise_identical(classic_params, sample_points):
    noise = np.random.default_rng(0).normal(size=sample_points.shape) * 0.01
    batch = step_em_array(classic_params, sample_points, 1e-3, noise)
    for i in range(0, 200, 37):
        single = step_em(classic_params, Point3.of(sample_points[i]), 1e-3, noise[i])
        assert np.array_equal(np.array(single.as_tuple()), batch[i])


def test_step_rejects_bad_dt(classic_params, origin):
    with pytest.raises(ValueError):
        step_em(classic_params, origin, 0.0, (0.0, 0.0, 0.0))


def test_step_raises_on_escape(classic_params):
    with pytest.raises(TrajectoryEscapedError):
        step_em(classic_params, Point3(x=1e11, y=-1e11, z=0.0), 1.0, (0.0, 0.0, 0.0))


def test_escaped_mask_flags_nan_and_large_values():
    states = np.array([[0.0, 0.0, 0.0], [np.nan, 0.0, 0.0], [0.0, 2e12, 0.0]])
    assert escaped_mask(states).tolist() == [False, True, True]


def test_simulate_uses_the_counter_stream(classic_params):
    p0 = Point3(x=1.0, y=1.0, z=1.0)
    dt = 1e-3
    traj = simulate(classic_params, p0, dt, 5, seed=42)
    noise = normal_block(42, 0, 0, 5) * math.sqrt(dt)
    p = p0
    for k in range(5):
        p = step_em(classic_params, p, dt, noise[k])
        assert np.array_equal(traj.states[k + 1], np.array(p.as_tuple()))
    assert traj.times[-1] == pytest.approx(5 * dt)
    assert not traj.escaped


def test_simulate_is_deterministic_across_chunk_boundaries(classic_params):
    p0 = Point3(x=1.0, y=1.0, z=1.0)
    a = simulate(classic_params, p0, 1e-3, 5000, seed=3)
    b = simulate(classic_params, p0, 1e-3, 5000, seed=3)
    assert np.array_equal(a.states, b.states)
    assert a.states.shape == (5001, 3)


def test_zero_steps_returns_the_start(classic_params):
    traj = simulate(classic_params, Point3(x=1.0, y=2.0, z=3.0), 1e-3, 0, seed=0)
    assert traj.states.tolist() == [[1.0, 2.0, 3.0]]


def test_escape_truncates_and_flags():
    params = ModelParams(sigma=10.0, rho=28.0, beta=-1.0, gamma1=1.0)
    traj = simulate(params, Point3(x=0.0, y=0.0, z=1e6), 0.1, 1000, seed=0)
    assert traj.escaped
    assert traj.escape_time is not None
    assert np.all(np.abs(traj.states) <= 1e12)


def test_ensemble_row_zero_matches_single_path(classic_params):
    starts = np.tile([1.0, 1.0, 1.0], (3, 1))
    result = simulate_ensemble(classic_params, starts, 1e-3, 200, seed=9)
    single = simulate(classic_params, Point3(x=1.0, y=1.0, z=1.0), 1e-3, 200, seed=9)
    assert np.array_equal(result.states[0], single.states[-1])
    assert not np.array_equal(result.states[0], result.states[1])
    assert not result.escaped.any()


def test_ensemble_partition_is_irrelevant(classic_params):
    starts = np.tile([1.0, 1.0, 1.0], (6, 1))
    whole = simulate_ensemble(classic_params, starts, 1e-3, 100, seed=5)
    left = simulate_ensemble(classic_params, starts[:2], 1e-3, 100, seed=5, traj_ids=np.arange(0, 2))
    right = simulate_ensemble(classic_params, starts[2:], 1e-3, 100, seed=5, traj_ids=np.arange(2, 6))
    assert np.array_equal(whole.states, np.vstack([left.states, right.states]))


def test_observer_can_stop_trajectories(classic_params):
    starts = np.tile([1.0, 1.0, 1.0], (4, 1))
    seen = []

    def observer(step, states, active):
        seen.append(step)
        return np.full(states.shape[0], step >= 3)

    result = simulate_ensemble(classic_params, starts, 1e-3, 100, seed=1, observer=observer)
    assert seen == [0, 1, 2, 3]
    reference = simulate_ensemble(classic_params, starts, 1e-3, 3, seed=1)
    assert np.array_equal(result.states, reference.states)


def test_x_noise_keeps_invariant_line_exact(x_noise_params):
    traj = simulate(x_noise_params, Point3(x=5.0, y=0.0, z=28.0), 2e-3, 3000, seed=1)
    assert np.all(traj.states[:, 1] == 0.0)
    assert np.all(traj.states[:, 2] == 28.0)


def test_euler_is_first_order(classic_params):
    errors = deterministic_endpoint_errors(classic_params, Point3(x=1.0, y=1.0, z=1.0), 0.5, [1e-3, 5e-4, 2.5e-4])
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    assert all(1.7 < r < 2.3 for r in ratios)


def test_local_defect_is_second_order(classic_params):
    p = Point3(x=1.0, y=2.0, z=3.0)
    ratio = local_step_defect(classic_params, p, 1e-3) / local_step_defect(classic_params, p, 5e-4)
    assert ratio == pytest.approx(4.0, rel=0.05)
