"""
The stochastic Lorenz model: drift, diffusion and Euler–Maruyama integration.

Noise is additive and diagonal, so Euler–Maruyama already has strong order one.
Trajectories leaving the numeric range are truncated and flagged rather than
treated as errors, because blow-up is expected behaviour for β < 0.
"""
import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np # type: ignore
from scipy.integrate import solve_ivp # type: ignore

from core.rng import ensemble_normals, normal_block
from models.params import ModelParams, Point3, Trajectory
from .exceptions import TrajectoryEscapedError

ESCAPE_THRESHOLD = 1e12

# Called after every step with (step index, states, active mask); may return a
# boolean mask of trajectories that need no further integration.
StepObserver = Callable[[int, np.ndarray, np.ndarray], Optional[np.ndarray]]


def drift_components(params: ModelParams, x, y, z):
    """Drift on floats or on numpy arrays of matching shape."""
    return (
        params.sigma * (y - x),
        x * (params.rho - z) - y,
        x * y - params.beta * z,
    )


def drift(params: ModelParams, p: Point3) -> Point3:
    bx, by, bz = drift_components(params, p.x, p.y, p.z)
    return Point3(x=bx, y=by, z=bz)


def drift_array(params: ModelParams, states: np.ndarray) -> np.ndarray:
    """Drift at each row of an (N, 3) array."""
    return np.stack(drift_components(params, states[..., 0], states[..., 1], states[..., 2]), axis=-1)


def diffusion_amplitudes(params: ModelParams) -> Tuple[float, float, float]:
    return tuple(math.sqrt(2.0 * g) for g in params.gamma)


def diffusion_row(params: ModelParams) -> Point3:
    """The constant diagonal of the diffusion matrix, (√(2γ₁), √(2γ₂), √(2γ₃))."""
    return Point3.of(diffusion_amplitudes(params))


def _in_range(x: float, y: float, z: float) -> bool:
    # abs(nan) <= bound is False, so this also rejects non-finite values
    return abs(x) <= ESCAPE_THRESHOLD and abs(y) <= ESCAPE_THRESHOLD and abs(z) <= ESCAPE_THRESHOLD


def escaped_mask(states: np.ndarray) -> np.ndarray:
    """True for rows that are non-finite or exceed the escape threshold in some coordinate."""
    return ~(np.abs(states) <= ESCAPE_THRESHOLD).all(axis=-1)


def _check_dt(dt: float) -> None:
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError("dt must be a positive finite number")


def step_em(params: ModelParams, p: Point3, dt: float, noise: Sequence[float]) -> Point3:
    """
    One Euler–Maruyama step, p + drift·dt + diffusion ⊙ noise.

    Args:
        params: The model parameters.
        p: The current state.
        dt: The step size.
        noise: A standard-normal triple already scaled by √dt.

    Raises:
        TrajectoryEscapedError: If the new state leaves the numeric range.
    """
    _check_dt(dt)
    x, y, z = _em_update(params, p.x, p.y, p.z, dt, noise, diffusion_amplitudes(params))
    if not _in_range(x, y, z):
        raise TrajectoryEscapedError(f"Step from {p.as_tuple()} left the numeric range.")
    return Point3(x=x, y=y, z=z)


def _em_update(params: ModelParams, x, y, z, dt, noise, amps):
    bx, by, bz = drift_components(params, x, y, z)
    return (
        x + bx * dt + amps[0] * noise[0],
        y + by * dt + amps[1] * noise[1],
        z + bz * dt + amps[2] * noise[2],
    )


def step_em_array(params: ModelParams, states: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    """Vectorised step over (N, 3) states; bitwise identical to `step_em` row by row."""
    x, y, z = _em_update(
        params, states[:, 0], states[:, 1], states[:, 2], dt,
        (noise[:, 0], noise[:, 1], noise[:, 2]), diffusion_amplitudes(params),
    )
    return np.stack((x, y, z), axis=-1)


PATH_CHUNK = 4096


def path_chunks(
    params: ModelParams, p0: Point3, dt: float, n_steps: int, seed: int,
) -> Iterator[Tuple[int, np.ndarray, bool]]:
    """
    Streams one trajectory (trajectory id 0 of the seed's stream family) in blocks.

    Yields (first step, states after steps first+1 … first+len, escaped). An
    escaped block ends with the last in-range state and is the final one.
    The loop runs on Python floats and is bitwise identical to the vectorised
    ensemble update.
    """
    _check_dt(dt)
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    amps = diffusion_amplitudes(params)
    sqrt_dt = math.sqrt(dt)
    x, y, z = p0.as_tuple()
    for first in range(0, n_steps, PATH_CHUNK):
        count = min(PATH_CHUNK, n_steps - first)
        noise = (normal_block(seed, 0, first, count) * sqrt_dt).tolist()
        rows: List[Tuple[float, float, float]] = []
        for triple in noise:
            x, y, z = _em_update(params, x, y, z, dt, triple, amps)
            if not _in_range(x, y, z):
                yield first, np.array(rows, dtype=float).reshape(-1, 3), True
                return
            rows.append((x, y, z))
        yield first, np.array(rows, dtype=float), False


def simulate(params: ModelParams, p0: Point3, dt: float, n_steps: int, seed: int) -> Trajectory:
    """Integrates one trajectory; an escaped path is truncated at its last in-range state."""
    blocks = [p0.as_array().reshape(1, 3)]
    escape_time = None
    for first, block, escaped in path_chunks(params, p0, dt, n_steps, seed):
        blocks.append(block)
        if escaped:
            escape_time = (first + block.shape[0] + 1) * dt

    states = np.concatenate(blocks, axis=0)
    times = np.arange(states.shape[0], dtype=float) * dt
    return Trajectory(
        times=times, states=states, seed=seed, step=dt,
        escaped=escape_time is not None, escape_time=escape_time,
    )


@dataclass(frozen=True)
class EnsembleResult:
    """Final states of a batch run; escaped rows hold their last in-range state."""
    states: np.ndarray
    escaped: np.ndarray
    escape_step: np.ndarray


def _chunk_steps(n_traj: int) -> int:
    # bounds the pre-generated noise block to roughly 100 MB
    return int(max(16, min(1024, 4_000_000 // max(1, 3 * n_traj))))


def simulate_ensemble(
    params: ModelParams,
    starts: np.ndarray,
    dt: float,
    n_steps: int,
    seed: int,
    traj_ids: Optional[np.ndarray] = None,
    observer: Optional[StepObserver] = None,
) -> EnsembleResult:
    """
    Euler–Maruyama over a batch of independent trajectories.

    Row i uses the noise stream of trajectory id `traj_ids[i]` (default 0..N-1),
    so any partition of a batch reproduces the same per-trajectory paths.
    """
    _check_dt(dt)
    states = np.array(starts, dtype=float, copy=True).reshape(-1, 3)
    n = states.shape[0]
    ids = np.arange(n) if traj_ids is None else np.asarray(traj_ids)
    amps = np.array(diffusion_amplitudes(params))
    sqrt_dt = math.sqrt(dt)

    escaped = escaped_mask(states)
    escape_step = np.where(escaped, 0, -1)
    active = ~escaped
    if observer is not None:
        done = observer(0, states, active)
        if done is not None:
            active &= ~done

    chunk = _chunk_steps(n)
    with np.errstate(over="ignore", invalid="ignore"):
        for first in range(0, n_steps, chunk):
            if not active.any():
                break
            count = min(chunk, n_steps - first)
            noise = ensemble_normals(seed, ids, first, count) * sqrt_dt
            for offset in range(count):
                step = first + offset + 1
                x, y, z = _em_update(
                    params, states[:, 0], states[:, 1], states[:, 2], dt,
                    (noise[offset, :, 0], noise[offset, :, 1], noise[offset, :, 2]), amps,
                )
                proposal = np.stack((x, y, z), axis=-1)
                bad = active & escaped_mask(proposal)
                if bad.any():
                    escaped |= bad
                    escape_step[bad] = step
                    active &= ~bad
                states = np.where(active[:, None], proposal, states)
                if observer is not None:
                    done = observer(step, states, active)
                    if done is not None:
                        active &= ~done
                if not active.any():
                    break

    return EnsembleResult(states=states, escaped=escaped, escape_step=escape_step)


def euler_deterministic(params: ModelParams, p0: Point3, dt: float, n_steps: int) -> np.ndarray:
    """Zero-noise Euler endpoint."""
    x, y, z = p0.as_tuple()
    zero = (0.0, 0.0, 0.0)
    for _ in range(n_steps):
        x, y, z = _em_update(params, x, y, z, dt, zero, zero)
    return np.array([x, y, z])


def local_step_defect(params: ModelParams, p: Point3, dt: float) -> float:
    """Distance between one zero-noise step of size dt and two steps of size dt/2."""
    one = euler_deterministic(params, p, dt, 1)
    two = euler_deterministic(params, p, dt / 2, 2)
    return float(np.linalg.norm(one - two))


def deterministic_endpoint_errors(params: ModelParams, p0: Point3, T: float, dts: Sequence[float]) -> List[float]:
    """
    Endpoint errors of the zero-noise Euler scheme against a DOP853 reference.
    """
    def rhs(_t, u):
        return list(drift_components(params, u[0], u[1], u[2]))

    reference = solve_ivp(rhs, (0.0, T), p0.as_array(), method="DOP853", rtol=1e-12, atol=1e-12)
    exact = reference.y[:, -1]
    errors = []
    for dt in dts:
        n_steps = int(round(T / dt))
        errors.append(float(np.linalg.norm(euler_deterministic(params, p0, T / n_steps, n_steps) - exact)))
    return errors
