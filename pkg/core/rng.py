"""
Counter-based noise streams.

Every standard-normal triple is a pure function of (seed, trajectory id, step):
the Philox key is (seed, trajectory id) and the counter is the step index, so
any slice of any trajectory can be regenerated without replaying the others.
"""
import numpy as np # type: ignore
from scipy.special import ndtri # type: ignore

_MASK64 = (1 << 64) - 1
_WORDS_PER_STEP = 4
_UNIT = 2.0 ** -53


def stream_key(seed: int, traj_id: int) -> int:
    """Packs (seed, trajectory id) into the 128-bit Philox key."""
    return (int(seed) & _MASK64) | ((int(traj_id) & _MASK64) << 64)


def normal_block(seed: int, traj_id: int, first_step: int, n_steps: int) -> np.ndarray:
    """
    Standard normals for steps [first_step, first_step + n_steps) of one
    trajectory, shape (n_steps, 3).

    Each step consumes one Philox block (four 64-bit words, three used), and
    uniforms in the open unit interval are mapped through the inverse normal CDF,
    so there is no rejection step that would break the counter addressing.
    """
    if n_steps <= 0:
        return np.empty((0, 3))
    bitgen = np.random.Philox(key=stream_key(seed, traj_id))
    if first_step:
        bitgen.advance(int(first_step))
    raw = bitgen.random_raw(_WORDS_PER_STEP * n_steps).reshape(n_steps, _WORDS_PER_STEP)[:, :3]
    uniforms = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT
    return ndtri(uniforms)


def ensemble_normals(seed: int, traj_ids: np.ndarray, first_step: int, n_steps: int) -> np.ndarray:
    """Normals for a batch of trajectories, shape (n_steps, len(traj_ids), 3)."""
    blocks = [normal_block(seed, int(i), first_step, n_steps) for i in traj_ids]
    if not blocks:
        return np.empty((n_steps, 0, 3))
    return np.stack(blocks, axis=1)
