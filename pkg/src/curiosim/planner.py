"""Temporary curiosity value functions built by value iteration.

A value field is a plain ``(rows, cols)`` float array aligned with a
:class:`~curiosim.gridworld.DomainSpec`.
"""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from curiosim.gridworld import ACTIONS, DomainSpec, GridPosition, MoveAction

DEFAULT_TOLERANCE = 1e-9


class CuriosityRewardMode(enum.Enum):
    AVERSIVE = "aversive"  # 0 leaving the target, -1 elsewhere
    POSITIVE = "positive"  # 1 leaving the target, 0 elsewhere
    ABLATED = "ablated"  # 0 everywhere; no planning


class PlannerError(RuntimeError):
    pass


def zeros_field(spec: DomainSpec) -> np.ndarray:
    return np.zeros(spec.shape)


def curiosity_reward(spec: DomainSpec, target: GridPosition, mode: CuriosityRewardMode) -> np.ndarray:
    """Per-source-cell reward; the reward depends only on the cell being left."""
    if mode is CuriosityRewardMode.AVERSIVE:
        reward = np.full(spec.shape, -1.0)
        reward[target] = 0.0
    elif mode is CuriosityRewardMode.POSITIVE:
        reward = np.zeros(spec.shape)
        reward[target] = 1.0
    else:
        reward = np.zeros(spec.shape)
    return reward


def value_iteration(
    spec: DomainSpec,
    target: GridPosition,
    mode: CuriosityRewardMode,
    gamma_curious: float,
    tolerance: float = DEFAULT_TOLERANCE,
) -> np.ndarray:
    """Solve ``V(s) = max_a [r(s) + gamma * V(next(s, a))]`` for a single target.

    Synchronous sweeps from an all-zero start, stopping once the largest
    per-cell change drops below ``tolerance``. The returned array is
    read-only and may be shared between callers.
    """
    if mode is CuriosityRewardMode.ABLATED:
        raise ValueError("ablated reward mode has no curiosity gradient to plan over")
    if not spec.contains(target):
        raise ValueError(f"target {target} outside grid")
    if not 0.0 <= gamma_curious < 1.0:
        raise ValueError(f"gamma_curious must lie in [0, 1), got {gamma_curious}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    return _solve(spec, GridPosition(*target), mode, float(gamma_curious), float(tolerance))


@lru_cache(maxsize=512)
def _solve(spec, target, mode, gamma, tolerance):
    succ = spec.successors
    reward = curiosity_reward(spec, target, mode).ravel()
    v = np.zeros(spec.n_cells)
    for _ in range(10 * spec.n_cells):
        new = reward + gamma * v[succ].max(axis=1)
        change = np.abs(new - v).max()
        v = new
        if change < tolerance:
            break
    else:
        raise PlannerError(
            f"value iteration did not converge within {10 * spec.n_cells} sweeps "
            f"(target={target}, mode={mode.value}, gamma={gamma})")
    field = v.reshape(spec.shape)
    field.flags.writeable = False
    return field


def greedy_actions(spec: DomainSpec, field: np.ndarray, pos: GridPosition) -> list[MoveAction]:
    """All actions whose successor cell has maximal value under ``field``."""
    succ = spec.successors[spec.index(pos)]
    vals = field.ravel()[succ]
    return [ACTIONS[k] for k in np.flatnonzero(vals == vals.max())]


def greedy_curious_action(
    spec: DomainSpec, field: np.ndarray, pos: GridPosition, rng: np.random.Generator
) -> MoveAction:
    """One-step lookahead greedy action; ties broken uniformly via ``rng``.

    A draw is taken from ``rng`` only when more than one action ties.
    """
    best = greedy_actions(spec, field, pos)
    if len(best) == 1:
        return best[0]
    return best[int(rng.integers(len(best)))]
