"""The specific-curiosity agent: TD(0) with a temporary, target-directed value function.

One call to :func:`agent_step` runs one iteration of the agent loop:

1. induce curiosity if standing on the inducing cell (new target, new gradient);
2. act greedily on the curiosity gradient if curious, else epsilon-greedily on ``V``;
3. move (extrinsic reward is always zero);
4. TD update of ``V`` with the curiosity value folded into the error;
5. drop the target and its gradient once the agent lands on it.

The recognizer only fires for an agent that is not already curious, so a
live target is kept until it is reached. ``reinduce_while_curious`` restores
the alternative where every step on the inducing cell draws a fresh target.

Random draws within a step happen in a fixed order: target column (on
induction), then the epsilon test, then the action or tie-break index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from curiosim.gridworld import ACTIONS, DomainSpec, GridPosition, MoveAction, transition
from curiosim.planner import (
    DEFAULT_TOLERANCE,
    CuriosityRewardMode,
    greedy_curious_action,
    value_iteration,
    zeros_field,
)

VARIANTS = (
    "original",
    "ablate-directedness",
    "ablate-cessation",
    "ablate-voluntary",
    "ablate-aversive",
    "positive-quality",
)


class UnknownVariantError(ValueError):
    pass


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.01
    epsilon: float = 0.2
    gamma: float = 0.9
    gamma_curious: float = 0.9
    reward_mode: CuriosityRewardMode = CuriosityRewardMode.AVERSIVE
    ablate_directedness: bool = False
    ablate_cessation: bool = False
    ablate_voluntary: bool = False
    reinduce_while_curious: bool = False
    planner_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 <= self.gamma_curious < 1.0:
            raise ValueError(f"gamma_curious must lie in [0, 1), got {self.gamma_curious}")

    @classmethod
    def for_variant(cls, variant: str, **overrides) -> "AgentConfig":
        flags = {
            "original": {},
            "ablate-directedness": {"ablate_directedness": True},
            "ablate-cessation": {"ablate_cessation": True},
            "ablate-voluntary": {"ablate_voluntary": True},
            "ablate-aversive": {"reward_mode": CuriosityRewardMode.ABLATED},
            "positive-quality": {"reward_mode": CuriosityRewardMode.POSITIVE},
        }
        if variant not in flags:
            raise UnknownVariantError(
                f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
        return cls(**{**flags[variant], **overrides})

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "gamma_curious": self.gamma_curious,
            "reward_mode": self.reward_mode.value,
            "ablate_directedness": self.ablate_directedness,
            "ablate_cessation": self.ablate_cessation,
            "ablate_voluntary": self.ablate_voluntary,
            "reinduce_while_curious": self.reinduce_while_curious,
            "planner_tolerance": self.planner_tolerance,
        }


@dataclass
class Curiosity:
    target: GridPosition
    v_curious: np.ndarray
    visited: bool = False


@dataclass
class AgentState:
    v: np.ndarray
    pos: GridPosition
    curiosity: Optional[Curiosity] = None

    @classmethod
    def initial(cls, spec: DomainSpec, pos: Optional[GridPosition] = None) -> "AgentState":
        return cls(v=zeros_field(spec), pos=GridPosition(*(pos or spec.inducing_pos)))

    def curious_value(self, pos: GridPosition) -> float:
        if self.curiosity is None:
            return 0.0
        return float(self.curiosity.v_curious[pos])


@dataclass(frozen=True)
class StepTrace:
    t: int
    x: GridPosition
    action: MoveAction
    x_next: GridPosition
    delta: float
    induced: bool
    satisfied: bool
    # bookkeeping for the experiment harness
    first_visit: bool = False
    replaced_unvisited: bool = False


def maybe_induce(spec: DomainSpec, pos: GridPosition, rng: np.random.Generator) -> Optional[GridPosition]:
    if tuple(pos) != tuple(spec.inducing_pos):
        return None
    col = int(rng.integers(spec.target_col_min, spec.target_col_max + 1))
    return GridPosition(spec.target_row, col)


def _epsilon_greedy(spec: DomainSpec, v: np.ndarray, pos: GridPosition, epsilon: float,
                    rng: np.random.Generator) -> MoveAction:
    if rng.random() < epsilon:
        return ACTIONS[int(rng.integers(len(ACTIONS)))]
    vals = v.ravel()[spec.successors[spec.index(pos)]]
    best = np.flatnonzero(vals == vals.max())
    if len(best) == 1:
        return ACTIONS[best[0]]
    return ACTIONS[best[int(rng.integers(len(best)))]]


def select_action(spec: DomainSpec, state: AgentState, config: AgentConfig,
                  rng: np.random.Generator) -> MoveAction:
    if state.curiosity is not None and not config.ablate_directedness:
        return greedy_curious_action(spec, state.curiosity.v_curious, state.pos, rng)
    return _epsilon_greedy(spec, state.v, state.pos, config.epsilon, rng)


def td_update(state: AgentState, x: GridPosition, x_next: GridPosition,
              extrinsic_reward: float, config: AgentConfig) -> float:
    """Apply one TD(0) update to ``state.v`` at ``x`` and return the TD error.

    The aversive gradient is subtracted from the error and the positive one
    added, so both push ``V`` upward wherever the agent is curious.
    """
    v = state.v
    delta = extrinsic_reward + config.gamma * v[x_next] - v[x]
    if not config.ablate_voluntary:
        if config.reward_mode is CuriosityRewardMode.POSITIVE:
            delta += state.curious_value(x)
        else:
            delta -= state.curious_value(x)
    v[x] += config.alpha * delta
    return float(delta)


def agent_step(spec: DomainSpec, state: AgentState, config: AgentConfig,
               rng: np.random.Generator, t: int = 0) -> StepTrace:
    x = state.pos

    induced = False
    replaced_unvisited = False
    target = None
    if state.curiosity is None or config.reinduce_while_curious:
        target = maybe_induce(spec, x, rng)
    if target is not None:
        induced = True
        if state.curiosity is not None and not state.curiosity.visited:
            replaced_unvisited = True
        if config.reward_mode is CuriosityRewardMode.ABLATED:
            v_curious = zeros_field(spec)
        else:
            v_curious = value_iteration(spec, target, config.reward_mode,
                                        config.gamma_curious, config.planner_tolerance)
        state.curiosity = Curiosity(target, v_curious)

    action = select_action(spec, state, config, rng)
    x_next = transition(spec, x, action)
    delta = td_update(state, x, x_next, 0.0, config)

    satisfied = False
    first_visit = False
    cur = state.curiosity
    if cur is not None and x_next == cur.target:
        satisfied = True
        first_visit = not cur.visited
        cur.visited = True
        if not config.ablate_cessation:
            state.curiosity = None

    state.pos = x_next
    return StepTrace(t, x, action, x_next, delta, induced, satisfied,
                     first_visit, replaced_unvisited)
