"""Gridworld domains with upward-only movement and top-edge wrapping.

Coordinates are ``(row, col)``, 0-indexed, with row 0 at the top of the grid.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np


class GridPosition(NamedTuple):
    row: int
    col: int


class MoveAction(enum.Enum):
    LEFT = (0, -1)
    UP_LEFT = (-1, -1)
    UP = (-1, 0)
    UP_RIGHT = (-1, 1)
    RIGHT = (0, 1)
    STAY = (0, 0)

    @property
    def drow(self) -> int:
        return self.value[0]

    @property
    def dcol(self) -> int:
        return self.value[1]


# Fixed order; indices into this tuple are what the random stream selects.
ACTIONS: tuple[MoveAction, ...] = tuple(MoveAction)


@dataclass(frozen=True)
class JunctionTeleport:
    """Leaving the top edge drops the agent on a fixed bottom-row cell."""

    junction: GridPosition


@dataclass(frozen=True)
class Cylinder:
    """Leaving the top edge drops the agent on the bottom row, same column."""


TopEdgeRule = Union[JunctionTeleport, Cylinder]


class UnknownScenarioError(ValueError):
    pass


class UnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    rows: int
    cols: int
    top_edge: TopEdgeRule
    inducing_pos: GridPosition
    target_row: int
    target_col_min: int
    target_col_max: int

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError(f"grid must be non-empty, got {self.rows}x{self.cols}")
        if not self.contains(self.inducing_pos):
            raise ValueError(f"inducing position {self.inducing_pos} outside grid")
        if self.target_col_min > self.target_col_max:
            raise ValueError("target_col_min must not exceed target_col_max")
        if not (self.contains(GridPosition(self.target_row, self.target_col_min))
                and self.contains(GridPosition(self.target_row, self.target_col_max))):
            raise ValueError("target range lies outside grid")
        if self.is_target_cell(self.inducing_pos):
            raise ValueError("inducing position lies inside the target range")
        if isinstance(self.top_edge, JunctionTeleport):
            j = self.top_edge.junction
            if not self.contains(j) or j.row != self.rows - 1:
                raise ValueError(f"junction {j} must lie in the bottom row")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def contains(self, pos: GridPosition) -> bool:
        return 0 <= pos[0] < self.rows and 0 <= pos[1] < self.cols

    def is_target_cell(self, pos: GridPosition) -> bool:
        return pos[0] == self.target_row and self.target_col_min <= pos[1] <= self.target_col_max

    def target_cells(self) -> list[GridPosition]:
        return [GridPosition(self.target_row, c)
                for c in range(self.target_col_min, self.target_col_max + 1)]

    def index(self, pos: GridPosition) -> int:
        return pos[0] * self.cols + pos[1]

    def position(self, index: int) -> GridPosition:
        return GridPosition(*divmod(int(index), self.cols))

    @cached_property
    def successors(self) -> np.ndarray:
        """``(n_cells, 6)`` array of flat successor indices, columns in ``ACTIONS`` order."""
        table = np.empty((self.n_cells, len(ACTIONS)), dtype=np.intp)
        for r in range(self.rows):
            for c in range(self.cols):
                i = r * self.cols + c
                for k, a in enumerate(ACTIONS):
                    table[i, k] = self.index(transition(self, GridPosition(r, c), a))
        table.flags.writeable = False
        return table


def transition(spec: DomainSpec, pos: GridPosition, action: MoveAction) -> GridPosition:
    row, col = pos
    if action is MoveAction.STAY:
        return GridPosition(row, col)

    new_col = col + action.dcol
    if not 0 <= new_col < spec.cols:
        if action.drow == 0:
            # sideways into a wall: no movement
            return GridPosition(row, col)
        # diagonal into a wall: straight up instead
        new_col = col

    new_row = row + action.drow
    if new_row < 0:
        if isinstance(spec.top_edge, JunctionTeleport):
            return spec.top_edge.junction
        return GridPosition(spec.rows - 1, new_col)
    return GridPosition(new_row, new_col)


def distance_map(spec: DomainSpec, source: GridPosition) -> np.ndarray:
    """Breadth-first action counts from ``source`` to every cell (-1 if unreachable).

    Walks ``transition`` directly rather than the cached successor table so it
    can serve as an independent check on anything built from that table.
    """
    dist = np.full(spec.shape, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([GridPosition(*source)])
    while queue:
        here = queue.popleft()
        for action in ACTIONS:
            nxt = transition(spec, here, action)
            if dist[nxt] < 0:
                dist[nxt] = dist[here] + 1
                queue.append(nxt)
    return dist


def shortest_distance(spec: DomainSpec, source: GridPosition, dest: GridPosition) -> int:
    for p in (source, dest):
        if not spec.contains(p):
            raise ValueError(f"position {p} outside {spec.rows}x{spec.cols} grid")
    d = int(distance_map(spec, source)[dest])
    if d < 0:
        raise UnreachableError(f"{dest} is unreachable from {source}")
    return d


SCENARIOS = ("primary", "wide", "wide_no_junction", "tall_low", "tall_mid")


def make_scenario(name: str) -> DomainSpec:
    if name == "primary":
        return DomainSpec(11, 11, JunctionTeleport(GridPosition(10, 5)), GridPosition(5, 5), 1, 1, 9)
    if name == "wide":
        return DomainSpec(11, 101, JunctionTeleport(GridPosition(10, 50)), GridPosition(5, 50), 1, 1, 99)
    if name == "wide_no_junction":
        return DomainSpec(11, 101, Cylinder(), GridPosition(5, 50), 1, 1, 99)
    if name == "tall_low":
        return DomainSpec(101, 11, JunctionTeleport(GridPosition(100, 5)), GridPosition(95, 5), 1, 1, 9)
    if name == "tall_mid":
        return DomainSpec(101, 11, JunctionTeleport(GridPosition(100, 5)), GridPosition(50, 5), 1, 1, 9)
    raise UnknownScenarioError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
