"""Grid-world rules for the pursuit game.

Coordinates are zero-based with the origin at the bottom-left corner:
``UP`` increases ``y``, ``RIGHT`` increases ``x``, and the board does not
wrap around. Captors move synchronously as a joint move; only the final
cells are checked, so two adjacent captors may swap places. The fugitive
is captured when every orthogonal neighbour cell is blocked by a wall or
a captor (staying put does not count as an escape).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

__all__ = [
    "MoveDir",
    "ALL_DIRS",
    "GridPos",
    "BoardConfig",
    "GameState",
    "JointMove",
    "IllegalReason",
    "MoveVerdict",
    "OutOfBoundsError",
    "IllegalMoveError",
    "apply_direction",
    "is_joint_move_legal",
    "apply_joint_move",
    "apply_fugitive_move",
    "is_captured",
    "fugitive_legal_moves",
    "random_fugitive_move",
]

# (dx, dy) per direction, indexed by MoveDir.value.
DIR_DELTAS: tuple[tuple[int, int], ...] = ((0, 1), (0, -1), (-1, 0), (1, 0), (0, 0))


class MoveDir(Enum):
    """The five legal directions.

    The index order is canonical: it is shared with the policy-network
    output units, one-hot training targets, and gene ordering.
    """

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4

    @property
    def delta(self) -> tuple[int, int]:
        return DIR_DELTAS[self.value]


ALL_DIRS: tuple[MoveDir, ...] = tuple(MoveDir)


class OutOfBoundsError(Exception):
    """A displacement would leave the board."""


class IllegalMoveError(Exception):
    """A joint move failed its legality check when applied."""


@dataclass(frozen=True)
class GridPos:
    """A board cell, zero-based."""

    x: int
    y: int

    def shifted(self, dx: int, dy: int) -> "GridPos":
        return GridPos(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class BoardConfig:
    """Board dimensions and captor count."""

    width: int = 8
    height: int = 8
    num_captors: int = 4

    def __post_init__(self) -> None:
        if self.width < 3:
            raise ValueError(f"board width must be at least 3 (got {self.width})")
        if self.height < 3:
            raise ValueError(f"board height must be at least 3 (got {self.height})")
        if self.num_captors < 2:
            raise ValueError(
                f"num_captors must be at least 2 (got {self.num_captors})"
            )
        if self.width * self.height <= self.num_captors + 1:
            raise ValueError(
                f"board {self.width}x{self.height} cannot hold "
                f"{self.num_captors} captors plus the fugitive with a free cell"
            )

    def in_bounds(self, pos: GridPos) -> bool:
        return 0 <= pos.x < self.width and 0 <= pos.y < self.height


@dataclass(frozen=True)
class GameState:
    """Positions of all captors and the fugitive plus the round counter."""

    captors: tuple[GridPos, ...]
    fugitive: GridPos
    turn: int = 0

    def validate(self, cfg: BoardConfig) -> None:
        """Raise ValueError unless every position is in bounds and distinct."""
        if len(self.captors) != cfg.num_captors:
            raise ValueError(
                f"expected {cfg.num_captors} captors, got {len(self.captors)}"
            )
        everyone = (*self.captors, self.fugitive)
        for pos in everyone:
            if not cfg.in_bounds(pos):
                raise ValueError(f"position {pos} out of bounds")
        if len(set(everyone)) != len(everyone):
            raise ValueError("positions must be pairwise distinct")
        if self.turn < 0:
            raise ValueError("turn counter must be non-negative")

    def with_next_turn(self) -> "GameState":
        return replace(self, turn=self.turn + 1)


@dataclass(frozen=True)
class JointMove:
    """One direction per captor, index-aligned with GameState.captors."""

    dirs: tuple[MoveDir, ...]


class IllegalReason(Enum):
    OUT_OF_BOUNDS = "OutOfBounds"
    COLLISION = "Collision"
    FUGITIVE_CELL = "FugitiveCell"
    NO_MOVEMENT = "NoMovement"


@dataclass(frozen=True)
class MoveVerdict:
    """Result of a joint-move legality check."""

    legal: bool
    reason: IllegalReason | None = None

    def __bool__(self) -> bool:
        return self.legal


_LEGAL = MoveVerdict(True, None)


def apply_direction(pos: GridPos, direction: MoveDir, cfg: BoardConfig) -> GridPos:
    """Displace ``pos`` one cell; STAY returns it unchanged.

    Raises OutOfBoundsError if the displaced cell leaves the board.
    """
    dx, dy = direction.delta
    dest = pos.shifted(dx, dy)
    if not cfg.in_bounds(dest):
        raise OutOfBoundsError(f"{direction.name} from {pos} leaves the board")
    return dest


def is_joint_move_legal(state: GameState, jm: JointMove, cfg: BoardConfig) -> MoveVerdict:
    """Check a synchronous joint move.

    Legal iff every target cell is in bounds, all target cells are pairwise
    distinct, no target cell is the fugitive's current cell, and at least
    one captor actually moves. Swaps are legal: only final cells count.
    """
    if len(jm.dirs) != len(state.captors):
        raise ValueError("joint move length does not match captor count")
    targets: list[GridPos] = []
    for pos, direction in zip(state.captors, jm.dirs):
        dx, dy = direction.delta
        dest = pos.shifted(dx, dy)
        if not cfg.in_bounds(dest):
            return MoveVerdict(False, IllegalReason.OUT_OF_BOUNDS)
        targets.append(dest)
    if len(set(targets)) != len(targets):
        return MoveVerdict(False, IllegalReason.COLLISION)
    if any(t == state.fugitive for t in targets):
        return MoveVerdict(False, IllegalReason.FUGITIVE_CELL)
    if all(d is MoveDir.STAY for d in jm.dirs):
        return MoveVerdict(False, IllegalReason.NO_MOVEMENT)
    return _LEGAL


def apply_joint_move(state: GameState, jm: JointMove, cfg: BoardConfig) -> GameState:
    """Displace all captors simultaneously; fugitive and turn unchanged."""
    verdict = is_joint_move_legal(state, jm, cfg)
    if not verdict:
        raise IllegalMoveError(f"illegal joint move: {verdict.reason.value}")
    moved = tuple(
        pos.shifted(*direction.delta)
        for pos, direction in zip(state.captors, jm.dirs)
    )
    return replace(state, captors=moved)


def is_captured(state: GameState, cfg: BoardConfig) -> bool:
    """True iff every orthogonal neighbour of the fugitive is wall or captor."""
    occupied = set(state.captors)
    for dx, dy in DIR_DELTAS[:4]:
        nb = state.fugitive.shifted(dx, dy)
        if cfg.in_bounds(nb) and nb not in occupied:
            return False
    return True


def fugitive_legal_moves(state: GameState, cfg: BoardConfig) -> list[MoveDir]:
    """Directions whose target is in bounds and free of captors; STAY always."""
    occupied = set(state.captors)
    moves: list[MoveDir] = []
    for direction in ALL_DIRS:
        if direction is MoveDir.STAY:
            moves.append(direction)
            continue
        dest = state.fugitive.shifted(*direction.delta)
        if cfg.in_bounds(dest) and dest not in occupied:
            moves.append(direction)
    return moves


def random_fugitive_move(
    state: GameState, cfg: BoardConfig, rng: np.random.Generator
) -> MoveDir:
    """Uniform draw over the fugitive's legal moves."""
    moves = fugitive_legal_moves(state, cfg)
    return moves[int(rng.integers(len(moves)))]


def apply_fugitive_move(state: GameState, direction: MoveDir, cfg: BoardConfig) -> GameState:
    """Move the fugitive one cell; captors and turn unchanged."""
    if direction not in fugitive_legal_moves(state, cfg):
        raise IllegalMoveError(f"illegal fugitive move {direction.name}")
    dest = state.fugitive.shifted(*direction.delta)
    return replace(state, fugitive=dest)
