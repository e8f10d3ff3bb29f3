"""Per-captor network input encoding and one-hot move targets.

A captor sees the board as signed relative offsets ``other - self``: the
other captors first, ordered by increasing Euclidean distance (ties broken
lexicographically by ``(dx, dy)``), then the fugitive as the last pair.
Offsets are normalised by ``width - 1`` / ``height - 1`` so every feature
lies in ``[-1, 1]`` and the encoding is invariant under board translation.
"""

from __future__ import annotations

import numpy as np

from .game import BoardConfig, GameState, MoveDir

N_OUTPUTS = 5


def feature_length(cfg: BoardConfig) -> int:
    """Two offsets per other captor plus two for the fugitive."""
    return 2 * (cfg.num_captors - 1) + 2


def encode_state(state: GameState, self_index: int, cfg: BoardConfig) -> np.ndarray:
    """Build captor ``self_index``'s feature vector for the current board."""
    if not 0 <= self_index < cfg.num_captors:
        raise IndexError(f"captor index {self_index} out of range")
    me = state.captors[self_index]
    offsets = [
        (other.x - me.x, other.y - me.y)
        for j, other in enumerate(state.captors)
        if j != self_index
    ]
    offsets.sort(key=lambda d: (d[0] * d[0] + d[1] * d[1], d[0], d[1]))
    offsets.append((state.fugitive.x - me.x, state.fugitive.y - me.y))

    values = np.empty(2 * len(offsets), dtype=np.float64)
    for k, (dx, dy) in enumerate(offsets):
        values[2 * k] = dx / (cfg.width - 1)
        values[2 * k + 1] = dy / (cfg.height - 1)
    return values


def target_vector(direction: MoveDir) -> np.ndarray:
    """One-hot vector over the canonical direction order."""
    target = np.zeros(N_OUTPUTS, dtype=np.float64)
    target[direction.value] = 1.0
    return target
