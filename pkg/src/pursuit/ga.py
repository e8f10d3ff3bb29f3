"""The global solver: a genetic algorithm over joint captor moves.

A chromosome is one direction gene per captor. Lower scores are better:
a legal move scores the summed Euclidean captor-fugitive distance after
the move; an illegal chromosome scores the pre-move sum multiplied by a
large penalty factor, and a capturing move scores the post-move sum
multiplied by a small reward factor, so wins always rank strictly below
any legal non-win and every illegal combination ranks above all legal
ones. An exhaustive enumerator over all ``5^M`` chromosomes doubles as
the correctness oracle and as the fallback when the GA never samples a
legal move.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .game import (
    ALL_DIRS,
    DIR_DELTAS,
    BoardConfig,
    GameState,
    JointMove,
    MoveDir,
    apply_joint_move,
    is_captured,
    is_joint_move_legal,
)

__all__ = [
    "Chromosome",
    "GAConfig",
    "NoLegalMoveError",
    "distance_sum",
    "evaluate_chromosome",
    "evaluate_genes",
    "exhaustive_solve",
    "ga_solve",
]

# A chromosome is laid out exactly like a joint move: one gene per captor.
Chromosome = JointMove

_DELTAS = np.asarray(DIR_DELTAS, dtype=np.int64)
_N_DIRS = len(ALL_DIRS)
_STAY = MoveDir.STAY.value


class NoLegalMoveError(Exception):
    """No legal joint move exists in this position."""


@dataclass(frozen=True)
class GAConfig:
    """Solver hyperparameters plus the penalty/reward shaping factors."""

    population_size: int = 50
    generations: int = 30
    crossover_prob: float = 0.8
    mutation_prob_per_gene: float = 0.05
    tournament_size: int = 3
    elite_count: int = 1
    penalty_factor: float = 1000.0
    win_factor: float = 0.001

    def __post_init__(self) -> None:
        if self.population_size < self.elite_count + 2:
            raise ValueError("population_size must be at least elite_count + 2")
        for name in ("crossover_prob", "mutation_prob_per_gene"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1] (got {p})")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        if self.elite_count < 0:
            raise ValueError("elite_count must be non-negative")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if self.penalty_factor <= 1.0:
            raise ValueError("penalty_factor must exceed 1")
        if not 0.0 < self.win_factor < 1.0:
            raise ValueError("win_factor must be strictly between 0 and 1")


def distance_sum(state: GameState) -> float:
    """Summed Euclidean distance of every captor from the fugitive."""
    fx, fy = state.fugitive.x, state.fugitive.y
    return sum(
        math.sqrt((c.x - fx) ** 2 + (c.y - fy) ** 2) for c in state.captors
    )


def evaluate_chromosome(
    state: GameState, chromosome: Chromosome, cfg: BoardConfig, ga: GAConfig
) -> float:
    """Score one chromosome; lower is better.

    Illegal chromosomes are scored on the pre-move state so no off-board
    position is ever evaluated.
    """
    if not is_joint_move_legal(state, chromosome, cfg):
        return distance_sum(state) * ga.penalty_factor
    after = apply_joint_move(state, chromosome, cfg)
    score = distance_sum(after)
    if is_captured(after, cfg):
        return score * ga.win_factor
    return score


def evaluate_genes(
    state: GameState, genes: np.ndarray, cfg: BoardConfig, ga: GAConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised scorer for a whole population at once.

    ``genes`` is an integer array of shape (K, num_captors) holding
    direction indices. Returns (scores, legal, winning) arrays of length K
    matching evaluate_chromosome row by row.
    """
    genes = np.asarray(genes, dtype=np.int64)
    k, m = genes.shape
    if m != cfg.num_captors:
        raise ValueError("gene rows must have one direction per captor")
    starts = np.asarray([(c.x, c.y) for c in state.captors], dtype=np.int64)
    targets = starts[np.newaxis, :, :] + _DELTAS[genes]  # (K, M, 2)

    in_bounds = (
        (targets[:, :, 0] >= 0)
        & (targets[:, :, 0] < cfg.width)
        & (targets[:, :, 1] >= 0)
        & (targets[:, :, 1] < cfg.height)
    ).all(axis=1)

    # Cell ids are unique for in-bounds cells; out-of-bounds rows are
    # already illegal so any aliasing there is irrelevant.
    ids = targets[:, :, 0] * cfg.height + targets[:, :, 1]
    sorted_ids = np.sort(ids, axis=1)
    distinct = (np.diff(sorted_ids, axis=1) != 0).all(axis=1)

    fug = state.fugitive
    fug_id = fug.x * cfg.height + fug.y
    off_fugitive = (ids != fug_id).all(axis=1)
    moves = (genes != _STAY).any(axis=1)
    legal = in_bounds & distinct & off_fugitive & moves

    diffs = (targets - np.asarray([fug.x, fug.y], dtype=np.int64)).astype(np.float64)
    post_sum = np.sqrt((diffs * diffs).sum(axis=2)).sum(axis=1)

    winning = legal.copy()
    for dx, dy in DIR_DELTAS[:4]:
        nx, ny = fug.x + dx, fug.y + dy
        if 0 <= nx < cfg.width and 0 <= ny < cfg.height:
            winning &= (ids == nx * cfg.height + ny).any(axis=1)

    pre_sum = distance_sum(state)
    scores = np.where(
        legal,
        np.where(winning, post_sum * ga.win_factor, post_sum),
        pre_sum * ga.penalty_factor,
    )
    return scores, legal, winning


def _to_move(genes: np.ndarray) -> Chromosome:
    return JointMove(tuple(ALL_DIRS[int(g)] for g in genes))


def all_chromosomes(num_captors: int) -> np.ndarray:
    """Every gene combination, in lexicographic order by direction index."""
    return np.asarray(
        list(itertools.product(range(_N_DIRS), repeat=num_captors)), dtype=np.int64
    )


def exhaustive_solve(
    state: GameState, cfg: BoardConfig, ga: GAConfig
) -> tuple[Chromosome, float]:
    """Enumerate all 5^M chromosomes; return the best legal one.

    Ties are broken by lexicographic gene order. Raises NoLegalMoveError
    if no legal chromosome exists.
    """
    genes = all_chromosomes(cfg.num_captors)
    scores, legal, _ = evaluate_genes(state, genes, cfg, ga)
    if not legal.any():
        raise NoLegalMoveError("no legal joint move exists")
    masked = np.where(legal, scores, np.inf)
    best = int(np.argmin(masked))
    return _to_move(genes[best]), float(masked[best])


def _next_generation(
    pop: np.ndarray, scores: np.ndarray, ga: GAConfig, rng: np.random.Generator
) -> np.ndarray:
    """Tournament selection, uniform crossover, per-gene mutation, elitism."""
    size, m = pop.shape
    elite_idx = np.argsort(scores, kind="stable")[: ga.elite_count]
    n_offspring = size - ga.elite_count
    n_pairs = (n_offspring + 1) // 2

    entrants = rng.integers(0, size, size=(n_pairs, 2, ga.tournament_size))
    winners = np.argmin(scores[entrants], axis=2)
    parent_idx = np.take_along_axis(entrants, winners[:, :, np.newaxis], axis=2)[:, :, 0]
    p1 = pop[parent_idx[:, 0]]
    p2 = pop[parent_idx[:, 1]]

    do_cross = (rng.random(n_pairs) < ga.crossover_prob)[:, np.newaxis]
    swap = rng.random((n_pairs, m)) < 0.5
    take_other = do_cross & swap
    child1 = np.where(take_other, p2, p1)
    child2 = np.where(take_other, p1, p2)
    children = np.concatenate([child1, child2])[:n_offspring]

    mutate = rng.random(children.shape) < ga.mutation_prob_per_gene
    replacements = rng.integers(0, _N_DIRS, size=children.shape)
    children = np.where(mutate, replacements, children)

    return np.concatenate([pop[elite_idx], children])


def ga_solve(
    state: GameState, cfg: BoardConfig, ga: GAConfig, rng: np.random.Generator
) -> tuple[Chromosome, float]:
    """Evolve a joint move; returns the best-ever legal chromosome.

    Falls back to the exhaustive enumerator if no legal chromosome is
    ever sampled. Deterministic given the generator state.
    """
    pop = rng.integers(0, _N_DIRS, size=(ga.population_size, cfg.num_captors))
    best_genes: np.ndarray | None = None
    best_score = math.inf

    for generation in range(ga.generations + 1):
        scores, legal, _winning = evaluate_genes(state, pop, cfg, ga)
        if legal.any():
            masked = np.where(legal, scores, np.inf)
            contender = int(np.argmin(masked))
            if masked[contender] < best_score:
                best_score = float(masked[contender])
                best_genes = pop[contender].copy()
        if generation < ga.generations:
            pop = _next_generation(pop, scores, ga, rng)

    if best_genes is None:
        return exhaustive_solve(state, cfg, ga)
    return _to_move(best_genes), best_score
