"""The hybrid control loop tying the swarm policies to the global solver.

Every captor round, each captor's network proposes from its local view.
If all proposals are unambiguous singles and the combined joint move is
legal it is played as a swarm move; otherwise the GA solver is invoked,
its chromosome is played, and one demonstration (features, one-hot gene)
per captor is appended to the training store. After every game each
captor retrains from scratch on everything it has accumulated, so over a
session control shifts from the solver to the swarm.

Threshold semantics for proposals: a direction is active when its output
strictly exceeds 0.5. A freshly zero-initialised network emits exactly
0.5 everywhere, so it proposes nothing and the solver drives the early
games. The alternative ``argmax`` mode always yields a single direction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .encoding import encode_state, feature_length, target_vector
from .ga import GAConfig, NoLegalMoveError, distance_sum, ga_solve
from .game import (
    ALL_DIRS,
    BoardConfig,
    GameState,
    GridPos,
    JointMove,
    MoveDir,
    apply_fugitive_move,
    apply_joint_move,
    fugitive_legal_moves,
    is_captured,
    is_joint_move_legal,
    random_fugitive_move,
)
from .neural import MLPParams, forward, hidden_units_for, train, zero_mlp

__all__ = [
    "MoveSource",
    "Outcome",
    "AgentProposal",
    "TrainingExample",
    "TrainingStore",
    "GameRecord",
    "RoundLog",
    "GameLog",
    "SessionSinks",
    "propose",
    "captor_turn",
    "initial_state",
    "play_game",
    "run_session",
    "fresh_agents",
]

PROPOSAL_THRESHOLD = 0.5
DEFAULT_MAX_TURNS = 500
FUGITIVE_PLACEMENT_CANDIDATES = 10


class MoveSource(Enum):
    SWARM = "Swarm"
    GLOBAL = "Global"


class Outcome(Enum):
    CAPTURED = "Captured"
    TIMEOUT = "Timeout"
    STALEMATE = "Stalemate"


@dataclass(frozen=True)
class AgentProposal:
    """The set of directions a captor's network activated.

    Empty means no proposal, one element is a usable single, two or more
    is an ambiguous multi-direction proposal.
    """

    active: tuple[MoveDir, ...]

    @property
    def is_single(self) -> bool:
        return len(self.active) == 1

    @property
    def is_ambiguous(self) -> bool:
        return len(self.active) >= 2

    @property
    def is_none(self) -> bool:
        return len(self.active) == 0

    @property
    def single(self) -> MoveDir | None:
        return self.active[0] if self.is_single else None


@dataclass
class TrainingExample:
    """One demonstration from the global solver for one captor."""

    features: np.ndarray
    target: np.ndarray
    game_id: int
    turn: int
    captor_index: int


class TrainingStore:
    """Append-only per-captor demonstration log."""

    def __init__(self, num_captors: int) -> None:
        self._by_captor: list[list[TrainingExample]] = [[] for _ in range(num_captors)]

    def add(self, example: TrainingExample) -> None:
        self._by_captor[example.captor_index].append(example)

    def count(self, captor_index: int) -> int:
        return len(self._by_captor[captor_index])

    def counts(self) -> tuple[int, ...]:
        return tuple(len(rows) for rows in self._by_captor)

    def examples(self, captor_index: int) -> list[TrainingExample]:
        return list(self._by_captor[captor_index])

    def arrays(self, captor_index: int) -> tuple[np.ndarray, np.ndarray]:
        """Stack one captor's examples into (features, targets) matrices."""
        rows = self._by_captor[captor_index]
        if not rows:
            raise ValueError(f"captor {captor_index} has no examples")
        features = np.stack([ex.features for ex in rows])
        targets = np.stack([ex.target for ex in rows])
        return features, targets

    def tail(self, captor_index: int, start: int) -> list[TrainingExample]:
        return self._by_captor[captor_index][start:]


@dataclass(frozen=True)
class GameRecord:
    """Per-game outcome and move-source log."""

    game_id: int
    outcome: Outcome
    turns: int
    sources: tuple[MoveSource, ...]
    swarm_fraction: float


@dataclass
class RoundLog:
    """One completed round: the joint captor move and the fugitive reply."""

    turn: int
    source: MoveSource
    captor_dirs: tuple[MoveDir, ...]
    fugitive_dir: MoveDir | None


@dataclass
class GameLog:
    """Everything needed to replay a game move by move."""

    game_id: int
    width: int
    height: int
    num_captors: int
    captors_start: tuple[GridPos, ...]
    fugitive_start: GridPos
    rounds: list[RoundLog]
    outcome: Outcome
    turns: int


@dataclass
class SessionSinks:
    """Optional callbacks fed while a session runs; flushed once per game."""

    on_record: Callable[[GameRecord, tuple[int, ...], float], None] | None = None
    on_example: Callable[[TrainingExample], None] | None = None
    on_game_log: Callable[[GameLog], None] | None = None
    flush: Callable[[], None] | None = None


def propose(params: MLPParams, features: np.ndarray, mode: str = "strict") -> AgentProposal:
    """Run one captor's network and threshold its five outputs."""
    outputs = forward(params, features)
    if mode == "argmax":
        active: tuple[MoveDir, ...] = (ALL_DIRS[int(np.argmax(outputs))],)
    elif mode == "strict":
        active = tuple(d for d in ALL_DIRS if outputs[d.value] > PROPOSAL_THRESHOLD)
    else:
        raise ValueError(f"unknown proposal mode {mode!r}")
    return AgentProposal(active)


def captor_turn(
    state: GameState,
    agents: list[MLPParams],
    ga: GAConfig,
    cfg: BoardConfig,
    rng: np.random.Generator,
    store: TrainingStore,
    game_id: int = 0,
    mode: str = "strict",
    swarm_enabled: bool = True,
) -> tuple[JointMove, MoveSource]:
    """Decide one captor round: swarm if possible, otherwise the solver.

    On a solver round one demonstration per captor is appended to the
    store. Raises NoLegalMoveError if not even the solver can move.
    """
    features = [encode_state(state, i, cfg) for i in range(cfg.num_captors)]
    if swarm_enabled:
        proposals = [
            propose(agents[i], features[i], mode) for i in range(cfg.num_captors)
        ]
        if all(p.is_single for p in proposals):
            move = JointMove(tuple(p.single for p in proposals))
            if is_joint_move_legal(state, move, cfg):
                return move, MoveSource.SWARM
    move, _score = ga_solve(state, cfg, ga, rng)
    for i in range(cfg.num_captors):
        store.add(
            TrainingExample(
                features=features[i],
                target=target_vector(move.dirs[i]),
                game_id=game_id,
                turn=state.turn,
                captor_index=i,
            )
        )
    return move, MoveSource.GLOBAL


def initial_state(cfg: BoardConfig, rng: np.random.Generator) -> GameState:
    """Random distinct placement; the fugitive takes the most distant of
    ten candidate cells so games never open already captured."""
    n_cells = cfg.width * cfg.height
    for _ in range(100):
        order = rng.permutation(n_cells)
        captors = tuple(
            GridPos(int(c) % cfg.width, int(c) // cfg.width)
            for c in order[: cfg.num_captors]
        )
        candidates = order[cfg.num_captors : cfg.num_captors + FUGITIVE_PLACEMENT_CANDIDATES]
        best_cell: GridPos | None = None
        best_sum = -1.0
        for c in candidates:
            cell = GridPos(int(c) % cfg.width, int(c) // cfg.width)
            total = distance_sum(GameState(captors, cell))
            if total > best_sum:
                best_sum = total
                best_cell = cell
        state = GameState(captors, best_cell, turn=0)
        if not is_captured(state, cfg):
            return state
    raise RuntimeError("failed to place a non-captured opening position")


def play_game(
    cfg: BoardConfig,
    agents: list[MLPParams],
    ga: GAConfig,
    rng: np.random.Generator,
    store: TrainingStore,
    max_turns: int = DEFAULT_MAX_TURNS,
    game_id: int = 1,
    mode: str = "strict",
    swarm_enabled: bool = True,
    initial: GameState | None = None,
) -> tuple[GameRecord, GameLog]:
    """Play one game to its terminal outcome.

    Each round: captors move (swarm or solver), capture is checked, then
    the fugitive moves randomly and capture is checked again. Ends on
    capture, the round cap, or a stalemate when no legal joint move
    exists; a stalemate round still counts as a solver turn.
    """
    if max_turns < 1:
        raise ValueError("max_turns must be at least 1")
    state = initial if initial is not None else initial_state(cfg, rng)
    state.validate(cfg)
    if is_captured(state, cfg):
        raise ValueError("initial position is already captured")

    sources: list[MoveSource] = []
    rounds: list[RoundLog] = []
    start = state
    outcome: Outcome | None = None

    for _ in range(max_turns):
        try:
            move, source = captor_turn(
                state, agents, ga, cfg, rng, store, game_id, mode, swarm_enabled
            )
        except NoLegalMoveError:
            sources.append(MoveSource.GLOBAL)
            outcome = Outcome.STALEMATE
            break
        state = apply_joint_move(state, move, cfg)
        sources.append(source)
        entry = RoundLog(state.turn, source, move.dirs, None)
        rounds.append(entry)
        if is_captured(state, cfg):
            outcome = Outcome.CAPTURED
            break
        fdir = random_fugitive_move(state, cfg, rng)
        entry.fugitive_dir = fdir
        state = apply_fugitive_move(state, fdir, cfg)
        if is_captured(state, cfg):
            outcome = Outcome.CAPTURED
            break
        state = state.with_next_turn()

    if outcome is None:
        outcome = Outcome.TIMEOUT
    turns = len(sources)
    record = GameRecord(
        game_id=game_id,
        outcome=outcome,
        turns=turns,
        sources=tuple(sources),
        swarm_fraction=sources.count(MoveSource.SWARM) / turns,
    )
    log = GameLog(
        game_id=game_id,
        width=cfg.width,
        height=cfg.height,
        num_captors=cfg.num_captors,
        captors_start=start.captors,
        fugitive_start=start.fugitive,
        rounds=rounds,
        outcome=outcome,
        turns=turns,
    )
    return record, log


def fresh_agents(cfg: BoardConfig) -> list[MLPParams]:
    """Zero-initialised policies: every output 0.5, so no proposals."""
    dim = feature_length(cfg)
    return [zero_mlp(dim, hidden_units_for(0)) for _ in range(cfg.num_captors)]


def run_session(
    cfg: BoardConfig,
    ga: GAConfig,
    n_games: int,
    seed: int,
    sinks: SessionSinks | None = None,
    max_turns: int = DEFAULT_MAX_TURNS,
    mode: str = "strict",
    swarm_enabled: bool = True,
) -> list[GameRecord]:
    """Play ``n_games`` sequentially, retraining every captor after each game.

    A captor with no demonstrations yet keeps its zero network. With
    ``swarm_enabled=False`` the solver plays every move and retraining is
    skipped (the networks would never be consulted).
    """
    if n_games < 1:
        raise ValueError("n_games must be at least 1")
    rng = np.random.default_rng(seed)
    agents = fresh_agents(cfg)
    store = TrainingStore(cfg.num_captors)
    records: list[GameRecord] = []

    for game_id in range(1, n_games + 1):
        before = store.counts()
        t0 = time.perf_counter()
        record, log = play_game(
            cfg,
            agents,
            ga,
            rng,
            store,
            max_turns=max_turns,
            game_id=game_id,
            mode=mode,
            swarm_enabled=swarm_enabled,
        )
        wall_ms = (time.perf_counter() - t0) * 1000.0
        records.append(record)

        if sinks is not None:
            if sinks.on_example is not None:
                for i in range(cfg.num_captors):
                    for example in store.tail(i, before[i]):
                        sinks.on_example(example)
            if sinks.on_game_log is not None:
                sinks.on_game_log(log)
            if sinks.on_record is not None:
                sinks.on_record(record, store.counts(), wall_ms)
            if sinks.flush is not None:
                sinks.flush()

        if swarm_enabled:
            for i in range(cfg.num_captors):
                if store.count(i) > 0:
                    features, targets = store.arrays(i)
                    agents[i] = train(features, targets, rng)
    return records
