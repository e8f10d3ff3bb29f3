"""Command-line experiment harness.

Subcommands:
  run     play a session and persist metrics CSV, per-captor training
          JSON-lines, and per-game move logs
  stats   summarise a metrics CSV (capture rate, turn mean, swarm trend)
  replay  re-render a logged game, re-validating every move

All randomness flows from --seed; apart from the wall_time_ms column the
persisted outputs are byte-identical across runs with the same config.
Log verbosity comes from PURSUIT_LOG_LEVEL (error, info, debug).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, fields, replace

from .controller import (
    GameLog,
    GameRecord,
    Outcome,
    RoundLog,
    SessionSinks,
    TrainingExample,
    run_session,
)
from .ga import GAConfig
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
)

logger = logging.getLogger("pursuit")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

_OUTCOME_NAMES = {o.value for o in Outcome}


class ConfigError(ValueError):
    """Invalid flag or configuration value."""


class ReplayError(Exception):
    """A logged move failed re-validation."""

    def __init__(self, turn: int, message: str) -> None:
        super().__init__(f"turn {turn}: {message}")
        self.turn = turn


@dataclass
class ExperimentConfig:
    """Flat session configuration; the config file mirrors these names."""

    width: int = 8
    height: int = 8
    num_captors: int = 4
    games: int = 100
    seed: int = 0
    max_turns: int = 500
    population_size: int = 50
    generations: int = 30
    crossover_prob: float = 0.8
    mutation_prob_per_gene: float = 0.05
    tournament_size: int = 3
    elite_count: int = 1
    penalty_factor: float = 1000.0
    win_factor: float = 0.001
    mode: str = "strict"
    ga_only: bool = False
    out: str = "metrics.csv"
    train_log: str = "train_log"
    render: bool = False

    def board(self) -> BoardConfig:
        return BoardConfig(self.width, self.height, self.num_captors)

    def ga(self) -> GAConfig:
        return GAConfig(
            population_size=self.population_size,
            generations=self.generations,
            crossover_prob=self.crossover_prob,
            mutation_prob_per_gene=self.mutation_prob_per_gene,
            tournament_size=self.tournament_size,
            elite_count=self.elite_count,
            penalty_factor=self.penalty_factor,
            win_factor=self.win_factor,
        )

    def validate(self) -> None:
        try:
            self.board()
            self.ga()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.games < 1:
            raise ConfigError(f"games must be positive (got {self.games})")
        if self.max_turns < 1:
            raise ConfigError(f"max-turns must be positive (got {self.max_turns})")
        if self.mode not in ("strict", "argmax"):
            raise ConfigError(f"mode must be strict or argmax (got {self.mode!r})")
        if not self.out:
            raise ConfigError("metrics output path must be non-empty")
        if not self.train_log:
            raise ConfigError("train-log directory must be non-empty")


def _config_from_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    return data


def _parse_board(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"board must look like WxH (got {text!r})")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"board must look like WxH (got {text!r})") from exc
    return width, height


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config file, and explicit flags (flags win)."""
    cfg = ExperimentConfig()
    if args.config:
        cfg = replace(cfg, **_config_from_file(args.config))
    overrides: dict = {}
    if args.board is not None:
        overrides["width"], overrides["height"] = _parse_board(args.board)
    for flag, name in (
        ("games", "games"),
        ("seed", "seed"),
        ("max_turns", "max_turns"),
        ("out", "out"),
        ("train_log", "train_log"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[name] = value
    if args.argmax:
        overrides["mode"] = "argmax"
    if args.render:
        overrides["render"] = True
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# rendering


def render_board(state: GameState, cfg: BoardConfig) -> str:
    """ASCII board: captors '*', fugitive 'o', empty '.'; top row printed first."""
    grid = [["." for _ in range(cfg.width)] for _ in range(cfg.height)]
    for c in state.captors:
        grid[c.y][c.x] = "*"
    grid[state.fugitive.y][state.fugitive.x] = "o"
    return "\n".join(" ".join(grid[y]) for y in range(cfg.height - 1, -1, -1))


# ---------------------------------------------------------------------------
# move-log serialisation and replay


def game_log_to_json(log: GameLog) -> dict:
    return {
        "game_id": log.game_id,
        "width": log.width,
        "height": log.height,
        "num_captors": log.num_captors,
        "captors_start": [[p.x, p.y] for p in log.captors_start],
        "fugitive_start": [log.fugitive_start.x, log.fugitive_start.y],
        "outcome": log.outcome.value,
        "turns": log.turns,
        "rounds": [
            {
                "turn": r.turn,
                "source": r.source.value,
                "captor_dirs": [d.value for d in r.captor_dirs],
                "fugitive_dir": None if r.fugitive_dir is None else r.fugitive_dir.value,
            }
            for r in log.rounds
        ],
    }


def _dir_from_index(value: object, turn: int) -> MoveDir:
    if not isinstance(value, int) or not 0 <= value < len(ALL_DIRS):
        raise ReplayError(turn, f"invalid direction index {value!r}")
    return ALL_DIRS[value]


def replay_game_log(entry: dict, out=None) -> None:
    """Re-run one logged game, validating every move; render if ``out``.

    Raises ReplayError at the first move that fails legality or when the
    final outcome does not match the log.
    """
    cfg = BoardConfig(entry["width"], entry["height"], entry["num_captors"])
    state = GameState(
        captors=tuple(GridPos(int(x), int(y)) for x, y in entry["captors_start"]),
        fugitive=GridPos(*[int(v) for v in entry["fugitive_start"]]),
    )
    state.validate(cfg)
    if out:
        print(f"game {entry['game_id']} opening position", file=out)
        print(render_board(state, cfg), file=out)
    captured = False
    for row in entry["rounds"]:
        turn = int(row["turn"])
        if captured:
            raise ReplayError(turn, "moves recorded after capture")
        dirs = tuple(_dir_from_index(v, turn) for v in row["captor_dirs"])
        move = JointMove(dirs)
        verdict = is_joint_move_legal(state, move, cfg)
        if not verdict:
            raise ReplayError(turn, f"illegal joint move ({verdict.reason.value})")
        state = apply_joint_move(state, move, cfg)
        if is_captured(state, cfg):
            if row["fugitive_dir"] is not None:
                raise ReplayError(turn, "fugitive moved after capture")
            captured = True
        elif row["fugitive_dir"] is None:
            raise ReplayError(turn, "missing fugitive move in a non-terminal round")
        else:
            fdir = _dir_from_index(row["fugitive_dir"], turn)
            if fdir not in fugitive_legal_moves(state, cfg):
                raise ReplayError(turn, f"illegal fugitive move {fdir.name}")
            state = apply_fugitive_move(state, fdir, cfg)
            if is_captured(state, cfg):
                captured = True
            state = state.with_next_turn()
        if out:
            moves = ",".join(d.name for d in dirs)
            fug = row["fugitive_dir"]
            fug_name = "-" if fug is None else ALL_DIRS[fug].name
            print(
                f"turn {turn} [{row['source']}] captors {moves} fugitive {fug_name}",
                file=out,
            )
            print(render_board(state, cfg), file=out)

    outcome = entry["outcome"]
    last_turn = int(entry["rounds"][-1]["turn"]) if entry["rounds"] else 0
    if captured != (outcome == Outcome.CAPTURED.value):
        raise ReplayError(last_turn, f"recorded outcome {outcome} does not match replay")
    expected_rounds = entry["turns"] - (1 if outcome == Outcome.STALEMATE.value else 0)
    if len(entry["rounds"]) != expected_rounds:
        raise ReplayError(last_turn, "round count does not match recorded turns")
    if out:
        print(f"outcome {outcome} after {entry['turns']} turns", file=out)


# ---------------------------------------------------------------------------
# run


def metrics_header(num_captors: int) -> list[str]:
    return (
        ["game_id", "outcome", "turns", "swarm_fraction"]
        + [f"examples_c{i}" for i in range(num_captors)]
        + ["wall_time_ms"]
    )


class _RunWriters:
    """File sinks for one session; flushed after every game."""

    def __init__(self, cfg: ExperimentConfig) -> None:
        out_dir = os.path.dirname(os.path.abspath(cfg.out))
        os.makedirs(out_dir, exist_ok=True)
        os.makedirs(cfg.train_log, exist_ok=True)
        self._cfg = cfg
        self._board = cfg.board()
        self._metrics_file = open(cfg.out, "w", encoding="utf-8", newline="")
        self._metrics = csv.writer(self._metrics_file, lineterminator="\n")
        self._metrics.writerow(metrics_header(cfg.num_captors))
        self._captor_files = [
            open(os.path.join(cfg.train_log, f"captor_{i}.jsonl"), "w", encoding="utf-8")
            for i in range(cfg.num_captors)
        ]
        self._moves_file = open(
            os.path.join(cfg.train_log, "moves.jsonl"), "w", encoding="utf-8"
        )

    def sinks(self) -> SessionSinks:
        return SessionSinks(
            on_record=self.write_record,
            on_example=self.write_example,
            on_game_log=self.write_game_log,
            flush=self.flush,
        )

    def write_record(
        self, record: GameRecord, cumulative: tuple[int, ...], wall_ms: float
    ) -> None:
        self._metrics.writerow(
            [
                record.game_id,
                record.outcome.value,
                record.turns,
                repr(record.swarm_fraction),
                *cumulative,
                int(round(wall_ms)),
            ]
        )
        logger.debug(
            "game %d: %s in %d turns (swarm %.3f)",
            record.game_id,
            record.outcome.value,
            record.turns,
            record.swarm_fraction,
        )

    def write_example(self, example: TrainingExample) -> None:
        line = json.dumps(
            {
                "game_id": example.game_id,
                "turn": example.turn,
                "captor": example.captor_index,
                "features": example.features.tolist(),
                "target_dir": int(example.target.argmax()),
            }
        )
        self._captor_files[example.captor_index].write(line + "\n")

    def write_game_log(self, log: GameLog) -> None:
        self._moves_file.write(json.dumps(game_log_to_json(log)) + "\n")
        if self._cfg.render:
            replay_game_log(game_log_to_json(log), out=sys.stdout)

    def flush(self) -> None:
        self._metrics_file.flush()
        for fh in self._captor_files:
            fh.flush()
        self._moves_file.flush()

    def close(self) -> None:
        self._metrics_file.close()
        for fh in self._captor_files:
            fh.close()
        self._moves_file.close()


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    writers = _RunWriters(cfg)
    logger.info(
        "session: %d games on %dx%d, %d captors, seed %d%s",
        cfg.games,
        cfg.width,
        cfg.height,
        cfg.num_captors,
        cfg.seed,
        " (ga-only)" if cfg.ga_only else "",
    )
    try:
        records = run_session(
            cfg.board(),
            cfg.ga(),
            cfg.games,
            cfg.seed,
            sinks=writers.sinks(),
            max_turns=cfg.max_turns,
            mode=cfg.mode,
            swarm_enabled=not cfg.ga_only,
        )
    finally:
        writers.close()
    captured = sum(r.outcome is Outcome.CAPTURED for r in records)
    logger.info("session done: %d/%d captured", captured, len(records))
    return 0


# ---------------------------------------------------------------------------
# stats


class _CsvError(Exception):
    def __init__(self, row: int, col: int, message: str) -> None:
        super().__init__(f"row {row}, column {col}: {message}")


def _parse_metrics(path: str) -> list[dict]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read metrics file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise _CsvError(1, 1, "empty file") from None
        if len(header) < 6 or header[-1] != "wall_time_ms":
            raise _CsvError(1, len(header), "unexpected header")
        num_captors = len(header) - 5
        expected = metrics_header(num_captors)
        for col, (got, want) in enumerate(zip(header, expected), start=1):
            if got != want:
                raise _CsvError(1, col, f"expected header field {want!r}, got {got!r}")
        rows = []
        last_id = 0
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise _CsvError(row_no, len(row), f"expected {len(expected)} fields")

            def _int(col: int, minimum: int) -> int:
                try:
                    value = int(row[col - 1])
                except ValueError:
                    raise _CsvError(row_no, col, f"not an integer: {row[col - 1]!r}") from None
                if value < minimum:
                    raise _CsvError(row_no, col, f"value {value} below {minimum}")
                return value

            game_id = _int(1, 1)
            if game_id <= last_id:
                raise _CsvError(row_no, 1, "game_id not strictly increasing")
            last_id = game_id
            if row[1] not in _OUTCOME_NAMES:
                raise _CsvError(row_no, 2, f"unknown outcome {row[1]!r}")
            turns = _int(3, 1)
            try:
                fraction = float(row[3])
            except ValueError:
                raise _CsvError(row_no, 4, f"not a number: {row[3]!r}") from None
            if not 0.0 <= fraction <= 1.0:
                raise _CsvError(row_no, 4, f"swarm_fraction {fraction} outside [0, 1]")
            for i in range(num_captors):
                _int(5 + i, 0)
            _int(len(expected), 0)
            rows.append(
                {
                    "game_id": game_id,
                    "outcome": row[1],
                    "turns": turns,
                    "swarm_fraction": fraction,
                }
            )
        if not rows:
            raise _CsvError(2, 1, "no data rows")
    return rows


def cmd_stats(args: argparse.Namespace) -> int:
    rows = _parse_metrics(args.metrics_file)
    n = len(rows)
    quartile = max(1, n // 4)
    captured = sum(r["outcome"] == Outcome.CAPTURED.value for r in rows)
    mean_turns = sum(r["turns"] for r in rows) / n
    first = [r["swarm_fraction"] for r in rows[:quartile]]
    last = [r["swarm_fraction"] for r in rows[-quartile:]]
    first_mean = sum(first) / len(first)
    last_mean = sum(last) / len(last)
    print(f"games {n}")
    print(f"capture_rate {captured / n:.6f}")
    print(f"mean_turns {mean_turns:.6f}")
    print(f"first_quartile_swarm_fraction {first_mean:.6f}")
    print(f"last_quartile_swarm_fraction {last_mean:.6f}")
    print(f"swarm_fraction_difference {last_mean - first_mean:+.6f}")
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        fh = open(args.move_log, "r", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read move log {args.move_log}: {exc}") from exc
    entry = None
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                print(f"corrupt move log at line {line_no}: {exc}", file=sys.stderr)
                return 1
            if data.get("game_id") == args.game_id:
                entry = data
                break
    if entry is None:
        print(f"game {args.game_id} not found in {args.move_log}", file=sys.stderr)
        return 2
    try:
        replay_game_log(entry, out=sys.stdout)
    except (ReplayError, ValueError, KeyError, TypeError) as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# entry points


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pursuit", description="Pursuit-game experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play a session and persist its outputs")
    run.add_argument("--games", type=int, default=None, help="number of games")
    run.add_argument("--board", default=None, help="board size as WxH, e.g. 8x8")
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--out", default=None, help="metrics CSV path")
    run.add_argument("--train-log", dest="train_log", default=None,
                     help="directory for training and move logs")
    run.add_argument("--max-turns", dest="max_turns", type=int, default=None,
                     help="round cap per game")
    run.add_argument("--config", default=None, help="JSON config file")
    run.add_argument("--argmax", action="store_true",
                     help="argmax proposals instead of the strict 0.5 threshold")
    run.add_argument("--render", action="store_true",
                     help="print an ASCII board per turn")
    run.set_defaults(func=cmd_run)

    stats = sub.add_parser("stats", help="summarise a metrics CSV")
    stats.add_argument("metrics_file")
    stats.set_defaults(func=cmd_stats)

    rep = sub.add_parser("replay", help="re-render one logged game")
    rep.add_argument("move_log")
    rep.add_argument("game_id", type=int)
    rep.set_defaults(func=cmd_replay)
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    level = _LOG_LEVELS.get(os.environ.get("PURSUIT_LOG_LEVEL", "info"), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    logger.setLevel(level)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, _CsvError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        logger.error("run failed: %s", exc)
        return 1


def main() -> None:
    sys.exit(run_cli())
