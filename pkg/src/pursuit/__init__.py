"""Deterministic pursuit-game simulator.

A genetic-algorithm global solver with full board view plays joint captor
moves and teaches per-captor neural policies, which gradually take over
move proposal as games accumulate.
"""

from .controller import (
    AgentProposal,
    GameLog,
    GameRecord,
    MoveSource,
    Outcome,
    SessionSinks,
    TrainingExample,
    TrainingStore,
    captor_turn,
    initial_state,
    play_game,
    propose,
    run_session,
)
from .encoding import encode_state, feature_length, target_vector
from .ga import (
    Chromosome,
    GAConfig,
    NoLegalMoveError,
    distance_sum,
    evaluate_chromosome,
    evaluate_genes,
    exhaustive_solve,
    ga_solve,
)
from .game import (
    ALL_DIRS,
    BoardConfig,
    GameState,
    GridPos,
    IllegalMoveError,
    IllegalReason,
    JointMove,
    MoveDir,
    MoveVerdict,
    OutOfBoundsError,
    apply_direction,
    apply_fugitive_move,
    apply_joint_move,
    fugitive_legal_moves,
    is_captured,
    is_joint_move_legal,
    random_fugitive_move,
)
from .neural import (
    DimensionMismatchError,
    EmptyTrainingSetError,
    MLPParams,
    forward,
    gradient,
    hidden_units_for,
    init_mlp,
    load_params,
    loss,
    params_from_dict,
    params_to_dict,
    save_params,
    train,
    zero_mlp,
)

__version__ = "0.1.0"
