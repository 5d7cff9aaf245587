"""Chip firing games, sandpiles and mutating games, with lattice analysis
of their configuration spaces."""

from .model import (
    Configuration,
    Game,
    GameState,
    MultiGraph,
    MutationSchedule,
    Violation,
    asm,
    asm_to_cfg,
    cfg,
    dumps_game,
    game_from_dict,
    game_to_dict,
    loads_game,
    mcfg,
    normalize_cfg,
    validate,
)
from .engine import (
    FiringRecord,
    chips_needed,
    fire,
    fireable,
    fireable_vertices,
    initial_state,
    is_convergent,
    is_simple,
    run_to_fixpoint,
)

__version__ = "0.1.0"
