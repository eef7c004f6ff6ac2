"""Double-buffered world state and transition evaluation."""
from miso.core.world import CellArrayState, WorldState, commit, init_world
from miso.core.evaluator import ReadView, eval_expr, eval_transition
from miso.core.kernels import Kernels

__all__ = [
    "CellArrayState", "Kernels", "ReadView", "WorldState", "commit",
    "eval_expr", "eval_transition", "init_world",
]
