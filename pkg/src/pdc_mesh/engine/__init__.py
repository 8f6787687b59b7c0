"""PDC/IPDC engine: agent updates, message board and the round simulator."""

from pdc_mesh.engine.fista import FistaResult, fista, prox_gradient_residual
from pdc_mesh.engine.inner_max import brute_force_inner_max
from pdc_mesh.engine.messaging import (
    MessageBoard,
    laplacian_neighbor_sum,
    signless_neighbor_sum,
)
from pdc_mesh.engine.runner import initial_states, run
from pdc_mesh.engine.state import (
    TRACE_COLUMNS,
    AgentState,
    IterationTrace,
    RoundRecord,
    SolverConfig,
)
from pdc_mesh.engine.updates import (
    SubproblemResult,
    dual_p_step,
    dual_p_update,
    local_target,
    penalty_weight,
    subproblem_lipschitz,
    x_update_exact,
    x_update_inexact,
    y_update,
    z_update,
)

__all__ = [
    "TRACE_COLUMNS",
    "AgentState",
    "FistaResult",
    "IterationTrace",
    "MessageBoard",
    "RoundRecord",
    "SolverConfig",
    "SubproblemResult",
    "brute_force_inner_max",
    "dual_p_step",
    "dual_p_update",
    "fista",
    "initial_states",
    "laplacian_neighbor_sum",
    "local_target",
    "penalty_weight",
    "prox_gradient_residual",
    "run",
    "signless_neighbor_sum",
    "subproblem_lipschitz",
    "x_update_exact",
    "x_update_inexact",
    "y_update",
    "z_update",
]
