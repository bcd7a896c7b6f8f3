"""Continuized Nesterov acceleration for (strongly) quasar-convex objectives."""

from ._core import (
    InvalidArgument,
    Problem,
    QuasarError,
    algorithms,
    check,
    generate_problem,
    hss_theta_sequence,
    jump_times,
    load_problem,
    quasar_step_params,
    run,
    run_grid,
    strong_quasar_step_params,
)

__all__ = [
    "InvalidArgument",
    "Problem",
    "QuasarError",
    "algorithms",
    "check",
    "generate_problem",
    "hss_theta_sequence",
    "jump_times",
    "load_problem",
    "quasar_step_params",
    "run",
    "run_grid",
    "strong_quasar_step_params",
]
