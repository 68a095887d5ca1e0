"""Sparse ANOVA component selection: extremal sequences, selectors and risk experiments."""

from ._core import (
    Error,
    SelectorConfig,
    __version__,
    a_asymptotic,
    a_value,
    binomial,
    boundary_curves,
    dichotomy,
    enumerate_frequencies,
    lepski_index,
    log_binomial,
    max_radius,
    phase_classify,
    run_cli,
    solve_extremal,
    solve_r_star,
    table2,
    thresholds_and_radii,
)

__all__ = [
    "Error",
    "SelectorConfig",
    "__version__",
    "a_asymptotic",
    "a_value",
    "binomial",
    "boundary_curves",
    "dichotomy",
    "enumerate_frequencies",
    "lepski_index",
    "log_binomial",
    "max_radius",
    "phase_classify",
    "run_cli",
    "solve_extremal",
    "solve_r_star",
    "table2",
    "thresholds_and_radii",
]
