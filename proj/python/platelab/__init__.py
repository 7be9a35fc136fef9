"""Thin-plate fracture reduction lab."""

from ._platelab import (
    BoundaryDatum,
    EnergyBreakdown,
    LameParams,
    SolverConfig,
    SolverFailure,
    alternate_minimize,
    jump_energy_study,
    limit_energy,
    make_state,
    minimize_limit,
    phi_rho,
    quadratic_form_c0,
    recovery_sweep,
    reduced_min_oracle,
    reduced_modulus_1d,
    run_cli,
)

__all__ = [
    "BoundaryDatum",
    "EnergyBreakdown",
    "LameParams",
    "SolverConfig",
    "SolverFailure",
    "alternate_minimize",
    "jump_energy_study",
    "limit_energy",
    "make_state",
    "minimize_limit",
    "phi_rho",
    "quadratic_form_c0",
    "recovery_sweep",
    "reduced_min_oracle",
    "reduced_modulus_1d",
    "run_cli",
]
