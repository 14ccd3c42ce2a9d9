"""Local NWLS solvers."""

from leodoppler.solvers.local import (
    LocalSolution,
    LocalSolverConfig,
    measurement_weights,
    solve_dog_leg,
    solve_gauss_newton,
)

__all__ = [
    "LocalSolution",
    "LocalSolverConfig",
    "measurement_weights",
    "solve_dog_leg",
    "solve_gauss_newton",
]
