"""Lifted QCQP construction (the reweighting loop lives in ``relaxation.gwa``)."""

from leodoppler.relaxation.lifting import (
    LiftedProblem,
    LiftedState,
    QuadraticConstraint,
    build_lifted_problem,
    dump_lifted_problem,
    lift_state,
    qcqp_cost,
)

__all__ = [
    "LiftedProblem",
    "LiftedState",
    "QuadraticConstraint",
    "build_lifted_problem",
    "dump_lifted_problem",
    "lift_state",
    "qcqp_cost",
]
