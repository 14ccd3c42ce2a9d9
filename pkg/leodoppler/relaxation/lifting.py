"""Lifted QCQP of the static Doppler problem.

The state is lifted to y = [p_r, b, rho_1..rho_N, z_1..z_N] (d = 4 + 2N) with
z_i = b * rho_i. Multiplying each Doppler residual by its range makes every
residual affine in y:

    rho_i (D_i - predicted_i) = v_i^T p_r + D_i rho_i - z_i - p_i^T v_i = (A y + k)_i

so the weighted cost ||A y + k||^2_{Q^-1} becomes F.Y + l0^T y + c0 with
Y = y y^T. Two families of quadratic equalities G.Y + l^T y + c = 0 tie the
lifted coordinates back to the geometry:

    range    (i < N):  ||p_r||^2 - rho_i^2 - 2 p_i^T p_r + ||p_i||^2 = 0
    product  (i >= N): Y[b, rho_i] - z_i = 0

All data is in scaled units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import sparse

from leodoppler.core.exceptions import DimensionError, ScalingError, ValidationError
from leodoppler.core.scaling import ProblemData, scale_receiver
from leodoppler.core.types import ReceiverState

logger = logging.getLogger(__name__)

RANGE = "range"
PRODUCT = "product"


@dataclass(frozen=True, eq=False)
class QuadraticConstraint:
    """G.Y + l^T y + c = 0 with a sparse symmetric G."""

    kind: str
    index: int
    G: sparse.csr_matrix
    linear: np.ndarray
    constant: float

    def value(self, Y: np.ndarray, y: np.ndarray) -> float:
        return float(self.G.multiply(Y).sum() + self.linear @ y + self.constant)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        """Gradient of the constraint at Y = y y^T."""
        return 2.0 * (self.G @ y) + self.linear


@dataclass(frozen=True, eq=False)
class LiftedProblem:
    data: ProblemData
    weights: np.ndarray  # diagonal of Q
    A: np.ndarray
    k: np.ndarray
    F: np.ndarray
    l0: np.ndarray
    c0: float
    constraints: tuple[QuadraticConstraint, ...]

    @property
    def n_measurements(self) -> int:
        return int(self.k.size)

    @property
    def dimension(self) -> int:
        return 4 + 2 * self.n_measurements

    @property
    def moment_dimension(self) -> int:
        return self.dimension + 1

    @property
    def range_constraints(self) -> tuple[QuadraticConstraint, ...]:
        return self.constraints[: self.n_measurements]

    @property
    def product_constraints(self) -> tuple[QuadraticConstraint, ...]:
        return self.constraints[self.n_measurements :]

    def constraint_values(self, Y: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([con.value(Y, y) for con in self.constraints])

    def constraint_jacobian(self, y: np.ndarray) -> np.ndarray:
        """2N x d matrix with rows (2 G_i y + l_i)^T."""
        return np.vstack([con.gradient(y) for con in self.constraints])

    def a_rank(self, tolerance: float = 1e-8) -> int:
        """Numerical rank of A relative to its largest singular value."""
        singular = np.linalg.svd(self.A, compute_uv=False)
        if singular.size == 0 or singular[0] == 0.0:
            return 0
        return int(np.sum(singular > tolerance * singular[0]))


@dataclass(frozen=True)
class LiftedState:
    """Lifted state vector y with named views."""

    y: np.ndarray

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=np.float64).ravel()
        if y.size < 6 or (y.size - 4) % 2:
            raise DimensionError(f"Lifted state of size {y.size} is not 4 + 2N")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n_measurements(self) -> int:
        return (self.y.size - 4) // 2

    @property
    def position(self) -> np.ndarray:
        return self.y[:3]

    @property
    def clock_drift_term(self) -> float:
        return float(self.y[3])

    @property
    def ranges(self) -> np.ndarray:
        return self.y[4 : 4 + self.n_measurements]

    @property
    def products(self) -> np.ndarray:
        return self.y[4 + self.n_measurements :]


def _require_scaled(data: ProblemData) -> None:
    if not data.scaled:
        raise ScalingError("Lifting requires scaled problem data")


def _range_constraint(index: int, n: int, position: np.ndarray) -> QuadraticConstraint:
    d = 4 + 2 * n
    rows = [0, 1, 2, 4 + index]
    values = [1.0, 1.0, 1.0, -1.0]
    G = sparse.csr_matrix((values, (rows, rows)), shape=(d, d))
    linear = np.zeros(d)
    linear[:3] = -2.0 * position
    return QuadraticConstraint(RANGE, index, G, linear, float(position @ position))


def _product_constraint(index: int, n: int) -> QuadraticConstraint:
    d = 4 + 2 * n
    G = sparse.csr_matrix(
        ([0.5, 0.5], ([3, 4 + index], [4 + index, 3])), shape=(d, d)
    )
    linear = np.zeros(d)
    linear[4 + n + index] = -1.0
    return QuadraticConstraint(PRODUCT, index, G, linear, 0.0)


def build_lifted_problem(
    data: ProblemData, weights: Optional[np.ndarray] = None
) -> LiftedProblem:
    """Assemble A, k, F, l0, c0 and the 2N constraints.

    ``weights`` is the diagonal of Q (identity when omitted); a full
    diagonal matrix is accepted too.
    """
    _require_scaled(data)
    n = data.size
    d = 4 + 2 * n
    if weights is None:
        weights = np.ones(n)
    weights = np.array(weights, dtype=np.float64)
    if weights.ndim == 2:
        if weights.shape != (n, n) or np.any(weights != np.diag(np.diag(weights))):
            raise DimensionError("Q must be an N x N diagonal matrix")
        weights = np.diag(weights).copy()
    if weights.shape != (n,):
        raise DimensionError(f"Expected {n} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
        raise ValidationError("Q must be positive diagonal")

    idx = np.arange(n)
    A = np.zeros((n, d))
    A[:, :3] = data.velocities
    A[idx, 4 + idx] = data.doppler
    A[idx, 4 + n + idx] = -1.0
    k = -np.einsum("ij,ij->i", data.positions, data.velocities)

    inverse = 1.0 / weights
    weighted = A * inverse[:, None]
    F = A.T @ weighted
    F = 0.5 * (F + F.T)
    l0 = 2.0 * weighted.T @ k
    c0 = float(k @ (inverse * k))

    constraints = tuple(
        _range_constraint(i, n, data.positions[i]) for i in range(n)
    ) + tuple(_product_constraint(i, n) for i in range(n))

    for arr in (weights, A, k, F, l0):
        arr.setflags(write=False)
    logger.debug("Lifted problem: N=%d, d=%d, c0=%.3e", n, d, c0)
    return LiftedProblem(
        data=data,
        weights=weights,
        A=A,
        k=k,
        F=F,
        l0=l0,
        c0=c0,
        constraints=constraints,
    )


def qcqp_cost(problem: LiftedProblem, state: Union[LiftedState, np.ndarray]) -> float:
    """F.(y y^T) + l0^T y + c0."""
    y = state.y if isinstance(state, LiftedState) else np.asarray(state, dtype=float)
    if y.shape != (problem.dimension,):
        raise DimensionError(
            f"State of size {y.size} does not match dimension {problem.dimension}"
        )
    return float(y @ problem.F @ y + problem.l0 @ y + problem.c0)


def lift_state(receiver: ReceiverState, data: ProblemData) -> LiftedState:
    """Consistent lifted state of an SI receiver in the units of ``data``."""
    _require_scaled(data)
    x = scale_receiver(receiver, data.scaling)
    ranges = np.linalg.norm(x[:3] - data.positions, axis=1)
    return LiftedState(np.concatenate([x, ranges, x[3] * ranges]))


def _fmt(values: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in np.ravel(values))


def dump_lifted_problem(problem: LiftedProblem, path: Union[str, Path]) -> Path:
    """Write the cost and constraint data in a line-oriented text format.

    Layout (indices 0-based, G entries upper triangle only)::

        # leodoppler lifted problem v1
        n_measurements <N>
        dimension <d>
        weights <N values>
        c0 <value>
        l0 <d values>
        F
        <d lines of d values>
        constraint <kind> <index> <c>
        l <index> <value>          (non-zero entries)
        G <row> <col> <value>
        end
    """
    path = Path(path)
    lines = [
        "# leodoppler lifted problem v1",
        f"n_measurements {problem.n_measurements}",
        f"dimension {problem.dimension}",
        f"weights {_fmt(problem.weights)}",
        f"c0 {problem.c0:.17g}",
        f"l0 {_fmt(problem.l0)}",
        "F",
    ]
    lines.extend(_fmt(row) for row in problem.F)
    for con in problem.constraints:
        lines.append(f"constraint {con.kind} {con.index} {con.constant:.17g}")
        for j in np.flatnonzero(con.linear):
            lines.append(f"l {j} {con.linear[j]:.17g}")
        upper = sparse.triu(con.G).tocoo()
        for r, c, v in zip(upper.row, upper.col, upper.data):
            lines.append(f"G {r} {c} {v:.17g}")
        lines.append("end")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Lifted problem written to %s", path)
    return path
