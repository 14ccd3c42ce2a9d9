"""Homogenised standard-form SDP built from a lifted QCQP.

    min C.S   s.t.   B_i.S = 0 (i < 2N),   E.S = 1,   S >= 0

with S = [[Y, y], [y^T, 1]] (homogeneous coordinate last),
C = [[F, l0/2], [l0^T/2, c0]] and B_i = [[G_i, l_i/2], [l_i^T/2, c_i]].
Constraint matrices are kept as padded (row, col, value) entry arrays listing
both triangles, so B_i.S and sum_i y_i B_i are plain gathers and scatters.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse

from leodoppler.core.exceptions import DimensionError
from leodoppler.relaxation.lifting import LiftedProblem, QuadraticConstraint

logger = logging.getLogger(__name__)


class SolverStatus(str, enum.Enum):
    SOLVED = "solved"
    INACCURATE = "inaccurate"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class SdpInstance:
    C: np.ndarray
    rows: np.ndarray  # m x K
    cols: np.ndarray
    values: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        n = self.C.shape[0]
        if self.C.shape != (n, n) or not np.allclose(self.C, self.C.T, atol=0.0):
            raise DimensionError("Cost matrix must be square and symmetric")
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise DimensionError("Entry arrays must share one shape")
        if self.rows.shape[0] != self.b.size:
            raise DimensionError("One right-hand side per constraint is required")
        for arr in (self.C, self.rows, self.cols, self.values, self.b):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        """Moment dimension n = d + 1."""
        return int(self.C.shape[0])

    @property
    def n_constraints(self) -> int:
        return int(self.b.size)

    @classmethod
    def from_matrices(
        cls, C: np.ndarray, matrices: Sequence[np.ndarray], b: Sequence[float]
    ) -> "SdpInstance":
        """Build from dense symmetric constraint matrices."""
        C = np.array(C, dtype=np.float64)
        entries = [np.nonzero(np.asarray(B)) for B in matrices]
        width = max((r.size for r, _ in entries), default=1) or 1
        m = len(matrices)
        rows = np.zeros((m, width), dtype=np.intp)
        cols = np.zeros((m, width), dtype=np.intp)
        values = np.zeros((m, width))
        for i, (B, (r, c)) in enumerate(zip(matrices, entries)):
            rows[i, : r.size] = r
            cols[i, : c.size] = c
            values[i, : r.size] = np.asarray(B, dtype=np.float64)[r, c]
        return cls(C, rows, cols, values, np.array(b, dtype=np.float64))

    def constraint_matrix(self, index: int) -> sparse.csr_matrix:
        n = self.size
        return sparse.csr_matrix(
            (self.values[index], (self.rows[index], self.cols[index])), shape=(n, n)
        )

    def apply(self, S: np.ndarray) -> np.ndarray:
        """Vector of B_i.S."""
        return np.sum(self.values * S[self.rows, self.cols], axis=1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """sum_i y_i B_i as a dense matrix."""
        out = np.zeros_like(self.C)
        np.add.at(out, (self.rows, self.cols), self.values * y[:, None])
        return out

    def primal_cost(self, S: np.ndarray) -> float:
        return float(np.sum(self.C * S))

    def constraint_residuals(self, S: np.ndarray) -> np.ndarray:
        return self.apply(S) - self.b


@dataclass(frozen=True, eq=False)
class MomentSolution:
    """Primal/dual output of one SDP solve.

    ``multipliers`` follow H = C + sum_i multipliers_i B_i - normalization E,
    so at an optimum H is the dual slack and ``normalization`` equals the
    dual cost.
    """

    S: np.ndarray
    status: SolverStatus
    primal_cost: float
    dual_cost: float
    multipliers: Optional[np.ndarray]
    normalization: Optional[float]
    iterations: int
    solve_time: float
    backend: str = ""
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return int(self.S.shape[0]) - 1

    @property
    def Y(self) -> np.ndarray:
        return self.S[:-1, :-1]

    @property
    def y(self) -> np.ndarray:
        return self.S[:-1, -1]

    @property
    def has_duals(self) -> bool:
        return self.multipliers is not None and self.normalization is not None

    @property
    def relative_gap(self) -> float:
        return abs(self.primal_cost - self.dual_cost) / (1.0 + abs(self.primal_cost))


def _homogenise(
    quadratic: Union[np.ndarray, sparse.spmatrix], linear: np.ndarray, constant: float
) -> sparse.coo_matrix:
    d = linear.size
    block = sparse.bmat(
        [
            [sparse.csr_matrix(quadratic), sparse.csr_matrix(0.5 * linear[:, None])],
            [sparse.csr_matrix(0.5 * linear[None, :]), sparse.csr_matrix([[constant]])],
        ]
    ).tocsr()
    block.eliminate_zeros()
    block = block.tocoo()
    if block.shape != (d + 1, d + 1):
        raise DimensionError("Homogenised block has the wrong shape")
    return block


def _pad(blocks: Sequence[sparse.coo_matrix]) -> tuple[np.ndarray, ...]:
    width = max(block.nnz for block in blocks)
    m = len(blocks)
    rows = np.zeros((m, width), dtype=np.intp)
    cols = np.zeros((m, width), dtype=np.intp)
    values = np.zeros((m, width))
    for i, block in enumerate(blocks):
        rows[i, : block.nnz] = block.row
        cols[i, : block.nnz] = block.col
        values[i, : block.nnz] = block.data
    return rows, cols, values


def constraint_block(con: QuadraticConstraint) -> sparse.coo_matrix:
    """[[G, l/2], [l^T/2, c]] of one lifted constraint."""
    return _homogenise(con.G, con.linear, con.constant)


def instance_from_lifted(problem: LiftedProblem) -> SdpInstance:
    """Homogenise the lifted QCQP; the normalisation constraint comes last."""
    d = problem.dimension
    C = _homogenise(problem.F, problem.l0, problem.c0).toarray()
    C = 0.5 * (C + C.T)
    normalization = sparse.coo_matrix(([1.0], ([d], [d])), shape=(d + 1, d + 1))
    blocks = [constraint_block(con) for con in problem.constraints]
    blocks.append(normalization)
    rows, cols, values = _pad(blocks)
    b = np.zeros(len(blocks))
    b[-1] = 1.0
    return SdpInstance(C=C, rows=rows, cols=cols, values=values, b=b)


def dual_matrix(
    instance: SdpInstance, multipliers: np.ndarray, normalization: float = 0.0
) -> np.ndarray:
    """H = C + sum_i multipliers_i B_i - normalization E over the 2N constraints."""
    multipliers = np.asarray(multipliers, dtype=np.float64)
    count = instance.n_constraints - 1
    if multipliers.shape != (count,):
        raise DimensionError(f"Expected {count} multipliers, got {multipliers.shape}")
    weights = np.append(multipliers, -normalization)
    H = instance.C + instance.adjoint(weights)
    return 0.5 * (H + H.T)


def export_sdpa(
    instance: SdpInstance, path: Union[str, Path], comment: str = "leodoppler"
) -> Path:
    """Write the instance in SDPA sparse format (.dat-s).

    SDPA solves ``max F0.Y s.t. Fi.Y = ci, Y >= 0`` on its dual side, so the
    file carries F0 = -C, Fi = B_i and c = b; the SDPA dual optimum is -p*.
    """
    path = Path(path)
    n = instance.size
    lines = [
        f'"{comment}: min C.S s.t. B_i.S = b_i, S >= 0 (F0 = -C)',
        str(instance.n_constraints),
        "1",
        str(n),
        " ".join(f"{v:.17g}" for v in instance.b),
    ]
    upper = sparse.triu(sparse.csr_matrix(instance.C)).tocoo()
    for r, c, v in zip(upper.row, upper.col, upper.data):
        lines.append(f"0 1 {r + 1} {c + 1} {-v:.17g}")
    for i in range(instance.n_constraints):
        block = sparse.triu(instance.constraint_matrix(i)).tocoo()
        block.sum_duplicates()
        for r, c, v in zip(block.row, block.col, block.data):
            if v != 0.0:
                lines.append(f"{i + 1} 1 {r + 1} {c + 1} {v:.17g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(
        "SDPA instance (%d constraints, n=%d) written to %s",
        instance.n_constraints,
        n,
        path,
    )
    return path
