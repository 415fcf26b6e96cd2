"""
Standard-form block semidefinite programs and their solutions

    maximize (or minimize)  ⟨C, X⟩
    subject to              ⟨F_i, X⟩ = b_i,   X ⪰ 0 blockwise

Blocks are complex Hermitian or real symmetric. Constraints come in
groups sharing a sparsity pattern: each part of a group is a stack of
matrices supported on one square sub-block of one block.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

import config

logger = logging.getLogger(__name__)


class Sense(str, Enum):
    MAX = "max"
    MIN = "min"


class SolutionStatus(str, Enum):
    OPTIMAL = "optimal"
    NEAR_OPTIMAL = "near_optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


class ProblemError(ValueError):
    """Raised for inconsistent problem data"""


class SolverError(RuntimeError):
    """Raised by callers that need a certified optimum and did not get one"""

    def __init__(self, message: str, solution: Optional["SdpSolution"] = None):
        super().__init__(message)
        self.solution = solution


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Real trace inner product Re tr(a† b)"""
    return float(np.vdot(a, b).real)


@dataclass(frozen=True, eq=False)
class ConstraintPart:
    """Stack of k matrices living on block[offset:offset+s, offset:offset+s]"""

    block: int
    offset: int
    mats: np.ndarray

    @property
    def size(self) -> int:
        return int(self.mats.shape[1])

    @property
    def window(self) -> slice:
        return slice(self.offset, self.offset + self.size)


@dataclass(frozen=True, eq=False)
class ConstraintGroup:
    rows: np.ndarray
    parts: Tuple[ConstraintPart, ...]


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Block SDP in standard form (see module docstring)"""

    block_dims: Tuple[int, ...]
    objective: Tuple[np.ndarray, ...]
    groups: Tuple[ConstraintGroup, ...]
    targets: np.ndarray
    sense: Sense = Sense.MAX

    def __post_init__(self):
        if not self.block_dims or any(d < 1 for d in self.block_dims):
            raise ProblemError(f"Block dimensions must be positive, got {self.block_dims}")
        if len(self.objective) != len(self.block_dims):
            raise ProblemError("One objective block per block dimension is required")
        for d, c in zip(self.block_dims, self.objective):
            if c.shape != (d, d):
                raise ProblemError(f"Objective block shape {c.shape} does not match {d}")
            if np.linalg.norm(c - c.conj().T) > 1e-12 * max(1.0, np.linalg.norm(c)):
                raise ProblemError("Objective blocks must be Hermitian")
        targets = np.asarray(self.targets, dtype=np.float64)
        if not np.all(np.isfinite(targets)):
            raise ProblemError("Constraint targets must be finite")
        seen = np.zeros(targets.size, dtype=np.int64)
        for group in self.groups:
            seen[group.rows] += 1
            for part in group.parts:
                if part.mats.shape[0] != group.rows.size:
                    raise ProblemError("Constraint part stack does not match its group size")
                if part.offset + part.size > self.block_dims[part.block]:
                    raise ProblemError(f"Constraint part overruns block {part.block}")
        if np.any(seen != 1):
            raise ProblemError("Every constraint row must belong to exactly one group")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "sense", Sense(self.sense))

    @property
    def num_constraints(self) -> int:
        return int(self.targets.size)

    @property
    def is_complex(self) -> bool:
        arrays = list(self.objective) + [p.mats for g in self.groups for p in g.parts]
        return any(np.iscomplexobj(a) for a in arrays)

    @property
    def dtype(self):
        return np.complex128 if self.is_complex else np.float64

    def zero_blocks(self) -> List[np.ndarray]:
        return [np.zeros((d, d), dtype=self.dtype) for d in self.block_dims]

    def apply(self, x: Sequence[np.ndarray]) -> np.ndarray:
        """A(X)_i = ⟨F_i, X⟩"""
        out = np.zeros(self.num_constraints)
        for group in self.groups:
            for part in group.parts:
                window = x[part.block][part.window, part.window]
                out[group.rows] += np.einsum("kij,ij->k", part.mats.conj(), window).real
        return out

    def adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        """A*(y) = Σ_i y_i F_i"""
        blocks = self.zero_blocks()
        for group in self.groups:
            for part in group.parts:
                blocks[part.block][part.window, part.window] += np.einsum(
                    "k,kij->ij", y[group.rows], part.mats
                )
        return blocks

    def objective_value(self, x: Sequence[np.ndarray]) -> float:
        return sum(inner(c, xb) for c, xb in zip(self.objective, x))

    def constraint(self, i: int) -> List[np.ndarray]:
        """Dense blocks of F_i"""
        blocks = self.zero_blocks()
        for group in self.groups:
            hit = np.nonzero(group.rows == i)[0]
            if hit.size:
                for part in group.parts:
                    blocks[part.block][part.window, part.window] += part.mats[hit[0]]
        return blocks

    def scale(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in self.objective)))


@dataclass(frozen=True, eq=False)
class SdpSolution:
    """Primal-dual pair in the problem's own sense

    For a max problem the dual reads: minimize b·y s.t. A*(y) − C = S ⪰ 0.
    For a min problem: maximize b·y s.t. C − A*(y) = S ⪰ 0.
    """

    x: Tuple[np.ndarray, ...]
    y: np.ndarray
    s: Tuple[np.ndarray, ...]
    primal_obj: float
    dual_obj: float
    gap: float
    status: SolutionStatus
    iterations: int
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    stats: List[dict] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status in (SolutionStatus.OPTIMAL, SolutionStatus.NEAR_OPTIMAL)

    def raise_for_status(self) -> "SdpSolution":
        if not self.ok:
            raise SolverError(
                f"Solver stopped with status {self.status.value} after {self.iterations} iterations "
                f"(gap {self.gap:.2e}, residuals {self.primal_residual:.2e}/{self.dual_residual:.2e})",
                self,
            )
        return self


@dataclass(frozen=True)
class SolveOptions:
    gap_tol: float = field(default_factory=lambda: config.SDP_GAP_TOL)
    feas_tol: float = field(default_factory=lambda: config.SDP_FEAS_TOL)
    near_tol: float = field(default_factory=lambda: config.SDP_NEAR_TOL)
    max_iter: int = field(default_factory=lambda: config.SDP_MAX_ITER)
    step_fraction: float = field(default_factory=lambda: config.SDP_STEP_FRACTION)
    debug: bool = field(default_factory=lambda: config.SDP_DEBUG)
    dump_path: str = field(default_factory=lambda: config.SDP_DEBUG_DUMP)


def _embed_matrix(m: np.ndarray) -> np.ndarray:
    """[[Re, −Im], [Im, Re]] / 2"""
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]]) / 2


def embed_complex(p: SdpProblem) -> SdpProblem:
    """Real symmetric problem with the same optimal value

    Each d×d Hermitian block becomes a 2d×2d real block; objective and
    constraint data are halved so ⟨emb(F), emb(X)⟩ = ⟨F, X⟩. Use
    extract_complex on the solution blocks to go back.
    """
    objective = tuple(_embed_matrix(np.asarray(c, dtype=np.complex128)) for c in p.objective)
    groups = []
    for group in p.groups:
        parts = []
        for part in group.parts:
            d = p.block_dims[part.block]
            full = np.zeros((part.mats.shape[0], d, d), dtype=np.complex128)
            full[:, part.window, part.window] = part.mats
            re, im = full.real, full.imag
            stacked = np.concatenate(
                [np.concatenate([re, -im], axis=2), np.concatenate([im, re], axis=2)], axis=1
            ) / 2
            parts.append(ConstraintPart(part.block, 0, stacked))
        groups.append(ConstraintGroup(group.rows, tuple(parts)))
    return SdpProblem(
        block_dims=tuple(2 * d for d in p.block_dims),
        objective=objective,
        groups=tuple(groups),
        targets=p.targets,
        sense=p.sense,
    )


def extract_complex(block: np.ndarray) -> np.ndarray:
    """Inverse of the real embedding, averaging the two copies"""
    d = block.shape[0] // 2
    x1, x2 = block[:d, :d], block[:d, d:]
    x3, x4 = block[d:, :d], block[d:, d:]
    return ((x1 + x4) + 1j * (x3 - x2)) / 2


def extract_solution(embedded: SdpSolution) -> SdpSolution:
    """Map a solution of embed_complex(p) back to p's Hermitian blocks"""
    return SdpSolution(
        x=tuple(extract_complex(b) for b in embedded.x),
        y=embedded.y,
        s=tuple(2 * extract_complex(b) for b in embedded.s),
        primal_obj=embedded.primal_obj,
        dual_obj=embedded.dual_obj,
        gap=embedded.gap,
        status=embedded.status,
        iterations=embedded.iterations,
        primal_residual=embedded.primal_residual,
        dual_residual=embedded.dual_residual,
        stats=embedded.stats,
    )
