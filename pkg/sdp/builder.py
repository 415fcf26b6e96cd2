"""
Incremental construction of block SDPs from grouped constraints
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from sdp.problem import ConstraintGroup, ConstraintPart, ProblemError, SdpProblem, Sense

logger = logging.getLogger(__name__)


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d×d Hermitian matrices, shape (d², d, d)

    Order: diagonal units, then (E_jk + E_kj)/√2 and i(E_kj − E_jk)/√2 for j < k.
    """
    basis = np.zeros((d * d, d, d), dtype=np.complex128)
    idx = 0
    for j in range(d):
        basis[idx, j, j] = 1.0
        idx += 1
    r = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            basis[idx, j, k] = basis[idx, k, j] = r
            idx += 1
            basis[idx, j, k] = -1j * r
            basis[idx, k, j] = 1j * r
            idx += 1
    return basis


def symmetric_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d×d real symmetric matrices, shape (d(d+1)/2, d, d)"""
    herm = hermitian_basis(d)
    keep = [i for i in range(d * d) if not np.any(herm[i].imag)]
    return herm[keep].real.copy()


def coefficients(basis: np.ndarray, m: np.ndarray) -> np.ndarray:
    """⟨H_k, m⟩ for each basis element"""
    return np.einsum("kij,ij->k", basis.conj(), m).real


def combine(basis: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", coeffs, basis)


class ProgramBuilder:
    """Collects objective blocks and constraint groups, then freezes an SdpProblem"""

    def __init__(self, block_dims: Sequence[int], sense: Sense = Sense.MAX, dtype=np.complex128):
        self.block_dims = tuple(int(d) for d in block_dims)
        self.sense = Sense(sense)
        self.dtype = dtype
        self._objective = [np.zeros((d, d), dtype=dtype) for d in self.block_dims]
        self._groups: List[Tuple[np.ndarray, List[ConstraintPart]]] = []
        self._count = 0

    @property
    def num_constraints(self) -> int:
        return self._count

    def set_objective(self, block: int, mat: np.ndarray, offset: int = 0):
        mat = np.asarray(mat, dtype=self.dtype)
        size = mat.shape[0]
        self._objective[block][offset:offset + size, offset:offset + size] += mat

    def add_group(
        self,
        targets: Sequence[float],
        parts: Dict[int, Tuple[int, np.ndarray]],
        name: Optional[str] = None,
    ) -> np.ndarray:
        """Add k constraints ⟨F_i, X⟩ = targets[i] sharing one sparsity pattern

        Args:
            targets: length-k right-hand sides
            parts: block index -> (offset, stack of k square matrices)
            name: label used in debug logging

        Returns:
            Global row indices of the new constraints
        """
        targets = np.asarray(targets, dtype=np.float64).reshape(-1)
        k = targets.size
        built = []
        for block, (offset, mats) in sorted(parts.items()):
            mats = np.asarray(mats, dtype=self.dtype)
            if mats.ndim != 3 or mats.shape[0] != k or mats.shape[1] != mats.shape[2]:
                raise ProblemError(f"Constraint stack for block {block} has shape {mats.shape}, expected ({k}, s, s)")
            if offset + mats.shape[1] > self.block_dims[block]:
                raise ProblemError(f"Constraint stack overruns block {block}")
            built.append(ConstraintPart(block, int(offset), mats))
        rows = np.arange(self._count, self._count + k)
        self._groups.append((targets, built))
        self._count += k
        if name:
            logger.debug(f"Added {k} constraints for {name}")
        return rows

    def build(self) -> SdpProblem:
        groups = []
        targets = np.zeros(self._count)
        start = 0
        for group_targets, parts in self._groups:
            rows = np.arange(start, start + group_targets.size)
            targets[rows] = group_targets
            groups.append(ConstraintGroup(rows, tuple(parts)))
            start += group_targets.size
        return SdpProblem(
            block_dims=self.block_dims,
            objective=tuple(self._objective),
            groups=tuple(groups),
            targets=targets,
            sense=self.sense,
        )
