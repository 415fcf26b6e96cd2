"""
Dense linear algebra over labeled tensor-product spaces
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

import config

logger = logging.getLogger(__name__)


class DimensionError(ValueError):
    """Raised for unknown labels, shape mismatches and invalid operators"""


@dataclass(frozen=True)
class SystemDims:
    """Ordered tensor factors, e.g. (("A", 2), ("B", 3))"""

    factors: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"Duplicate factor labels: {labels}")
        for label, dim in factors:
            if dim < 1:
                raise DimensionError(f"Factor {label} has dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, **dims: int) -> "SystemDims":
        """SystemDims.of(A=2, B=2) keeps keyword order"""
        return cls(tuple(dims.items()))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.factors)

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"Unknown label {label!r}; have {list(self.labels)}") from None

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def subset(self, labels: Iterable[str]) -> "SystemDims":
        """Factors named in labels, kept in their original relative order"""
        wanted = set(labels)
        for label in wanted:
            self.index(label)
        return SystemDims(tuple(f for f in self.factors if f[0] in wanted))

    def without(self, labels: Iterable[str]) -> "SystemDims":
        dropped = set(labels)
        for label in dropped:
            self.index(label)
        return SystemDims(tuple(f for f in self.factors if f[0] not in dropped))

    def reordered(self, order: Sequence[str]) -> "SystemDims":
        if sorted(order) != sorted(self.labels):
            raise DimensionError(f"Order {list(order)} is not a permutation of {list(self.labels)}")
        return SystemDims(tuple((label, self.dim_of(label)) for label in order))

    def renamed(self, mapping: Dict[str, str]) -> "SystemDims":
        return SystemDims(tuple((mapping.get(label, label), dim) for label, dim in self.factors))

    def concat(self, other: "SystemDims") -> "SystemDims":
        return SystemDims(self.factors + other.factors)

    def to_list(self):
        return [[label, dim] for label, dim in self.factors]


class MatrixFunction(str, Enum):
    SQRT = "sqrt"
    PINV = "pinv"
    PINV_SQRT = "pinv_sqrt"
    LOG2 = "log2"


def as_matrix(m, dims: Optional[SystemDims] = None) -> np.ndarray:
    """Coerce to a finite complex128 2-D array, optionally checked against dims"""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"Expected a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("Matrix has non-finite entries")
    if dims is not None and arr.shape != (dims.total, dims.total):
        raise DimensionError(f"Matrix shape {arr.shape} does not match dims {dims.to_list()}")
    return arr


def scale_of(m: np.ndarray) -> float:
    """Frobenius norm, the reference scale for relative tolerances"""
    return float(np.linalg.norm(m))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: SystemDims, traced_labels: Iterable[str]) -> np.ndarray:
    """Trace out traced_labels; remaining factors keep their relative order"""
    mat = as_matrix(m, dims)
    traced = sorted({dims.index(label) for label in traced_labels})
    n = len(dims)
    t = mat.reshape(dims.dims + dims.dims)
    for k, idx in enumerate(reversed(traced)):
        current = n - k
        t = np.trace(t, axis1=idx, axis2=idx + current)
    kept = dims.without(dims.labels[i] for i in traced)
    return t.reshape(kept.total, kept.total)


def permute_factors(m, dims: SystemDims, order: Sequence[str]) -> np.ndarray:
    """Reorder tensor factors of a square matrix (or a state vector) to order"""
    target = dims.reordered(order)
    perm = [dims.index(label) for label in target.labels]
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        if arr.shape != (dims.total,):
            raise DimensionError(f"Vector length {arr.shape[0]} does not match dims {dims.to_list()}")
        return arr.reshape(dims.dims).transpose(perm).reshape(-1)
    mat = as_matrix(arr, dims)
    n = len(dims)
    t = mat.reshape(dims.dims + dims.dims).transpose(perm + [p + n for p in perm])
    return t.reshape(dims.total, dims.total)


def hermitize(m, tol: Optional[float] = None) -> np.ndarray:
    """Check Hermiticity at tol times the matrix scale, then symmetrize"""
    mat = as_matrix(m)
    if mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"Expected a square matrix, got {mat.shape}")
    tol = config.HERM_TOL if tol is None else tol
    deviation = float(np.linalg.norm(mat - mat.conj().T))
    if deviation > tol * max(scale_of(mat), 1e-300):
        raise DimensionError(f"Matrix is not Hermitian (deviation {deviation:.3e})")
    return (mat + mat.conj().T) / 2


def herm_eig(m) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix"""
    evals, evecs = np.linalg.eigh(hermitize(m))
    return evals, evecs


def support(m, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues above rank_tol·λ_max and the isometry onto their span"""
    evals, evecs = herm_eig(m)
    tol = config.RANK_TOL if tol is None else tol
    top = float(np.max(np.abs(evals))) if evals.size else 0.0
    keep = evals > tol * top if top > 0 else np.zeros(evals.shape, dtype=bool)
    return evals[keep], evecs[:, keep]


def rank(m) -> int:
    return int(support(m)[0].size)


def mat_fn(m, fn: Union[MatrixFunction, str]) -> np.ndarray:
    """Apply fn to the spectrum of a Hermitian PSD matrix

    Eigenvalues below -psd_tol·‖m‖ are an error; small negatives are
    clipped to zero. pinv, pinv_sqrt and log2 act on the support only.
    """
    fn = MatrixFunction(fn)
    evals, evecs = herm_eig(m)
    top = float(np.max(np.abs(evals))) if evals.size else 0.0
    if evals.size and evals[0] < -config.PSD_TOL * max(top, 1e-300):
        raise DimensionError(f"Matrix has negative eigenvalue {evals[0]:.3e}")
    evals = np.clip(evals, 0.0, None)
    on_support = evals > config.RANK_TOL * top if top > 0 else np.zeros(evals.shape, dtype=bool)

    values = np.zeros_like(evals)
    if fn is MatrixFunction.SQRT:
        values = np.sqrt(evals)
    elif fn is MatrixFunction.PINV:
        values[on_support] = 1.0 / evals[on_support]
    elif fn is MatrixFunction.PINV_SQRT:
        values[on_support] = 1.0 / np.sqrt(evals[on_support])
    elif fn is MatrixFunction.LOG2:
        values[on_support] = np.log2(evals[on_support])
    return (evecs * values) @ evecs.conj().T


def norms(m) -> Tuple[float, float]:
    """(trace norm, operator norm)"""
    singular = np.linalg.svd(as_matrix(m), compute_uv=False)
    if singular.size == 0:
        return 0.0, 0.0
    return float(np.sum(singular)), float(singular[0])


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh(hermitize(m, tol=np.inf))[0])
