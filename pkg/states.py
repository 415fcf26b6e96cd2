"""
Density matrices with factor structure, purification and state generators
"""
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

import config
from tensor import (
    DimensionError,
    SystemDims,
    as_matrix,
    herm_eig,
    hermitize,
    partial_trace,
    permute_factors,
    scale_of,
    support,
)

logger = logging.getLogger(__name__)


class StateError(ValueError):
    """Raised for invalid states, label collisions and bad generator parameters"""


class RandomMeasure(str, Enum):
    HAAR_PURE = "haar_pure"
    HILBERT_SCHMIDT = "hilbert_schmidt"
    BURES = "bures"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LabeledState:
    """Unit-trace Hermitian PSD operator on labeled factors"""

    mat: np.ndarray
    dims: SystemDims

    def __post_init__(self):
        try:
            mat = hermitize(as_matrix(self.mat, self.dims))
        except DimensionError as e:
            raise StateError(f"Invalid state: {e}") from e
        scale = max(scale_of(mat), 1e-300)
        lowest = float(np.linalg.eigvalsh(mat)[0])
        if lowest < -config.PSD_TOL * scale:
            raise StateError(f"Invalid state: negative eigenvalue {lowest:.3e}")
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > config.TRACE_TOL:
            raise StateError(f"Invalid state: trace {trace:.12f} is not 1")
        object.__setattr__(self, "mat", _frozen(mat))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.dims.labels

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))

    @property
    def rank(self) -> int:
        return int(support(self.mat)[0].size)

    def marginal(self, labels: Iterable[str]) -> "LabeledState":
        """Reduced state on labels (original factor order kept)"""
        keep = set(labels)
        traced = [label for label in self.labels if label not in keep]
        for label in keep:
            self.dims.index(label)
        return LabeledState(partial_trace(self.mat, self.dims, traced), self.dims.subset(keep))

    def permuted(self, order: Sequence[str]) -> "LabeledState":
        return LabeledState(permute_factors(self.mat, self.dims, order), self.dims.reordered(order))

    def relabeled(self, mapping: Dict[str, str]) -> "LabeledState":
        return LabeledState(self.mat, self.dims.renamed(mapping))


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on labeled factors"""

    vec: np.ndarray
    dims: SystemDims

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=np.complex128).reshape(-1)
        if vec.shape != (self.dims.total,):
            raise StateError(f"Vector length {vec.shape[0]} does not match dims {self.dims.to_list()}")
        if not np.all(np.isfinite(vec)):
            raise StateError("Vector has non-finite entries")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-10:
            raise StateError(f"Pure state norm {norm:.12f} is not 1")
        object.__setattr__(self, "vec", _frozen(vec))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.dims.labels

    def density(self) -> LabeledState:
        return LabeledState(np.outer(self.vec, self.vec.conj()), self.dims)

    def marginal(self, labels: Iterable[str]) -> LabeledState:
        keep = self.dims.subset(labels)
        order = list(keep.labels) + [label for label in self.labels if label not in keep]
        t = permute_factors(self.vec, self.dims, order).reshape(keep.total, -1)
        return LabeledState(t @ t.conj().T, keep)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """p = Σ_k coefficients[k]·left[:, k] ⊗ right[:, k]"""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray
    left_dims: SystemDims
    right_dims: SystemDims

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ak,bk->ab", self.coefficients, self.left, self.right).reshape(-1)


def purify(s: LabeledState, new_label: str) -> PureState:
    """Minimal purification Σ_i √λ_i |e_i⟩⊗|i⟩; the new factor has dimension rank(s)"""
    if new_label in s.dims:
        raise StateError(f"Label {new_label!r} already used by {list(s.labels)}")
    evals, evecs = support(s.mat)
    amplitudes = evecs * np.sqrt(evals)
    vec = amplitudes.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    logger.debug(f"Purifying {list(s.labels)} with {new_label} of dimension {evals.size}")
    return PureState(vec, s.dims.concat(SystemDims(((new_label, int(evals.size)),))))


def schmidt(p: PureState, cut: Tuple[Iterable[str], Iterable[str]]) -> SchmidtDecomposition:
    """Schmidt decomposition of p across the bipartition cut = (left, right)"""
    left, right = (tuple(side) for side in cut)
    if not left or not right:
        raise StateError("Both sides of the cut must be nonempty")
    if set(left) & set(right) or sorted(left + right) != sorted(p.labels):
        raise StateError(f"Cut {left}|{right} does not partition {list(p.labels)}")
    left_dims = p.dims.subset(left).reordered(left)
    right_dims = p.dims.subset(right).reordered(right)
    m = permute_factors(p.vec, p.dims, list(left) + list(right)).reshape(left_dims.total, right_dims.total)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > config.RANK_TOL * s[0]
    return SchmidtDecomposition(
        coefficients=s[keep],
        left=u[:, keep],
        right=vh[keep, :].T,
        left_dims=left_dims,
        right_dims=right_dims,
    )


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator named in report headers as config.RNG_NAME"""
    return np.random.Generator(np.random.Philox(int(seed)))


def instance_seed(seed: int, instance_id: int) -> int:
    """Independent 64-bit seed for one sweep instance"""
    state = np.random.SeedSequence([int(seed), int(instance_id)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a Ginibre matrix with the R-diagonal phases removed"""
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_state(
    dims: SystemDims,
    rank: int,
    measure: Union[RandomMeasure, str] = RandomMeasure.HILBERT_SCHMIDT,
    seed: int = config.DEFAULT_SEED,
) -> LabeledState:
    """Random density matrix of the given rank, deterministic in seed"""
    measure = RandomMeasure(measure)
    d = dims.total
    if not 1 <= rank <= d:
        raise StateError(f"Rank {rank} out of range for dimension {d}")
    if measure is RandomMeasure.HAAR_PURE and rank != 1:
        raise StateError("haar_pure draws rank-1 states only")

    rng = make_rng(seed)
    g = _ginibre(rng, d, rank)
    if measure is RandomMeasure.BURES:
        g = (np.eye(d) + haar_unitary(d, rng)) @ g
    mat = g @ g.conj().T
    return LabeledState(mat / np.trace(mat).real, dims)


def random_pure_state(dims: SystemDims, seed: int) -> PureState:
    rng = make_rng(seed)
    vec = _ginibre(rng, dims.total, 1)[:, 0]
    return PureState(vec / np.linalg.norm(vec), dims)


def project_to_state(m, dims: SystemDims) -> LabeledState:
    """Nearest unit-trace PSD operator by eigenvalue clipping"""
    evals, evecs = herm_eig(as_matrix(m, dims))
    evals = np.clip(evals, 0.0, None)
    if evals.sum() <= 0:
        raise StateError("Operator has no positive part")
    mat = (evecs * (evals / evals.sum())) @ evecs.conj().T
    return LabeledState(mat, dims)


def tensor_states(a: LabeledState, b: LabeledState) -> LabeledState:
    """a ⊗ b on the concatenated factors"""
    clash = set(a.labels) & set(b.labels)
    if clash:
        raise StateError(f"Label collision: {sorted(clash)}")
    return LabeledState(np.kron(a.mat, b.mat), a.dims.concat(b.dims))


# Fixed single-qubit states for the named fixtures
_PRODUCT_FACTORS = (
    np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]]),
    np.array([[0.6, 0.25j], [-0.25j, 0.4]]),
    np.array([[0.85, 0.1], [0.1, 0.15]]),
)


def _max_entangled(d: int) -> LabeledState:
    vec = np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)
    return LabeledState(np.outer(vec, vec.conj()), SystemDims.of(A=d, B=d))


def _ghz3() -> LabeledState:
    vec = np.zeros(8, dtype=np.complex128)
    vec[0] = vec[7] = 1 / np.sqrt(2)
    return LabeledState(np.outer(vec, vec.conj()), SystemDims.of(A=2, B=2, C=2))


def _product(factors: Sequence[np.ndarray]) -> LabeledState:
    rho_a, rho_b, rho_c = (as_matrix(f) for f in factors)
    dims = SystemDims.of(A=rho_a.shape[0], B=rho_b.shape[0], C=rho_c.shape[0])
    return LabeledState(np.kron(np.kron(rho_a, rho_b), rho_c), dims)


def _cq_markov() -> LabeledState:
    """Σ_c p_c ρ_A^c ⊗ ρ_B^c ⊗ |c⟩⟨c|, a Markov chain A - C - B"""
    probabilities = (0.35, 0.65)
    rho_a = (
        np.array([[0.9, 0.0], [0.0, 0.1]]),
        np.array([[0.5, 0.4], [0.4, 0.5]]),
    )
    rho_b = (
        np.array([[0.3, 0.2j], [-0.2j, 0.7]]),
        np.array([[0.8, 0.1], [0.1, 0.2]]),
    )
    mat = np.zeros((8, 8), dtype=np.complex128)
    for c, p in enumerate(probabilities):
        flag = np.zeros((2, 2))
        flag[c, c] = 1.0
        mat += p * np.kron(np.kron(rho_a[c], rho_b[c]), flag)
    return LabeledState(mat, SystemDims.of(A=2, B=2, C=2))


_NAME_PATTERN = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(\s*(\d+)\s*\))?\s*$")

NAMED_STATES = ("ghz3", "max_entangled", "product", "cq_markov")


def named_state(
    name: str,
    d: Optional[int] = None,
    factors: Optional[Sequence[np.ndarray]] = None,
) -> LabeledState:
    """Canonical fixture states: ghz3, max_entangled(d), product, cq_markov

    Args:
        name: fixture name; "max_entangled(3)" is accepted as well
        d: local dimension for max_entangled (default 2)
        factors: (ρ_A, ρ_B, ρ_C) for product
    """
    match = _NAME_PATTERN.match(name or "")
    if not match or match.group(1) not in NAMED_STATES:
        raise StateError(f"Unknown named state {name!r}; expected one of {', '.join(NAMED_STATES)}")
    key, argument = match.group(1), match.group(2)

    if key == "ghz3":
        return _ghz3()
    if key == "max_entangled":
        size = int(argument) if argument else (d or 2)
        if size < 1:
            raise StateError(f"max_entangled needs d ≥ 1, got {size}")
        return _max_entangled(size)
    if key == "product":
        return _product(factors if factors is not None else _PRODUCT_FACTORS)
    return _cq_markov()
