"""
Quantum channels in Choi form, channel application and the Petz recovery map

Choi convention: J = Σ_ij |i⟩⟨j|_in ⊗ Γ(|i⟩⟨j|)_out with the input factors
first, so Γ(X) = tr_in[(X^T ⊗ 1_out) J].
"""
import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

import config
from states import LabeledState
from tensor import (
    DimensionError,
    MatrixFunction,
    SystemDims,
    as_matrix,
    mat_fn,
    min_eigenvalue,
    permute_factors,
    support,
)

logger = logging.getLogger(__name__)

_IN = "in:"
_OUT = "out:"


class ChannelError(ValueError):
    """Raised when a channel and its input do not fit together"""


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi operator on in ⊗ out; in and out may reuse a label (e.g. C → AC)"""

    mat: np.ndarray
    in_dims: SystemDims
    out_dims: SystemDims

    def __post_init__(self):
        try:
            mat = as_matrix(self.mat, SystemDims(((_IN, self.in_dims.total), (_OUT, self.out_dims.total))))
        except DimensionError as e:
            raise ChannelError(f"Invalid Choi matrix: {e}") from e
        mat = np.array((mat + mat.conj().T) / 2, copy=True)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def joint_dims(self) -> SystemDims:
        """in ⊗ out factors with prefixed (collision-free) labels"""
        return self.in_dims.renamed({l: _IN + l for l in self.in_dims.labels}).concat(
            self.out_dims.renamed({l: _OUT + l for l in self.out_dims.labels})
        )

    def output_trace(self) -> np.ndarray:
        """tr_out J, an operator on the input space"""
        d_in, d_out = self.in_dims.total, self.out_dims.total
        return np.einsum("aobo->ab", self.mat.reshape(d_in, d_out, d_in, d_out))

    def with_output_order(self, order: Sequence[str]) -> "ChoiMatrix":
        joint = self.joint_dims
        target = [_IN + l for l in self.in_dims.labels] + [_OUT + l for l in order]
        mat = permute_factors(self.mat, joint, target)
        return ChoiMatrix(mat, self.in_dims, self.out_dims.reordered(order))

    def tensor(self, other: "ChoiMatrix") -> "ChoiMatrix":
        """Choi matrix of the product channel self ⊗ other"""
        left = ("in1", self.in_dims.total), ("out1", self.out_dims.total)
        right = ("in2", other.in_dims.total), ("out2", other.out_dims.total)
        dims = SystemDims(left + right)
        mat = permute_factors(np.kron(self.mat, other.mat), dims, ["in1", "in2", "out1", "out2"])
        return ChoiMatrix(mat, self.in_dims.concat(other.in_dims), self.out_dims.concat(other.out_dims))


class CptpReport(NamedTuple):
    ok: bool
    psd_violation: float
    tp_violation: float


def choi_of_identity(d: int, label: str = "A") -> ChoiMatrix:
    """Unnormalized maximally entangled operator Σ_ij |ii⟩⟨jj|"""
    if d < 1:
        raise ChannelError(f"Dimension must be at least 1, got {d}")
    vec = np.eye(d, dtype=np.complex128).reshape(-1)
    dims = SystemDims(((label, d),))
    return ChoiMatrix(np.outer(vec, vec), dims, dims)


def apply_choi(
    j: ChoiMatrix,
    state: LabeledState,
    spectator_labels: Optional[Iterable[str]] = None,
) -> LabeledState:
    """Apply the channel to the factors of state named by j.in_dims

    The result lives on spectators ⊗ out, spectators first.
    """
    acted = j.in_dims.labels
    for label, dim in j.in_dims:
        if label not in state.dims:
            raise ChannelError(f"Input factor {label!r} missing from state {list(state.labels)}")
        if state.dims.dim_of(label) != dim:
            raise ChannelError(f"Factor {label!r} has dimension {state.dims.dim_of(label)}, channel expects {dim}")

    rest = [label for label in state.labels if label not in acted]
    spectators = list(spectator_labels) if spectator_labels is not None else rest
    if sorted(spectators) != sorted(rest):
        raise ChannelError(f"Spectators {spectators} do not match untouched factors {rest}")
    clash = set(spectators) & set(j.out_dims.labels)
    if clash:
        raise ChannelError(f"Output labels collide with spectators: {sorted(clash)}")

    ordered = permute_factors(state.mat, state.dims, spectators + list(acted))
    d_s = state.dims.subset(spectators).total
    d_in, d_out = j.in_dims.total, j.out_dims.total
    rho4 = ordered.reshape(d_s, d_in, d_s, d_in)
    j4 = j.mat.reshape(d_in, d_out, d_in, d_out)
    out = np.einsum("aibj,icjd->acbd", rho4, j4).reshape(d_s * d_out, d_s * d_out)

    trace = float(np.trace(out).real)
    if abs(trace - 1.0) > config.CPTP_TOL:
        raise ChannelError(f"Channel output has trace {trace:.9f}; channel is not trace preserving")
    out_dims = state.dims.subset(spectators).reordered(spectators).concat(j.out_dims)
    return LabeledState(out / trace, out_dims)


def is_cptp(j: ChoiMatrix, tol: Optional[float] = None) -> CptpReport:
    """Largest negative eigenvalue magnitude and ‖tr_out J − 1_in‖ (Frobenius)"""
    tol = config.CPTP_TOL if tol is None else tol
    psd_violation = max(0.0, -min_eigenvalue(j.mat))
    tp_violation = float(np.linalg.norm(j.output_trace() - np.eye(j.in_dims.total)))
    return CptpReport(psd_violation <= tol and tp_violation <= tol, psd_violation, tp_violation)


def extend_off_support(j: ChoiMatrix, projector: np.ndarray, fallback: np.ndarray) -> ChoiMatrix:
    """Send the input orthocomplement of projector to the fixed output fallback"""
    complement = np.eye(j.in_dims.total) - projector
    return ChoiMatrix(j.mat + np.kron(complement.T, fallback), j.in_dims, j.out_dims)


def normalize_trace_preserving(j: ChoiMatrix) -> ChoiMatrix:
    """(M^{-1/2} ⊗ 1) J (M^{-1/2} ⊗ 1) with M = tr_out J; keeps J PSD"""
    m = j.output_trace()
    correction = float(np.linalg.norm(m - np.eye(j.in_dims.total)))
    if correction > 1e-6:
        logger.warning(f"Renormalizing channel with trace defect {correction:.3e}")
    else:
        logger.debug(f"Renormalizing channel with trace defect {correction:.3e}")
    n = np.kron(mat_fn(m, MatrixFunction.PINV_SQRT), np.eye(j.out_dims.total))
    return ChoiMatrix(n @ j.mat @ n, j.in_dims, j.out_dims)


def _as_labels(labels: Union[str, Iterable[str]]) -> Sequence[str]:
    return [labels] if isinstance(labels, str) else list(labels)


def petz_map(
    rho: LabeledState,
    recover_label: Union[str, Iterable[str]] = "A",
    anchor_label: Union[str, Iterable[str]] = "C",
) -> ChoiMatrix:
    """Petz recovery map ρ_AC^{1/2} ρ_C^{-1/2} (·) ρ_C^{-1/2} ρ_AC^{1/2} as a channel C → AC

    Inputs outside supp(ρ_C) are measured and replaced by ρ_AC, so the
    map is CPTP on the whole input space. Output factors follow rho's order.
    """
    recover = _as_labels(recover_label)
    anchor = _as_labels(anchor_label)
    if sorted(recover + anchor) != sorted(rho.labels):
        raise ChannelError(f"Labels {recover} + {anchor} do not cover state factors {list(rho.labels)}")

    ordered = rho.permuted(recover + anchor)
    d_r = ordered.dims.subset(recover).total
    anchor_dims = ordered.dims.subset(anchor).reordered(anchor)
    d_c = anchor_dims.total
    rho_c = ordered.marginal(anchor).permuted(anchor).mat

    kp = mat_fn(ordered.mat, MatrixFunction.SQRT) @ np.kron(np.eye(d_r), mat_fn(rho_c, MatrixFunction.PINV_SQRT))
    k4 = kp.reshape(d_r * d_c, d_r, d_c)
    mat = np.einsum("oac,pad->codp", k4, k4.conj()).reshape(d_c * d_r * d_c, d_c * d_r * d_c)

    _, basis = support(rho_c)
    projector = basis @ basis.conj().T
    choi = ChoiMatrix(mat, anchor_dims, ordered.dims)
    choi = extend_off_support(choi, projector, ordered.mat)
    return choi.with_output_order(list(rho.labels))
