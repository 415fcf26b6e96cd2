"""
Entropies, fidelity and the small SDPs that express them

All logarithms are base 2; fidelity uses the squared convention
F(ρ, σ) = ‖√ρ √σ‖₁².
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy.special import entr

from sdp import ProgramBuilder, Sense, SolveOptions, coefficients, combine, hermitian_basis, solve
from states import LabeledState, project_to_state
from tensor import DimensionError, MatrixFunction, hermitize, mat_fn, norms, support

logger = logging.getLogger(__name__)

Labels = Union[str, Iterable[str]]

ZERO_FIDELITY = 1e-15


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    SDP = "sdp"


@dataclass(frozen=True, eq=False)
class EntropyReport:
    """A scalar in bits (or a fidelity) with how it was obtained"""

    value: float
    method: Method
    residual: float = 0.0
    optimizer: Optional[LabeledState] = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"EntropyReport value must be finite, got {self.value}")
        if self.residual < 0:
            raise ValueError(f"EntropyReport residual must be non-negative, got {self.residual}")
        object.__setattr__(self, "method", Method(self.method))


def _labels(labels: Labels) -> Tuple[str, ...]:
    return (labels,) if isinstance(labels, str) else tuple(labels)


def _spectrum_entropy(mat: np.ndarray) -> float:
    evals = np.clip(np.linalg.eigvalsh(hermitize(mat)), 0.0, None)
    return float(np.sum(entr(evals)) / np.log(2))


def von_neumann(s: LabeledState, labels: Optional[Labels] = None) -> float:
    """H(labels) in bits; the whole state when labels is None"""
    if labels is None:
        return _spectrum_entropy(s.mat)
    return _spectrum_entropy(s.marginal(_labels(labels)).mat)


def cqmi(s: LabeledState, a: Labels = "A", b: Labels = "B", c: Labels = "C") -> float:
    """I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C); other factors are traced out"""
    a, b, c = _labels(a), _labels(b), _labels(c)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise DimensionError(f"Overlapping label groups {a}, {b}, {c}")
    value = (
        von_neumann(s, a + c)
        + von_neumann(s, b + c)
        - von_neumann(s, a + b + c)
        - von_neumann(s, c)
    )
    if value < -1e-9:
        logger.warning(f"Negative conditional mutual information {value:.3e}")
    return value


def _aligned(a: LabeledState, b: LabeledState) -> Tuple[np.ndarray, np.ndarray]:
    if a.dims.total != b.dims.total:
        raise DimensionError(f"Fidelity between dimensions {a.dims.total} and {b.dims.total}")
    if a.labels != b.labels and sorted(a.labels) == sorted(b.labels):
        b = b.permuted(a.labels)
    return a.mat, b.mat


def fidelity(a: LabeledState, b: LabeledState) -> float:
    """Uhlmann fidelity ‖√a √b‖₁², clipped to [0, 1]"""
    ma, mb = _aligned(a, b)
    root = norms(mat_fn(ma, MatrixFunction.SQRT) @ mat_fn(mb, MatrixFunction.SQRT))[0]
    return float(np.clip(root ** 2, 0.0, 1.0))


def fidelity_alberti(
    a: LabeledState, b: LabeledState, opts: Optional[SolveOptions] = None
) -> EntropyReport:
    """Fidelity from the root-fidelity SDP on supp(a) ⊕ supp(b)

    max Re tr Z  s.t. [[a, Z], [Z†, b]] ⪰ 0, whose dual is Alberti's
    min over R > 0 of tr[aR⁻¹]·tr[bR] after the AM-GM step.
    """
    ma, mb = _aligned(a, b)
    evals_a, va = support(ma)
    evals_b, vb = support(mb)
    ra, rb = evals_a.size, evals_b.size

    builder = ProgramBuilder([ra + rb], sense=Sense.MAX)
    overlap = va.conj().T @ vb
    objective = np.zeros((ra + rb, ra + rb), dtype=np.complex128)
    objective[:ra, ra:] = overlap / 2
    objective[ra:, :ra] = overlap.conj().T / 2
    builder.set_objective(0, objective)

    basis_a, basis_b = hermitian_basis(ra), hermitian_basis(rb)
    builder.add_group(coefficients(basis_a, np.diag(evals_a)), {0: (0, basis_a)}, name="upper-left = a")
    builder.add_group(coefficients(basis_b, np.diag(evals_b)), {0: (ra, basis_b)}, name="lower-right = b")

    sol = solve(builder.build(), opts).raise_for_status()
    root = max(0.0, (sol.primal_obj + sol.dual_obj) / 2)
    value = float(np.clip(root ** 2, 0.0, 1.0))
    closed = fidelity(a, b)
    return EntropyReport(value, Method.SDP, residual=abs(value - closed))


def _min_trace_cover(mat: np.ndarray, d_a: int, d_c: int, opts: Optional[SolveOptions] = None):
    """min tr Y s.t. mat ≤ 1_A ⊗ Y, solved as its dual max ⟨mat, X⟩ s.t. tr_A X = 1_C"""
    builder = ProgramBuilder([d_a * d_c], sense=Sense.MAX)
    builder.set_objective(0, mat)
    basis = hermitian_basis(d_c)
    identity = np.eye(d_a)
    stack = np.stack([np.kron(identity, h) for h in basis])
    targets = np.trace(basis, axis1=1, axis2=2).real
    builder.add_group(targets, {0: (0, stack)}, name="tr_A X = 1_C")
    sol = solve(builder.build(), opts).raise_for_status()
    return sol, hermitize(combine(basis, sol.y), tol=np.inf)


def hmin_cond(
    s: LabeledState,
    a: Labels = "A",
    c: Labels = "C",
    opts: Optional[SolveOptions] = None,
) -> EntropyReport:
    """H_min(A|C) = −log₂ min{tr Y_C : σ_AC ≤ 1_A ⊗ Y_C}

    The optimizer ω_C = Y_C / tr Y_C is returned with the report.
    """
    a, c = _labels(a), _labels(c)
    sigma = s.marginal(a + c).permuted(a + c)
    d_a = sigma.dims.subset(a).total
    c_dims = sigma.dims.subset(c).reordered(c)

    sol, y = _min_trace_cover(sigma.mat, d_a, c_dims.total, opts)
    cover = (sol.primal_obj + sol.dual_obj) / 2
    if cover <= 0:
        raise DimensionError(f"Min-entropy program returned non-positive cover {cover:.3e}")
    omega = project_to_state(y, c_dims) if c_dims.total > 1 else LabeledState(np.eye(1), c_dims)
    logger.debug(f"H_min({','.join(a)}|{','.join(c)}) cover {cover:.9f}, gap {sol.gap:.2e}")
    return EntropyReport(-math.log2(cover), Method.SDP, residual=sol.gap, optimizer=omega)


def mes_fidelity_of_recovery(sigma: LabeledState, a: Labels = "A", c: Labels = "C") -> float:
    """(1/d_A)·2^{−H_min(A|C)}, the recovery fidelity of a maximally entangled target"""
    a = _labels(a)
    d_a = sigma.dims.subset(a).total
    return 2.0 ** (-hmin_cond(sigma, a, c).value) / d_a


def pure_target_fidelity(
    psi: LabeledState,
    sigma: LabeledState,
    a: Labels = "A",
    c: Labels = "C",
    opts: Optional[SolveOptions] = None,
) -> EntropyReport:
    """Recovery fidelity for a pure target ψ_AB

    min tr Y_C s.t. (√ψ_A ⊗ 1) σ_AC (√ψ_A ⊗ 1) ≤ 1 ⊗ Y_C, with the A factor
    compressed to supp(ψ_A) so rank-deficient marginals stay well posed.
    """
    a, c = _labels(a), _labels(c)
    if psi.purity < 1 - 1e-8:
        raise DimensionError(f"Target state is not pure (purity {psi.purity:.9f})")
    psi_a = psi.marginal(a).permuted(a)
    sigma_ac = sigma.marginal(a + c).permuted(a + c)
    if psi_a.dims != sigma_ac.dims.subset(a).reordered(a):
        raise DimensionError(f"Shared factors differ: {psi_a.dims.to_list()} vs {sigma_ac.dims.to_list()}")
    d_c = sigma_ac.dims.subset(c).total

    evals, v = support(psi_a.mat)
    left = np.kron(np.sqrt(evals)[:, None] * v.conj().T, np.eye(d_c))
    compressed = left @ sigma_ac.mat @ left.conj().T

    sol, y = _min_trace_cover(compressed, evals.size, d_c, opts)
    value = (sol.primal_obj + sol.dual_obj) / 2
    c_dims = sigma_ac.dims.subset(c).reordered(c)
    omega = None
    if value > 0:
        omega = project_to_state(y, c_dims) if c_dims.total > 1 else LabeledState(np.eye(1), c_dims)
    return EntropyReport(float(np.clip(value, 0.0, 1.0)), Method.SDP, residual=sol.gap, optimizer=omega)


def renyi_half(a: LabeledState, b: LabeledState) -> float:
    """D_½(a‖b) = −log₂ F(a, b); math.inf when the states are orthogonal"""
    value = fidelity(a, b)
    if value <= ZERO_FIDELITY:
        return math.inf
    return -math.log2(value)
