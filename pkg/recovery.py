"""
Fidelity of recovery F_{C→B}(ρ_AB ‖ σ_AC) as a certified primal-dual SDP

One joint program yields the primal optimum (root fidelity and the
Choi operator τ_ADB of the recovery map on the purifying space) and the
dual optimum (L_AB, R_AB, Q_AD). Public values use the squared fidelity
convention; the SDPs work with the root fidelity.

Factor roles: A is shared by ρ and σ, B is the rest of ρ, C the rest of σ
and D purifies σ_AC with dimension rank(σ_AC).
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

import config
from channels import ChoiMatrix, apply_choi, extend_off_support, normalize_trace_preserving, petz_map
from entropy import cqmi, fidelity, renyi_half
from sdp import (
    CertificateReport,
    ProgramBuilder,
    Sense,
    SolveOptions,
    check_certificate,
    coefficients,
    combine,
    hermitian_basis,
    solve,
)
from states import LabeledState, PureState, purify, tensor_states
from tensor import DimensionError, MatrixFunction, SystemDims, mat_fn, permute_factors, support

logger = logging.getLogger(__name__)

Labels = Union[str, Iterable[str]]

FEASIBILITY_TOL = 1e-7
GAP_TOL = 1e-5

# Complement weight of R per unit of ρ outside supp(σ_A) ⊗ B, per unit of tr[σQ];
# caps the objective contributed by that leak at 1/LEAK_WEIGHT.
LEAK_WEIGHT = 1e9
# Positive-definiteness margins tried for the witness, relative to its scale, largest first.
WITNESS_MARGINS = (1e-9, 1e-10, 1e-11, 1e-12, 1e-13)


class SizeLimitError(ValueError):
    """Raised when a recovery SDP would exceed config.MAX_PRODUCT_BLOCK"""


def _labels(labels: Labels) -> Tuple[str, ...]:
    return (labels,) if isinstance(labels, str) else tuple(labels)


def _fresh_label(taken: Iterable[str], base: str = "D") -> str:
    taken = set(taken)
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _op_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _swap_last(m: np.ndarray, d1: int, d2: int, d3: int) -> np.ndarray:
    """Square m on factors (1, 2, 3) reordered to (1, 3, 2)"""
    dims = SystemDims((("f1", d1), ("f2", d2), ("f3", d3)))
    return permute_factors(m, dims, ["f1", "f3", "f2"])


@dataclass(frozen=True, eq=False)
class AlbertiPair:
    """Witness (R_AB, Q_AD) for F ≤ tr[ρ R⁻¹]·tr[σ_AD Q] with Q ⊗ 1_B ⪰ R ⊗ 1_D

    R and Q are positive definite on the full spaces AB and AD.
    """

    r: np.ndarray
    q: np.ndarray
    d_a: int
    d_b: int
    d_d: int
    rho: np.ndarray
    sigma_ad: np.ndarray

    def __post_init__(self):
        for name in ("r", "q", "rho", "sigma_ad"):
            arr = np.array(getattr(self, name), dtype=np.complex128, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.r.shape != (self.d_a * self.d_b,) * 2 or self.q.shape != (self.d_a * self.d_d,) * 2:
            raise DimensionError(f"Alberti pair shapes {self.r.shape}, {self.q.shape} do not match dims")

    def trace_terms(self) -> Tuple[float, float]:
        """(tr[ρ R⁻¹], tr[σ_AD Q])"""
        left = float(np.trace(np.linalg.solve(self.r, self.rho)).real)
        right = float(np.trace(self.sigma_ad @ self.q).real)
        return left, right

    def objective(self) -> float:
        left, right = self.trace_terms()
        return left * right

    def difference(self) -> np.ndarray:
        """Q ⊗ 1_B − R ⊗ 1_D on A ⊗ D ⊗ B"""
        q_lift = np.kron(self.q, np.eye(self.d_b))
        r_lift = _swap_last(np.kron(self.r, np.eye(self.d_d)), self.d_a, self.d_b, self.d_d)
        return _herm(q_lift - r_lift)

    def feasibility_violation(self) -> float:
        return max(0.0, -float(np.linalg.eigvalsh(self.difference())[0]))

    def scale(self) -> float:
        return max(1.0, _op_norm(self.q), _op_norm(self.r))

    def is_feasible(self, tol: float = FEASIBILITY_TOL) -> bool:
        return self.feasibility_violation() <= tol * self.scale()

    def tensor(self, other: "AlbertiPair") -> "AlbertiPair":
        """(R ⊗ R', Q ⊗ Q') on (AA')(BB') and (AA')(DD')"""

        def interleave(m1, m2, x1, y1, x2, y2):
            dims = SystemDims((("x1", x1), ("y1", y1), ("x2", x2), ("y2", y2)))
            return permute_factors(np.kron(m1, m2), dims, ["x1", "x2", "y1", "y2"])

        return AlbertiPair(
            r=interleave(self.r, other.r, self.d_a, self.d_b, other.d_a, other.d_b),
            q=interleave(self.q, other.q, self.d_a, self.d_d, other.d_a, other.d_d),
            d_a=self.d_a * other.d_a,
            d_b=self.d_b * other.d_b,
            d_d=self.d_d * other.d_d,
            rho=interleave(self.rho, other.rho, self.d_a, self.d_b, other.d_a, other.d_b),
            sigma_ad=interleave(self.sigma_ad, other.sigma_ad, self.d_a, self.d_d, other.d_a, other.d_d),
        )


class DualSolution(NamedTuple):
    value: float
    l: np.ndarray
    r: np.ndarray
    q: np.ndarray
    alberti: AlbertiPair


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Certified FoR value with both bounds, the recovery channel and the dual witness"""

    value: float
    primal_lb: float
    dual_ub: float
    gap: float
    recovery_channel: ChoiMatrix
    alberti_pair: AlbertiPair
    achieved_fidelity: float
    certificate: CertificateReport
    iterations: int
    shared: Tuple[str, ...] = ()

    def violations(self) -> List[str]:
        """Names of the result invariants that do not hold"""
        failed = []
        if self.primal_lb > self.dual_ub:
            failed.append("bounds_ordered")
        if self.gap > GAP_TOL * (1 + self.value):
            failed.append("gap")
        if not self.primal_lb - FEASIBILITY_TOL <= self.achieved_fidelity <= self.dual_ub + FEASIBILITY_TOL:
            failed.append("achieved_fidelity")
        if not self.alberti_pair.is_feasible():
            failed.append("alberti_feasible")
        if self.alberti_pair.objective() > self.dual_ub + FEASIBILITY_TOL:
            failed.append("alberti_objective")
        if not self.certificate.ok:
            failed.append("certificate")
        return failed


class RecoveryProgram:
    """The joint FoR SDP for one (ρ_AB, σ_AC) instance

    Block 0 holds [[ρ_r, Z], [Z†, W†ω_AB W]] on supp(ρ) ⊕ (supp(σ_A) ⊗ B);
    block 1 holds τ_ADB with tr_B τ = 1_AD and ω_AB = tr_D[√σ_AD τ √σ_AD].
    """

    def __init__(self, rho: LabeledState, sigma: LabeledState, shared: Optional[Sequence[str]] = None):
        if shared is None:
            shared = tuple(label for label in rho.labels if label in sigma.dims)
        self.shared = _labels(shared)
        for label in self.shared:
            if label not in rho.dims or label not in sigma.dims:
                raise DimensionError(f"Shared factor {label!r} missing from one of the states")
            if rho.dims.dim_of(label) != sigma.dims.dim_of(label):
                raise DimensionError(
                    f"Shared factor {label!r} has dimensions {rho.dims.dim_of(label)} and {sigma.dims.dim_of(label)}"
                )
        self.target_labels = tuple(label for label in rho.labels if label not in self.shared)
        self.source_labels = tuple(label for label in sigma.labels if label not in self.shared)
        self.rho = rho.permuted(self.shared + self.target_labels)
        self.sigma = sigma.permuted(self.shared + self.source_labels)
        self.d_label = _fresh_label(rho.labels + sigma.labels)

        self.d_a = self.rho.dims.subset(self.shared).total
        self.d_b = self.rho.dims.subset(self.target_labels).total
        self.d_c = self.sigma.dims.subset(self.source_labels).total

        purified = purify(self.sigma, self.d_label)
        self.d_d = purified.dims.dim_of(self.d_label)
        self.psi = purified.vec.reshape(self.d_a, self.d_c, self.d_d)
        self.sigma_ad = np.einsum("ack,bcl->akbl", self.psi, self.psi.conj()).reshape(
            self.d_a * self.d_d, self.d_a * self.d_d
        )
        self.sqrt_sigma_ad = mat_fn(self.sigma_ad, MatrixFunction.SQRT)

        self.rho_evals, self.v = support(self.rho.mat)
        sigma_a = np.einsum("ack,bck->ab", self.psi, self.psi.conj())
        _, self.u_a = support(sigma_a)
        self.w = np.kron(self.u_a, np.eye(self.d_b))

        self.r_rho = self.rho_evals.size
        self.r_w = self.w.shape[1]
        self.tau_dim = self.d_a * self.d_d * self.d_b
        self.problem = None
        self._rows = None
        self._bases = None

    @property
    def real_block_dim(self) -> int:
        """Summed block dimension counted as real symmetric (complex blocks count twice)"""
        return 2 * (self.r_rho + self.r_w + self.tau_dim)

    def check_size(self, limit: Optional[int] = None):
        limit = config.MAX_PRODUCT_BLOCK if limit is None else limit
        if self.real_block_dim > limit:
            raise SizeLimitError(
                f"Recovery SDP needs {self.real_block_dim} real block dimensions, limit is {limit}"
            )

    def _lift_b_to_adb(self, ops: np.ndarray) -> np.ndarray:
        """Stack of G_AB ↦ K (G ⊗ 1_D) K with factors ordered A, D, B"""
        k = ops.shape[0]
        d_a, d_b, d_d = self.d_a, self.d_b, self.d_d
        g4 = ops.reshape(k, d_a, d_b, d_a, d_b)
        lifted = np.einsum("kabcd,ef->kaebcfd", g4, np.eye(d_d)).reshape(k, self.tau_dim, self.tau_dim)
        kk = np.kron(self.sqrt_sigma_ad, np.eye(d_b))
        return kk @ lifted @ kk

    def build(self):
        builder = ProgramBuilder([self.r_rho + self.r_w, self.tau_dim], sense=Sense.MAX)
        overlap = self.v.conj().T @ self.w
        objective = np.zeros((self.r_rho + self.r_w,) * 2, dtype=np.complex128)
        objective[: self.r_rho, self.r_rho:] = overlap / 2
        objective[self.r_rho:, : self.r_rho] = overlap.conj().T / 2
        builder.set_objective(0, objective)

        basis_rho = hermitian_basis(self.r_rho)
        basis_w = hermitian_basis(self.r_w)
        basis_ad = hermitian_basis(self.d_a * self.d_d)

        rows_l = builder.add_group(
            coefficients(basis_rho, np.diag(self.rho_evals)), {0: (0, basis_rho)}, name="ρ block"
        )
        recovered = np.einsum("ij,kjl,ml->kim", self.w, basis_w, self.w.conj())
        rows_r = builder.add_group(
            np.zeros(basis_w.shape[0]),
            {0: (self.r_rho, basis_w), 1: (0, -self._lift_b_to_adb(recovered))},
            name="recovered block",
        )
        tp = np.stack([np.kron(h, np.eye(self.d_b)) for h in basis_ad])
        rows_q = builder.add_group(
            np.trace(basis_ad, axis1=1, axis2=2).real, {1: (0, tp)}, name="tr_B τ = 1_AD"
        )
        self.problem = builder.build()
        self._rows = (rows_l, rows_r, rows_q)
        self._bases = (basis_rho, basis_w, basis_ad)
        logger.debug(
            f"FoR program: blocks {self.problem.block_dims}, {self.problem.num_constraints} constraints, "
            f"D={self.d_d}"
        )
        return self.problem

    def solve(self, opts: Optional[SolveOptions] = None):
        if self.problem is None:
            self.build()
        return solve(self.problem, opts).raise_for_status()

    # primal readout

    def tau(self, sol) -> ChoiMatrix:
        """τ as a channel A ⊗ D → B"""
        in_dims = self.rho.dims.subset(self.shared).reordered(self.shared).concat(
            SystemDims(((self.d_label, self.d_d),))
        )
        out_dims = self.rho.dims.subset(self.target_labels).reordered(self.target_labels)
        return ChoiMatrix(sol.x[1], in_dims, out_dims)

    def recovery_channel(self, sol) -> ChoiMatrix:
        """Channel C → B read off τ through the Schmidt decomposition AD : C of the purification"""
        psi_mat = self.psi.transpose(0, 2, 1).reshape(self.d_a * self.d_d, self.d_c)
        u, s, vh = np.linalg.svd(psi_mat, full_matrices=False)
        m = int(np.sum(s > config.RANK_TOL * s[0]))
        f, g = u[:, :m], vh[:m]

        d_ad = self.d_a * self.d_d
        tau4 = np.asarray(sol.x[1]).reshape(d_ad, self.d_b, d_ad, self.d_b)
        t = np.einsum("xm,xbyc,yn->mbnc", f.conj(), tau4, f)
        j = np.einsum("mc,mbnd,ne->cbed", g.conj(), t, g).reshape(self.d_c * self.d_b, self.d_c * self.d_b)

        in_dims = self.sigma.dims.subset(self.source_labels).reordered(self.source_labels)
        out_dims = self.rho.dims.subset(self.target_labels).reordered(self.target_labels)
        channel = ChoiMatrix(j, in_dims, out_dims)
        projector = g.T @ g.conj()
        fallback = self.rho.marginal(self.target_labels).permuted(self.target_labels).mat
        return normalize_trace_preserving(extend_off_support(channel, projector, fallback))

    def achieved_fidelity(self, channel: ChoiMatrix) -> float:
        recovered = apply_choi(channel, self.sigma, spectator_labels=list(self.shared))
        return fidelity(self.rho, recovered)

    # dual readout

    def dual_blocks(self, sol) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(L_AB, R_AB, Q_AD) from the dual vector"""
        rows_l, rows_r, rows_q = self._rows
        basis_rho, basis_w, basis_ad = self._bases
        l_r = combine(basis_rho, sol.y[rows_l])
        r_r = combine(basis_w, sol.y[rows_r])
        q = combine(basis_ad, sol.y[rows_q])
        l_full = self.v @ l_r @ self.v.conj().T
        r_full = self.w @ r_r @ self.w.conj().T
        return _herm(l_full), _herm(r_full), _herm(q)

    def alberti_pair(self, sol) -> AlbertiPair:
        """Rescaled dual witness, extended to positive definite operators on AB and AD

        The margins that make R and Q definite add to tr[σQ], so the largest margin whose
        objective stays within FEASIBILITY_TOL / 2 of the squared dual bound is used.
        """
        _, r_dual, q_dual = self.dual_blocks(sol)
        r_core = 2 * r_dual
        k_pinv = mat_fn(self.sigma_ad, MatrixFunction.PINV_SQRT)
        q_core = 2 * k_pinv @ q_dual @ k_pinv
        scale = max(1.0, _op_norm(q_core), _op_norm(r_core))
        _, bound = _squared_bounds(sol)

        best = None
        for rel in WITNESS_MARGINS:
            pair = self._witness(r_core, q_core, rel * scale)
            excess = pair.objective() - bound
            if best is None or excess < best[0]:
                best = (excess, rel, pair)
            if excess <= FEASIBILITY_TOL / 2:
                break
        excess, rel, pair = best
        if excess > FEASIBILITY_TOL:
            logger.warning(f"Alberti objective exceeds the dual bound by {excess:.3e} (margin {rel:.0e})")
        return pair

    def _witness(self, r_core: np.ndarray, q_core: np.ndarray, margin: float) -> AlbertiPair:
        d_a, d_b, d_d = self.d_a, self.d_b, self.d_d
        pi_w = self.w @ self.w.conj().T
        r_in = r_core + 0.1 * margin * pi_w

        _, u_s = support(self.sigma_ad)
        pi_s = u_s @ u_s.conj().T
        r_lift = _swap_last(np.kron(r_in, np.eye(d_d)), d_a, d_b, d_d)
        iso_sb = np.kron(u_s, np.eye(d_b))
        p0 = _herm(iso_sb.conj().T @ (np.kron(q_core, np.eye(d_b)) - r_lift) @ iso_sb)
        p0_min = float(np.linalg.eigvalsh(p0)[0])
        delta = max(0.0, -p0_min) + margin
        q_s = q_core + delta * pi_s
        p_min = max(p0_min + delta, margin)

        # Schur complement bound for the part of A ⊗ D outside supp(σ_AD)
        r_top = float(np.linalg.eigvalsh(_herm(r_in))[-1])
        c = r_top + 1.0
        pi_a = self.u_a @ self.u_a.conj().T
        t_evals, t_vecs = np.linalg.eigh(_herm(np.kron(pi_a, np.eye(d_d)) - pi_s))
        u_t = t_vecs[:, t_evals > 0.5]
        if u_t.shape[1]:
            cross = iso_sb.conj().T @ r_lift @ np.kron(u_t, np.eye(d_b))
            c = r_top + _op_norm(cross) ** 2 / p_min + 1.0

        leak = float(np.trace(self.rho.mat @ (np.eye(d_a * d_b) - pi_w)).real)
        if leak > 1e-14:
            c = max(c, LEAK_WEIGHT * leak * float(np.trace(self.sigma_ad @ q_s).real))

        r_full = _herm(r_in + c * (np.eye(d_a * d_b) - pi_w))
        q_full = _herm(q_s + c * (np.eye(d_a * d_d) - pi_s))
        pair = AlbertiPair(r_full, q_full, d_a, d_b, d_d, self.rho.mat, self.sigma_ad)

        left, right = pair.trace_terms()
        lam = math.sqrt(left / right) if right > 0 and left > 0 else 1.0
        logger.debug(f"Alberti pair: margin {margin:.1e}, complement weight {c:.3e}, rescaling {lam:.6f}")
        return AlbertiPair(lam * r_full, lam * q_full, d_a, d_b, d_d, self.rho.mat, self.sigma_ad)


def _squared_bounds(sol) -> Tuple[float, float]:
    p = max(0.0, sol.primal_obj) ** 2
    d = max(0.0, sol.dual_obj) ** 2
    return min(p, d), max(p, d)


def fidelity_of_recovery(
    rho: LabeledState,
    sigma: LabeledState,
    shared: Optional[Sequence[str]] = None,
    opts: Optional[SolveOptions] = None,
) -> RecoveryResult:
    """max over channels Γ_{C→B} of F(ρ_AB, Γ(σ_AC)), certified from both sides

    Args:
        rho: target state on A ⊗ B
        sigma: source state on A ⊗ C
        shared: labels of A (default: the labels common to both states)
        opts: solver options
    """
    program = RecoveryProgram(rho, sigma, shared)
    program.check_size()
    sol = program.solve(opts)
    certificate = check_certificate(program.problem, sol)

    lower, upper = _squared_bounds(sol)
    value = float(np.clip((lower + upper) / 2, 0.0, 1.0))
    channel = program.recovery_channel(sol)
    achieved = program.achieved_fidelity(channel)
    pair = program.alberti_pair(sol)

    result = RecoveryResult(
        value=value,
        primal_lb=lower,
        dual_ub=upper,
        gap=upper - lower,
        recovery_channel=channel,
        alberti_pair=pair,
        achieved_fidelity=achieved,
        certificate=certificate,
        iterations=sol.iterations,
        shared=program.shared,
    )
    failed = result.violations()
    if failed:
        logger.warning(f"Recovery result invariants failed: {', '.join(failed)}")
    logger.debug(f"FoR {value:.9f} (gap {result.gap:.2e}, achieved {achieved:.9f}, {sol.iterations} iterations)")
    return result


def for_primal(
    rho: LabeledState,
    sigma: LabeledState,
    shared: Optional[Sequence[str]] = None,
    opts: Optional[SolveOptions] = None,
) -> Tuple[float, ChoiMatrix]:
    """Root fidelity of recovery and the optimal τ as a channel A ⊗ D → B"""
    program = RecoveryProgram(rho, sigma, shared)
    program.check_size()
    sol = program.solve(opts)
    return max(0.0, sol.primal_obj), program.tau(sol)


def for_dual(
    rho: LabeledState,
    sigma: LabeledState,
    shared: Optional[Sequence[str]] = None,
    opts: Optional[SolveOptions] = None,
) -> DualSolution:
    """Squared dual value with the linear dual (L, R, Q) and the rescaled Alberti pair"""
    program = RecoveryProgram(rho, sigma, shared)
    program.check_size()
    sol = program.solve(opts)
    l_full, r_full, q = program.dual_blocks(sol)
    return DualSolution(max(0.0, sol.dual_obj) ** 2, l_full, r_full, q, program.alberti_pair(sol))


def for_conditional(
    rho: LabeledState,
    a: Labels = "A",
    b: Labels = "B",
    c: Labels = "C",
    opts: Optional[SolveOptions] = None,
) -> RecoveryResult:
    """F(A;B|C)_ρ: recover ρ_ABC from ρ_BC with a channel C → AC"""
    a, b, c = _labels(a), _labels(b), _labels(c)
    state = rho.marginal(a + b + c).permuted(a + b + c)
    return fidelity_of_recovery(state, state.marginal(b + c), shared=b, opts=opts)


class MultiplicativityReport(NamedTuple):
    f1: float
    f2: float
    f12: float
    defect: float
    tensor_objective: float
    tensor_violation: float
    tensor_feasible: bool
    product_channel_fidelity: float
    renyi_defect_bits: Optional[float]


def _primed(state: LabeledState) -> LabeledState:
    return state.relabeled({label: label + "'" for label in state.labels})


def multiplicativity_check(
    rho1: LabeledState,
    sigma1: LabeledState,
    rho2: LabeledState,
    sigma2: LabeledState,
    opts: Optional[SolveOptions] = None,
) -> MultiplicativityReport:
    """Compare F(ρ⊗ρ'‖σ⊗σ') with F(ρ‖σ)·F(ρ'‖σ') and test the tensored dual witness"""
    rho2, sigma2 = _primed(rho2), _primed(sigma2)
    rho12 = tensor_states(rho1, rho2)
    sigma12 = tensor_states(sigma1, sigma2)
    RecoveryProgram(rho12, sigma12).check_size()

    r1 = fidelity_of_recovery(rho1, sigma1, opts=opts)
    r2 = fidelity_of_recovery(rho2, sigma2, opts=opts)
    r12 = fidelity_of_recovery(rho12, sigma12, opts=opts)

    pair = r1.alberti_pair.tensor(r2.alberti_pair)
    violation = pair.feasibility_violation()

    product_channel = r1.recovery_channel.tensor(r2.recovery_channel)
    recovered = apply_choi(product_channel, sigma12, spectator_labels=list(r1.shared + r2.shared))
    product_fidelity = fidelity(rho12, recovered)
    if product_fidelity < r12.value - GAP_TOL:
        logger.warning(f"Product channel reaches {product_fidelity:.9f} < {r12.value:.9f}")

    values = (r1.value, r2.value, r12.value)
    renyi_defect = None
    if min(values) > 0:
        renyi_defect = math.log2(r1.value * r2.value / r12.value)

    return MultiplicativityReport(
        f1=r1.value,
        f2=r2.value,
        f12=r12.value,
        defect=r12.value - r1.value * r2.value,
        tensor_objective=pair.objective(),
        tensor_violation=violation,
        tensor_feasible=violation <= FEASIBILITY_TOL * pair.scale(),
        product_channel_fidelity=product_fidelity,
        renyi_defect_bits=renyi_defect,
    )


class FawziRennerReport(NamedTuple):
    cqmi_bits: float
    neg_log_for_bits: float
    slack: float
    slack_lower: float
    result: RecoveryResult


def _neg_log2(value: float) -> float:
    return -math.log2(value) if value > 0 else math.inf


def fawzi_renner_gap(
    rho: LabeledState,
    a: Labels = "A",
    b: Labels = "B",
    c: Labels = "C",
    result: Optional[RecoveryResult] = None,
    opts: Optional[SolveOptions] = None,
) -> FawziRennerReport:
    """I(A:B|C) − (−log₂ F(A;B|C)) evaluated at the dual upper bound (and the primal lower bound)"""
    if result is None:
        result = for_conditional(rho, a, b, c, opts)
    info = cqmi(rho, a, b, c)
    neg_log = _neg_log2(result.dual_ub)
    slack = info - neg_log
    slack_lower = info - _neg_log2(result.primal_lb)
    if slack < -1e-6:
        logger.warning(f"Conditional mutual information {info:.9f} below −log₂ FoR {neg_log:.9f}")
    return FawziRennerReport(info, neg_log, slack, slack_lower, result)


class PetzReport(NamedTuple):
    f_petz: float
    f_opt: float
    ratio: Optional[float]


def petz_fidelity(rho: LabeledState, a: Labels = "A", b: Labels = "B", c: Labels = "C") -> float:
    """F(ρ_ABC, Γ^Petz(ρ_BC)) with the Petz map of ρ_AC anchored on C"""
    a, b, c = _labels(a), _labels(b), _labels(c)
    state = rho.marginal(a + b + c).permuted(a + b + c)
    channel = petz_map(state.marginal(a + c), recover_label=list(a), anchor_label=list(c))
    recovered = apply_choi(channel, state.marginal(b + c), spectator_labels=list(b))
    return fidelity(state, recovered)


def petz_gap(
    rho: LabeledState,
    a: Labels = "A",
    b: Labels = "B",
    c: Labels = "C",
    result: Optional[RecoveryResult] = None,
    opts: Optional[SolveOptions] = None,
) -> PetzReport:
    if result is None:
        result = for_conditional(rho, a, b, c, opts)
    f_petz = petz_fidelity(rho, a, b, c)
    f_opt = result.value
    if f_petz > f_opt + 1e-6:
        logger.warning(f"Petz map fidelity {f_petz:.9f} exceeds the optimum {f_opt:.9f}")
    ratio = f_petz / f_opt if f_opt > 0 else None
    return PetzReport(f_petz, f_opt, ratio)


class RenyiIdentity(NamedTuple):
    lhs: float
    rhs: float


def renyi_half_recovery_identity(
    rho: LabeledState,
    a: Labels = "A",
    b: Labels = "B",
    c: Labels = "C",
    result: Optional[RecoveryResult] = None,
    opts: Optional[SolveOptions] = None,
) -> RenyiIdentity:
    """min over Γ of D_½(ρ_ABC ‖ Γ(ρ_BC)) against −log₂ F(A;B|C)"""
    a, b, c = _labels(a), _labels(b), _labels(c)
    if result is None:
        result = for_conditional(rho, a, b, c, opts)
    state = rho.marginal(a + b + c).permuted(a + b + c)
    recovered = apply_choi(result.recovery_channel, state.marginal(b + c), spectator_labels=list(b))
    return RenyiIdentity(_neg_log2(result.value), renyi_half(state, recovered))


class PureDualityReport(NamedTuple):
    f_c: float
    f_d: float
    defect: float


def for_pure_duality(
    psi: Union[PureState, LabeledState],
    a: Labels = "A",
    b: Labels = "B",
    c: Labels = "C",
    d: Labels = "D",
    opts: Optional[SolveOptions] = None,
) -> PureDualityReport:
    """F(A;B|C) against F(A;B|D) for a pure state on ABCD"""
    state = psi.density() if isinstance(psi, PureState) else psi
    if state.purity < 1 - 1e-8:
        raise DimensionError(f"State on {list(state.labels)} is not pure (purity {state.purity:.9f})")
    a, b, c, d = _labels(a), _labels(b), _labels(c), _labels(d)
    f_c = for_conditional(state.marginal(a + b + c), a, b, c, opts).value
    f_d = for_conditional(state.marginal(a + b + d), a, b, d, opts).value
    return PureDualityReport(f_c, f_d, f_c - f_d)
