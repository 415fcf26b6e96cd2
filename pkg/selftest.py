"""
Named closed-form checks across every module, run by `selftest` and `sweep selftest`
"""
import logging
import math
from typing import Callable, List, NamedTuple, Tuple, Union

import numpy as np

from channels import ChoiMatrix, apply_choi, choi_of_identity, is_cptp, petz_map
from entropy import cqmi, fidelity, fidelity_alberti, hmin_cond, renyi_half, von_neumann
from recovery import (
    fawzi_renner_gap,
    fidelity_of_recovery,
    for_conditional,
    multiplicativity_check,
    petz_gap,
    renyi_half_recovery_identity,
)
from sdp import (
    ProgramBuilder,
    SdpSolution,
    Sense,
    SolutionStatus,
    SolverError,
    check_certificate,
    embed_complex,
    solve,
)
from states import LabeledState, PureState, named_state, purify, random_state, schmidt, tensor_states
from tensor import MatrixFunction, SystemDims, herm_eig, kron, mat_fn, norms, partial_trace

logger = logging.getLogger(__name__)

CheckResult = Union[bool, Tuple[bool, str]]


class CheckOutcome(NamedTuple):
    name: str
    passed: bool
    detail: str
    solver_failure: bool = False


CHECKS: List[Tuple[str, Callable[[], CheckResult]]] = []


def check(name: str):
    def register(fn: Callable[[], CheckResult]):
        CHECKS.append((name, fn))
        return fn

    return register


def _close(a, b, tol=1e-9) -> bool:
    return bool(np.allclose(a, b, atol=tol, rtol=0))


def _state(mat, **dims) -> LabeledState:
    return LabeledState(np.asarray(mat, dtype=np.complex128), SystemDims.of(**dims))


def _qubit(vec) -> LabeledState:
    vec = np.asarray(vec, dtype=np.complex128)
    return _state(np.outer(vec, vec.conj()), A=2)


# tensor-core

@check("kron identities")
def _kron_identity():
    return _close(kron(np.eye(2), np.eye(2)), np.eye(4))


@check("kron diagonal product")
def _kron_diagonal():
    return _close(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


@check("partial trace of a product")
def _partial_trace_product():
    rho = random_state(SystemDims.of(A=2), 2, seed=1).mat
    sigma = random_state(SystemDims.of(B=3), 3, seed=2).mat
    out = partial_trace(np.kron(rho, sigma), SystemDims.of(A=2, B=3), ["B"])
    return _close(out, rho)


@check("partial trace of a maximally entangled state")
def _partial_trace_mes():
    mes = named_state("max_entangled(3)")
    return _close(partial_trace(mes.mat, mes.dims, ["B"]), np.eye(3) / 3)


@check("herm_eig diagonal")
def _eig_diagonal():
    evals, _ = herm_eig(np.diag([3.0, 1.0]))
    return _close(evals, [1.0, 3.0])


@check("herm_eig Pauli-X")
def _eig_pauli_x():
    evals, _ = herm_eig(np.array([[0, 1], [1, 0]]))
    return _close(evals, [-1.0, 1.0])


@check("sqrt of identity")
def _sqrt_identity():
    return _close(mat_fn(np.eye(3), MatrixFunction.SQRT), np.eye(3))


@check("pinv_sqrt with a null direction")
def _pinv_sqrt():
    return _close(mat_fn(np.diag([4.0, 9.0, 0.0]), MatrixFunction.PINV_SQRT), np.diag([0.5, 1 / 3, 0.0]))


@check("norms of identity")
def _norms_identity():
    return _close(norms(np.eye(4)), (4.0, 1.0))


@check("norms of diag(3, -4)")
def _norms_diagonal():
    return _close(norms(np.diag([3.0, -4.0])), (7.0, 4.0))


# states

@check("purify maximally mixed qubit")
def _purify_mixed():
    p = purify(_state(np.eye(2) / 2, A=2), "R")
    return p.dims.dim_of("R") == 2 and _close(p.marginal(["A"]).mat, np.eye(2) / 2)


@check("purify pure state")
def _purify_pure():
    return purify(_qubit([0.6, 0.8j]), "R").dims.dim_of("R") == 1


@check("schmidt of a product state")
def _schmidt_product():
    vec = np.kron([1, 0], [0.6, 0.8])
    decomposition = schmidt(PureState(vec, SystemDims.of(A=2, B=2)), (["A"], ["B"]))
    return _close(decomposition.coefficients, [1.0])


@check("schmidt of a maximally entangled state")
def _schmidt_mes():
    vec = np.array([1, 0, 0, 1]) / np.sqrt(2)
    decomposition = schmidt(PureState(vec, SystemDims.of(A=2, B=2)), (["A"], ["B"]))
    return _close(decomposition.coefficients, [1 / np.sqrt(2)] * 2)


@check("random rank-1 state is pure")
def _random_pure():
    return abs(random_state(SystemDims.of(A=2, B=2), 1, seed=3).purity - 1) <= 1e-9


@check("random_state is deterministic")
def _random_deterministic():
    dims = SystemDims.of(A=2, B=3)
    return np.array_equal(random_state(dims, 3, seed=11).mat, random_state(dims, 3, seed=11).mat)


@check("max_entangled(2) marginals")
def _mes_marginals():
    mes = named_state("max_entangled(2)")
    return _close(mes.marginal(["A"]).mat, np.eye(2) / 2) and _close(mes.marginal(["B"]).mat, np.eye(2) / 2)


@check("ghz3 marginal on C")
def _ghz_marginal():
    return _close(named_state("ghz3").marginal(["C"]).mat, np.eye(2) / 2)


@check("cq_markov has zero CQMI")
def _cq_markov_cqmi():
    return abs(cqmi(named_state("cq_markov"))) <= 1e-9


# channels

@check("choi_of_identity(1)")
def _choi_scalar():
    return _close(choi_of_identity(1).mat, [[1.0]])


@check("choi_of_identity(2)")
def _choi_qubit():
    j = choi_of_identity(2)
    return np.linalg.matrix_rank(j.mat) == 1 and _close(np.trace(j.mat), 2) and _close(j.output_trace(), np.eye(2))


@check("identity channel leaves the state unchanged")
def _identity_channel():
    rho = random_state(SystemDims.of(A=3), 2, seed=5)
    return _close(apply_choi(choi_of_identity(3), rho).mat, rho.mat)


@check("completely depolarizing channel")
def _depolarizing():
    rho = random_state(SystemDims.of(S=2, A=2), 3, seed=6)
    j = ChoiMatrix(np.eye(4) / 2, SystemDims.of(A=2), SystemDims.of(O=2))
    out = apply_choi(j, rho, spectator_labels=["S"])
    return _close(out.mat, np.kron(rho.marginal(["S"]).mat, np.eye(2) / 2))


@check("is_cptp on the identity channel")
def _cptp_identity():
    report = is_cptp(choi_of_identity(2))
    return report.ok and report.psd_violation <= 1e-12 and report.tp_violation <= 1e-12


@check("scaled Choi matrix breaks trace preservation")
def _cptp_scaled():
    j = choi_of_identity(2)
    report = is_cptp(ChoiMatrix(1.1 * j.mat, j.in_dims, j.out_dims))
    return (not report.ok) and abs(report.tp_violation - 0.1 * np.sqrt(2)) <= 1e-9


@check("Petz map of a product state factorizes")
def _petz_product():
    rho_a = random_state(SystemDims.of(A=2), 2, seed=7)
    rho_c = random_state(SystemDims.of(C=2), 2, seed=8)
    j = petz_map(tensor_states(rho_a, rho_c))
    sigma = random_state(SystemDims.of(C=2), 2, seed=9)
    return _close(apply_choi(j, sigma).mat, np.kron(rho_a.mat, sigma.mat), 1e-8)


@check("Petz map recovers a pure entangled marginal")
def _petz_pure():
    vec = np.array([0.6, 0, 0, 0.8], dtype=np.complex128)
    rho = LabeledState(np.outer(vec, vec), SystemDims.of(A=2, C=2))
    return _close(apply_choi(petz_map(rho), rho.marginal(["C"])).mat, rho.mat, 1e-8)


# entropy

@check("entropy of a pure state")
def _entropy_pure():
    return abs(von_neumann(_qubit([0.6, 0.8]))) <= 1e-12


@check("entropy of the maximally mixed state")
def _entropy_mixed():
    return abs(von_neumann(_state(np.eye(4) / 4, A=4)) - 2.0) <= 1e-12


@check("binary entropy of (1/4, 3/4)")
def _entropy_binary():
    return abs(von_neumann(_state(np.diag([0.25, 0.75]), A=2)) - (2 - 0.75 * math.log2(3))) <= 1e-12


@check("CQMI of a product state")
def _cqmi_product():
    return abs(cqmi(named_state("product"))) <= 1e-9


@check("CQMI of ghz3")
def _cqmi_ghz():
    return abs(cqmi(named_state("ghz3")) - 1.0) <= 1e-9


@check("fidelity with itself")
def _fidelity_self():
    rho = random_state(SystemDims.of(A=3), 3, seed=12)
    return abs(fidelity(rho, rho) - 1) <= 1e-9


@check("fidelity of orthogonal states")
def _fidelity_orthogonal():
    return fidelity(_qubit([1, 0]), _qubit([0, 1])) <= 1e-12


@check("fidelity of |0> and |+>")
def _fidelity_plus():
    return abs(fidelity(_qubit([1, 0]), _qubit([1 / np.sqrt(2), 1 / np.sqrt(2)])) - 0.5) <= 1e-9


@check("Alberti fidelity with itself")
def _alberti_self():
    rho = random_state(SystemDims.of(A=2), 2, seed=13)
    return abs(fidelity_alberti(rho, rho).value - 1) <= 1e-6


@check("Alberti fidelity of orthogonal states")
def _alberti_orthogonal():
    return fidelity_alberti(_qubit([1, 0]), _qubit([0, 1])).value <= 1e-6


@check("min-entropy of a decoupled state")
def _hmin_decoupled():
    sigma_c = random_state(SystemDims.of(C=2), 2, seed=14)
    state = tensor_states(_state(np.eye(3) / 3, A=3), sigma_c)
    return abs(hmin_cond(state).value - math.log2(3)) <= 1e-6


@check("D_1/2 of identical states")
def _renyi_identical():
    rho = random_state(SystemDims.of(A=2), 2, seed=15)
    return abs(renyi_half(rho, rho)) <= 1e-9


@check("D_1/2 of orthogonal states")
def _renyi_orthogonal():
    return math.isinf(renyi_half(_qubit([1, 0]), _qubit([0, 1])))


@check("D_1/2 at fidelity 1/2")
def _renyi_half_bit():
    return abs(renyi_half(_qubit([1, 0]), _qubit([1 / np.sqrt(2), 1 / np.sqrt(2)])) - 1.0) <= 1e-9


# sdp

def _lp_problem():
    builder = ProgramBuilder([1, 1], sense=Sense.MAX, dtype=np.float64)
    builder.set_objective(0, [[1.0]])
    builder.add_group([1.0], {0: (0, [[[1.0]]]), 1: (0, [[[1.0]]])})
    return builder.build()


@check("diagonal LP as an SDP")
def _sdp_lp():
    return abs(solve(_lp_problem()).raise_for_status().primal_obj - 1) <= 1e-7


@check("embedding a real problem keeps the optimum")
def _sdp_embed_real():
    p = _lp_problem()
    return abs(solve(embed_complex(p)).raise_for_status().primal_obj - 1) <= 1e-7


@check("largest eigenvalue of Pauli-Y through the real embedding")
def _sdp_pauli_y():
    builder = ProgramBuilder([2], sense=Sense.MAX)
    builder.set_objective(0, np.array([[0, -1j], [1j, 0]]))
    builder.add_group([1.0], {0: (0, np.eye(2)[None])})
    return abs(solve(embed_complex(builder.build())).raise_for_status().primal_obj - 1) <= 1e-7


def _eigen_problem(m):
    builder = ProgramBuilder([m.shape[0]], sense=Sense.MAX)
    builder.set_objective(0, m)
    builder.add_group([1.0], {0: (0, np.eye(m.shape[0])[None])})
    return builder.build()


def _eigen_pair(m, shift=0.0):
    evals, evecs = np.linalg.eigh(m)
    top = evecs[:, -1]
    x = np.outer(top, top.conj()) + shift * np.eye(m.shape[0])
    s = evals[-1] * np.eye(m.shape[0]) - m
    return SdpSolution(
        x=(x,), y=np.array([evals[-1]]), s=(s,), primal_obj=float(evals[-1]), dual_obj=float(evals[-1]),
        gap=0.0, status=SolutionStatus.OPTIMAL, iterations=0,
    )


@check("certificate of a hand-built optimum")
def _certificate_ok():
    m = np.diag([1.0, 2.0, 0.5]).astype(np.complex128)
    return check_certificate(_eigen_problem(m), _eigen_pair(m)).ok


@check("certificate flags a perturbed primal")
def _certificate_perturbed():
    m = np.diag([1.0, 2.0, 0.5]).astype(np.complex128)
    report = check_certificate(_eigen_problem(m), _eigen_pair(m, shift=1e-3))
    return (not report.ok) and abs(report.primal_feas_residual - 3e-3) <= 1e-9


# recovery

@check("trivial B and C reduce to fidelity")
def _for_trivial():
    rho = random_state(SystemDims.of(A=2), 2, seed=16)
    sigma = random_state(SystemDims.of(A=2), 2, seed=17)
    result = fidelity_of_recovery(rho, sigma)
    return abs(result.value - fidelity(rho, sigma)) <= 1e-6, f"{result.value:.9f}"


@check("product target is recoverable")
def _for_product():
    rho_a = random_state(SystemDims.of(A=2), 2, seed=18)
    rho_b = random_state(SystemDims.of(B=2), 2, seed=19)
    sigma_c = random_state(SystemDims.of(C=2), 2, seed=20)
    result = fidelity_of_recovery(tensor_states(rho_a, rho_b), tensor_states(rho_a, sigma_c))
    return abs(result.value - 1) <= 1e-6, f"{result.value:.9f}"


@check("identity recovery with B matching C")
def _for_identity():
    rho = random_state(SystemDims.of(A=2, B=2), 4, seed=21)
    result = fidelity_of_recovery(rho, rho.relabeled({"B": "C"}))
    return abs(result.value - 1) <= 1e-6, f"{result.value:.9f}"


@check("conditional FoR of a product state")
def _conditional_product():
    return abs(for_conditional(named_state("product")).value - 1) <= 1e-6


@check("conditional FoR of cq_markov")
def _conditional_markov():
    return abs(for_conditional(named_state("cq_markov")).value - 1) <= 1e-6


@check("multiplicativity with a trivial factor")
def _mult_trivial():
    rho = random_state(SystemDims.of(A=2, B=2), 2, seed=22)
    sigma = random_state(SystemDims.of(A=2, C=2), 1, seed=23)
    one = np.ones((1, 1))
    report = multiplicativity_check(rho, sigma, _state(one, A=1, B=1), _state(one, A=1, C=1))
    return abs(report.defect) <= 1e-6, f"defect {report.defect:.2e}"


@check("multiplicativity of recoverable instances")
def _mult_products():
    def instance(seed):
        rho_a = random_state(SystemDims.of(A=2), 2, seed=seed)
        rho_b = random_state(SystemDims.of(B=2), 2, seed=seed + 1)
        sigma_c = random_state(SystemDims.of(C=2), 1, seed=seed + 2)
        return tensor_states(rho_a, rho_b), tensor_states(rho_a, sigma_c)

    report = multiplicativity_check(*instance(30), *instance(40))
    return abs(report.f12 - 1) <= 1e-5 and abs(report.defect) <= 1e-5, f"f12 {report.f12:.9f}"


@check("Fawzi-Renner gap of a product state")
def _fr_product():
    report = fawzi_renner_gap(named_state("product"))
    return max(abs(report.cqmi_bits), abs(report.neg_log_for_bits), abs(report.slack)) <= 1e-6


@check("Fawzi-Renner gap of cq_markov")
def _fr_markov():
    report = fawzi_renner_gap(named_state("cq_markov"))
    return abs(report.cqmi_bits) <= 1e-6 and abs(report.neg_log_for_bits) <= 1e-6


@check("Petz map is optimal on cq_markov")
def _petz_markov():
    report = petz_gap(named_state("cq_markov"))
    return abs(report.f_petz - 1) <= 1e-8 and abs(report.f_opt - 1) <= 1e-6


@check("Petz ratio on a product state")
def _petz_ratio():
    report = petz_gap(named_state("product"))
    return report.ratio is not None and abs(report.ratio - 1) <= 1e-6


@check("D_1/2 identity on a Markov chain")
def _renyi_markov():
    identity = renyi_half_recovery_identity(named_state("cq_markov"))
    return abs(identity.lhs) <= 1e-6 and abs(identity.rhs) <= 1e-6


@check("D_1/2 identity on a product state")
def _renyi_product():
    identity = renyi_half_recovery_identity(named_state("product"))
    return abs(identity.lhs) <= 1e-6 and abs(identity.rhs) <= 1e-6


def run_selftest() -> List[CheckOutcome]:
    outcomes = []
    for name, fn in CHECKS:
        try:
            result = fn()
            passed, detail = result if isinstance(result, tuple) else (result, "")
            outcomes.append(CheckOutcome(name, bool(passed), detail))
        except SolverError as e:
            logger.error(f"Check {name!r}: {e}")
            outcomes.append(CheckOutcome(name, False, str(e), solver_failure=True))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            logger.error(f"Check {name!r} raised {type(e).__name__}: {e}")
            outcomes.append(CheckOutcome(name, False, f"{type(e).__name__}: {e}"))
    passed = sum(o.passed for o in outcomes)
    logger.info(f"Self-test: {passed}/{len(outcomes)} checks passed")
    return outcomes
