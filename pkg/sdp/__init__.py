"""
Dense block SDP modelling and a primal-dual interior-point solver
"""
from sdp.builder import ProgramBuilder, coefficients, combine, hermitian_basis, symmetric_basis
from sdp.certificate import CertificateReport, check_certificate
from sdp.problem import (
    ConstraintGroup,
    ConstraintPart,
    ProblemError,
    SdpProblem,
    SdpSolution,
    Sense,
    SolutionStatus,
    SolveOptions,
    SolverError,
    embed_complex,
    extract_complex,
    extract_solution,
)
from sdp.solver import InteriorPointSolver, solve

__all__ = [
    "CertificateReport",
    "ConstraintGroup",
    "ConstraintPart",
    "InteriorPointSolver",
    "ProblemError",
    "ProgramBuilder",
    "SdpProblem",
    "SdpSolution",
    "Sense",
    "SolutionStatus",
    "SolveOptions",
    "SolverError",
    "check_certificate",
    "coefficients",
    "combine",
    "embed_complex",
    "extract_complex",
    "extract_solution",
    "hermitian_basis",
    "solve",
    "symmetric_basis",
]
