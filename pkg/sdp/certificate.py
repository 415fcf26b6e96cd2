"""
Independent re-verification of primal-dual pairs
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

import config
from sdp.problem import SdpProblem, SdpSolution, Sense, inner

logger = logging.getLogger(__name__)


class CertificateReport(NamedTuple):
    ok: bool
    primal_feas_residual: float
    dual_feas_residual: float
    gap: float


def _lowest(block: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((block + block.conj().T) / 2)[0])


def check_certificate(p: SdpProblem, sol: SdpSolution, tol: Optional[float] = None) -> CertificateReport:
    """Recompute feasibility and gap from (X, y) and the raw problem data only

    primal residual: max |A(X) − b| plus any negative eigenvalue of X
    dual residual: most negative eigenvalue of the implied slack
    gap: |⟨C, X⟩ − b·y| relative to 1 + |⟨C, X⟩|
    """
    tol = config.CERT_TOL if tol is None else tol
    x = [np.asarray(b) for b in sol.x]
    y = np.asarray(sol.y, dtype=np.float64)

    constraint = float(np.max(np.abs(p.apply(x) - p.targets))) if p.num_constraints else 0.0
    primal_psd = max(0.0, -min(_lowest(b) for b in x))
    primal_residual = constraint + primal_psd

    aty = p.adjoint(y)
    if p.sense is Sense.MAX:
        slack = [a - c for a, c in zip(aty, p.objective)]
    else:
        slack = [c - a for a, c in zip(aty, p.objective)]
    dual_residual = max(0.0, -min(_lowest(b) for b in slack))

    primal_value = sum(inner(c, b) for c, b in zip(p.objective, x))
    gap = abs(primal_value - float(p.targets @ y))
    scale = 1.0 + abs(primal_value)

    ok = primal_residual <= tol * max(1.0, float(np.max(np.abs(p.targets), initial=0.0))) \
        and dual_residual <= tol * max(1.0, p.scale()) \
        and gap <= tol * scale
    if not ok:
        logger.debug(
            f"Certificate rejected: primal {primal_residual:.2e}, dual {dual_residual:.2e}, gap {gap:.2e}"
        )
    return CertificateReport(ok, primal_residual, dual_residual, gap)
