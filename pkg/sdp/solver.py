"""
Primal-dual interior-point method for block SDPs

Infeasible-start path following with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step. Internally the problem is handled as

    min ⟨C, X⟩  s.t. A(X) = b, X ⪰ 0      max b·y  s.t. A*(y) + S = C, S ⪰ 0

and max problems are mapped onto it by negating C (and y on the way out).
"""
import json
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from sdp.problem import (
    SdpProblem,
    SdpSolution,
    Sense,
    SolutionStatus,
    SolveOptions,
    inner,
)

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12
MIN_STEP = 1e-12

Blocks = List[np.ndarray]


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _norm(blocks: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in blocks)))


def _real_gram(a: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Re⟨a_g, t_h⟩ for stacks a (kg, s, s) and t (kh, s, s)"""
    a2 = a.reshape(a.shape[0], -1)
    t2 = t.reshape(t.shape[0], -1)
    if np.iscomplexobj(a2) or np.iscomplexobj(t2):
        return a2.real @ t2.real.T + a2.imag @ t2.imag.T
    return a2 @ t2.T


class _Scaling:
    """NT scaling point W = G G† with G⁻¹ X G⁻† = G† S G = diag(lam)"""

    def __init__(self, x: np.ndarray, s: np.ndarray):
        lx = np.linalg.cholesky(x)
        ls = np.linalg.cholesky(s)
        _, sv, vh = np.linalg.svd(ls.conj().T @ lx)
        v = vh.conj().T
        self.lam = sv
        self.g = (lx @ v) / np.sqrt(sv)
        lx_inv = scipy.linalg.solve_triangular(lx, np.eye(lx.shape[0], dtype=lx.dtype), lower=True)
        self.g_inv = np.sqrt(sv)[:, None] * (vh @ lx_inv)
        self.w = self.g @ self.g.conj().T


class InteriorPointSolver:
    """Single-use solver bound to one problem"""

    def __init__(self, problem: SdpProblem, options: Optional[SolveOptions] = None):
        self.problem = problem
        self.options = options or SolveOptions()
        self._used = False
        self._by_block = [
            [(group.rows, part) for group in problem.groups for part in group.parts if part.block == b]
            for b in range(len(problem.block_dims))
        ]

    def solve(self) -> SdpSolution:
        if self._used:
            raise RuntimeError("InteriorPointSolver instances are single-use")
        self._used = True

        p = self.problem
        opts = self.options
        sign = -1.0 if p.sense is Sense.MAX else 1.0
        dtype = p.dtype
        c = [sign * np.asarray(blk, dtype=dtype) for blk in p.objective]
        b = p.targets
        n = float(sum(p.block_dims))
        norm_b = float(np.linalg.norm(b))
        norm_c = _norm(c)

        start = 1.0 + (float(np.max(np.abs(b))) if b.size else 0.0) + norm_c
        x = [start * np.eye(d, dtype=dtype) for d in p.block_dims]
        s = [start * np.eye(d, dtype=dtype) for d in p.block_dims]
        y = np.zeros(p.num_constraints)

        status = SolutionStatus.MAX_ITER
        stats = []
        iteration = 0
        pres = dres = float("inf")
        pobj = dobj = 0.0
        dump = open(opts.dump_path, "a") if opts.dump_path else None
        try:
            for iteration in range(opts.max_iter + 1):
                rp = b - p.apply(x)
                aty = p.adjoint(y)
                rd = [cb - sb - ab for cb, sb, ab in zip(c, s, aty)]
                pobj = sum(inner(cb, xb) for cb, xb in zip(c, x))
                dobj = float(b @ y)
                mu = sum(inner(xb, sb) for xb, sb in zip(x, s)) / n
                pres = float(np.linalg.norm(rp)) / (1.0 + norm_b)
                dres = _norm(rd) / (1.0 + norm_c)
                rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj))

                record = {
                    "iter": iteration,
                    "pobj": sign * pobj,
                    "dobj": sign * dobj,
                    "pres": pres,
                    "dres": dres,
                    "gap": rel_gap,
                    "mu": mu,
                }
                if opts.debug:
                    self._check_weak_duality(pobj, dobj, rp, rd, x, y)

                if pres <= opts.feas_tol and dres <= opts.feas_tol and rel_gap <= opts.gap_tol:
                    status = SolutionStatus.OPTIMAL
                    self._emit(stats, dump, record)
                    break
                if iteration == opts.max_iter:
                    status = SolutionStatus.MAX_ITER
                    self._emit(stats, dump, record)
                    break
                if max(_norm(x), _norm(s), float(np.linalg.norm(y))) > DIVERGENCE_LIMIT:
                    status = SolutionStatus.INFEASIBLE
                    self._emit(stats, dump, record)
                    break

                try:
                    x, y, s, alpha_p, alpha_d, sigma = self._step(x, y, s, rp, rd, mu, n)
                except (np.linalg.LinAlgError, ValueError) as e:
                    logger.debug(f"Factorization failed at iteration {iteration}: {e}")
                    status = self._stalled(pres, dres, rel_gap)
                    self._emit(stats, dump, record)
                    break

                record.update(alpha_p=alpha_p, alpha_d=alpha_d, sigma=sigma)
                self._emit(stats, dump, record)
                logger.debug(
                    f"iter {iteration:3d} pobj {sign * pobj:+.9e} dobj {sign * dobj:+.9e} "
                    f"pres {pres:.1e} dres {dres:.1e} gap {rel_gap:.1e} step {alpha_p:.3f}/{alpha_d:.3f}"
                )
                if max(alpha_p, alpha_d) < MIN_STEP:
                    status = self._stalled(pres, dres, rel_gap)
                    break
        finally:
            if dump is not None:
                dump.close()

        primal_obj = sign * pobj
        dual_obj = sign * dobj
        if status is not SolutionStatus.OPTIMAL:
            logger.warning(
                f"SDP stopped with status {status.value} after {iteration} iterations "
                f"(pres {pres:.1e}, dres {dres:.1e})"
            )
        return SdpSolution(
            x=tuple(_herm(xb) for xb in x),
            y=sign * y,
            s=tuple(_herm(sb) for sb in s),
            primal_obj=primal_obj,
            dual_obj=dual_obj,
            gap=abs(primal_obj - dual_obj),
            status=status,
            iterations=iteration,
            primal_residual=pres,
            dual_residual=dres,
            stats=stats,
        )

    def _stalled(self, pres: float, dres: float, rel_gap: float) -> SolutionStatus:
        """Status for an iterate the solver cannot improve on"""
        if max(pres, dres, rel_gap) <= self.options.near_tol:
            return SolutionStatus.NEAR_OPTIMAL
        return SolutionStatus.NUMERICAL_FAILURE

    @staticmethod
    def _emit(stats: list, dump, record: dict):
        stats.append(record)
        if dump is not None:
            dump.write(json.dumps(record) + "\n")

    def _check_weak_duality(self, pobj, dobj, rp, rd, x, y):
        # pobj − dobj = ⟨X, S⟩ + ⟨Rd, X⟩ − rp·y with ⟨X, S⟩ ≥ 0
        slack = abs(sum(inner(r, xb) for r, xb in zip(rd, x))) + abs(float(rp @ y))
        violation = dobj - pobj - slack
        assert violation <= 1e-9 * (1.0 + abs(pobj) + abs(dobj)), (
            f"Weak duality violated by {violation:.3e}"
        )

    def _schur(self, scalings: Sequence[_Scaling]) -> np.ndarray:
        """M_ij = Σ_blocks ⟨F_i, W F_j W⟩ over the constraints active in each block"""
        m = self.problem.num_constraints
        schur = np.zeros((m, m))
        for block, entries in enumerate(self._by_block):
            w = scalings[block].w
            for h, (rows_h, part_h) in enumerate(entries):
                for g in range(h + 1):
                    rows_g, part_g = entries[g]
                    w_gh = w[part_g.window, part_h.window]
                    w_hg = w[part_h.window, part_g.window]
                    t = w_gh @ part_h.mats @ w_hg
                    values = _real_gram(part_g.mats, t)
                    schur[np.ix_(rows_g, rows_h)] += values
                    if g != h:
                        schur[np.ix_(rows_h, rows_g)] += values.T
        return (schur + schur.T) / 2

    @staticmethod
    def _factor(schur: np.ndarray):
        if schur.size == 0:
            return None
        try:
            return scipy.linalg.cho_factor(schur, lower=True)
        except np.linalg.LinAlgError:
            shift = 1e-12 * max(1.0, float(np.trace(schur)) / schur.shape[0])
            logger.debug(f"Schur complement not positive definite; retrying with shift {shift:.1e}")
            return scipy.linalg.cho_factor(schur + shift * np.eye(schur.shape[0]), lower=True)

    def _direction(self, scalings, z_tilde, rp, rd, factor) -> Tuple[Blocks, np.ndarray, Blocks]:
        p = self.problem
        h = [sc.g @ z @ sc.g.conj().T for sc, z in zip(scalings, z_tilde)]
        wrdw = [sc.w @ r @ sc.w for sc, r in zip(scalings, rd)]
        rhs = rp - p.apply(h) + p.apply(wrdw)
        dy = scipy.linalg.cho_solve(factor, rhs) if factor is not None else np.zeros(0)
        aty = p.adjoint(dy)
        ds = [_herm(r - a) for r, a in zip(rd, aty)]
        dx = [_herm(hb - sc.w @ d @ sc.w) for hb, sc, d in zip(h, scalings, ds)]
        return dx, dy, ds

    @staticmethod
    def _max_step(x: Blocks, dx: Blocks) -> float:
        """Largest α with X + α·ΔX ⪰ 0"""
        alpha = np.inf
        for xb, dxb in zip(x, dx):
            lower = np.linalg.cholesky(xb)
            tmp = scipy.linalg.solve_triangular(lower, dxb, lower=True)
            scaled = scipy.linalg.solve_triangular(lower, tmp.conj().T, lower=True)
            lowest = float(np.linalg.eigvalsh(_herm(scaled))[0])
            if lowest < 0:
                alpha = min(alpha, -1.0 / lowest)
        return alpha

    def _step(self, x, y, s, rp, rd, mu, n):
        fraction = self.options.step_fraction
        scalings = [_Scaling(xb, sb) for xb, sb in zip(x, s)]
        factor = self._factor(self._schur(scalings))

        # predictor
        z_aff = [-np.diag(sc.lam).astype(xb.dtype) for sc, xb in zip(scalings, x)]
        dx_a, _, ds_a = self._direction(scalings, z_aff, rp, rd, factor)
        ap = min(1.0, fraction * self._max_step(x, dx_a))
        ad = min(1.0, fraction * self._max_step(s, ds_a))
        mu_aff = sum(
            inner(xb + ap * dxb, sb + ad * dsb) for xb, dxb, sb, dsb in zip(x, dx_a, s, ds_a)
        ) / n
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0)) if mu > 0 else 0.0

        # corrector
        z_cor = []
        for sc, dxb, dsb in zip(scalings, dx_a, ds_a):
            dx_t = sc.g_inv @ dxb @ sc.g_inv.conj().T
            ds_t = sc.g.conj().T @ dsb @ sc.g
            rhs = sigma * mu * np.eye(sc.lam.size) - np.diag(sc.lam ** 2) - _herm(dx_t @ ds_t)
            z_cor.append(2 * rhs / (sc.lam[:, None] + sc.lam[None, :]))
        dx, dy, ds = self._direction(scalings, z_cor, rp, rd, factor)

        alpha_p = min(1.0, fraction * self._max_step(x, dx))
        alpha_d = min(1.0, fraction * self._max_step(s, ds))
        x = [_herm(xb + alpha_p * dxb) for xb, dxb in zip(x, dx)]
        s = [_herm(sb + alpha_d * dsb) for sb, dsb in zip(s, ds)]
        y = y + alpha_d * dy
        return x, y, s, alpha_p, alpha_d, sigma


def solve(problem: SdpProblem, opts: Optional[SolveOptions] = None) -> SdpSolution:
    """Solve with a fresh solver instance; never raises on non-optimal termination"""
    return InteriorPointSolver(problem, opts).solve()
