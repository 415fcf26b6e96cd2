"""
Seeded experiment sweeps and their reports

Each sweep draws instances from per-instance seeds, evaluates them
(optionally on a thread pool) and assembles rows ordered by instance_id,
so a fixed (revision, generator, seed, flags) always gives the same report.
"""
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import config
from recovery import (
    fawzi_renner_gap,
    for_conditional,
    multiplicativity_check,
    petz_gap,
    renyi_half_recovery_identity,
)
from sdp import SolverError
from serialization import state_to_dict, write_json
from states import instance_seed, random_state
from tensor import SystemDims

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "seed",
    "instance_id",
    "d_A",
    "d_B",
    "d_C",
    "rank_sigma",
    "value",
    "gap",
    "cqmi_bits",
    "neglogF_bits",
    "slack",
    "f_petz",
    "wall_time_ms",
)

SLACK_TOL = 1e-6
PETZ_TOL = 1e-6
RENYI_TOL = 1e-5
DEFECT_TOL = 1e-4
WITNESS_TOL = 1e-6
PRODUCT_CHANNEL_TOL = 1e-5


class SweepKind(str, Enum):
    FR = "fr"
    MULT = "mult"
    PETZ = "petz"
    SELFTEST = "selftest"


class RowStatus(str, Enum):
    OK = "ok"
    INVARIANT_VIOLATION = "invariant_violation"
    SOLVER_FAILURE = "solver_failure"


@dataclass(frozen=True)
class SweepConfig:
    kind: SweepKind
    n: int = 10
    seed: int = field(default_factory=lambda: config.DEFAULT_SEED)
    dims: Tuple[int, int, int] = (2, 2, 2)
    rank: int = 2
    rank1_sigma: bool = False
    workers: int = field(default_factory=lambda: config.SWEEP_WORKERS)
    timings: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind(self.kind))
        errors = []
        if self.n < 1:
            errors.append("n must be at least 1")
        if len(self.dims) != 3 or any(d < 1 for d in self.dims):
            errors.append(f"dims must be three positive integers, got {self.dims}")
        if self.rank < 1:
            errors.append("rank must be at least 1")
        if self.workers < 1:
            errors.append("workers must be at least 1")
        if errors:
            raise ValueError(f"Sweep configuration errors: {', '.join(errors)}")

    def flags(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "dims": list(self.dims),
            "rank": self.rank,
            "rank1_sigma": self.rank1_sigma,
            "timings": self.timings,
        }


def _finite(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _stats(values: List[float]) -> Optional[Dict[str, float]]:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return {"min": min(values), "max": max(values), "mean": sum(values) / len(values)}


@dataclass
class ExperimentReport:
    spec_revision: str
    rng_name: str
    seed: int
    flags: Dict[str, Any]
    instances: List[Dict[str, Any]]
    summary: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = self.summarize(self.instances)

    @staticmethod
    def summarize(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
        counts = {status.value: 0 for status in RowStatus}
        for row in rows:
            counts[row["status"]] += 1
        return {
            "instances": len(rows),
            "status_counts": counts,
            "slack": _stats([row.get("slack") for row in rows]),
            "defect": _stats([row.get("defect") for row in rows]),
            "gap": _stats([row.get("gap") for row in rows]),
        }

    @property
    def exit_code(self) -> int:
        """0 all invariants hold, 3 any solver failure, otherwise 2 on violations"""
        counts = self.summary["status_counts"]
        if counts[RowStatus.SOLVER_FAILURE.value]:
            return 3
        if counts[RowStatus.INVARIANT_VIOLATION.value]:
            return 2
        return 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec_revision": self.spec_revision,
            "rng_name": self.rng_name,
            "seed": self.seed,
            "flags": self.flags,
            "summary": self.summary,
            "instances": self.instances,
        }

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [{column: row.get(column) for column in CSV_COLUMNS} for row in self.instances]


def _base_row(cfg: SweepConfig, instance_id: int) -> Dict[str, Any]:
    d_a, d_b, d_c = cfg.dims
    return {"seed": cfg.seed, "instance_id": instance_id, "d_A": d_a, "d_B": d_b, "d_C": d_c}


def _finish(row: Dict[str, Any], failed: List[str]) -> Dict[str, Any]:
    row["failed"] = failed
    row["status"] = RowStatus.INVARIANT_VIOLATION.value if failed else RowStatus.OK.value
    if failed:
        logger.warning(f"Instance {row['instance_id']} violates {', '.join(failed)}")
    return row


def conditional_row(cfg: SweepConfig, instance_id: int) -> Dict[str, Any]:
    """One tripartite instance: FoR, Fawzi-Renner slack, Petz fidelity and the D_½ identity"""
    d_a, d_b, d_c = cfg.dims
    dims = SystemDims.of(A=d_a, B=d_b, C=d_c)
    rho = random_state(dims, min(cfg.rank, dims.total), seed=instance_seed(cfg.seed, instance_id))

    result = for_conditional(rho)
    fr = fawzi_renner_gap(rho, result=result)
    petz = petz_gap(rho, result=result)
    failed = result.violations()
    if petz.f_petz > petz.f_opt + PETZ_TOL:
        failed.append("petz_order")

    row = _base_row(cfg, instance_id)
    row.update(
        rank_sigma=rho.marginal(("B", "C")).rank,
        value=result.value,
        gap=result.gap,
        primal_lb=result.primal_lb,
        dual_ub=result.dual_ub,
        achieved_fidelity=result.achieved_fidelity,
        cqmi_bits=fr.cqmi_bits,
        neglogF_bits=_finite(fr.neg_log_for_bits),
        slack=_finite(fr.slack),
        slack_lower=_finite(fr.slack_lower),
        f_petz=petz.f_petz,
        petz_ratio=petz.ratio,
        iterations=result.iterations,
        certificate=result.certificate._asdict(),
        input=state_to_dict(rho),
    )
    if cfg.kind is SweepKind.FR:
        if fr.slack < -SLACK_TOL:
            failed.append("fr_slack")
        identity = renyi_half_recovery_identity(rho, result=result)
        row.update(renyi_lhs=_finite(identity.lhs), renyi_rhs=_finite(identity.rhs))
        if math.isfinite(identity.lhs) and abs(identity.lhs - identity.rhs) > RENYI_TOL:
            failed.append("renyi_identity")
    return _finish(row, failed)


def multiplicativity_row(cfg: SweepConfig, instance_id: int) -> Dict[str, Any]:
    """Two independent (ρ_AB, σ_AC) instances and their tensor product"""
    d_a, d_b, d_c = cfg.dims
    base = instance_seed(cfg.seed, instance_id)
    rho_dims = SystemDims.of(A=d_a, B=d_b)
    sigma_dims = SystemDims.of(A=d_a, C=d_c)
    sigma_rank = 1 if cfg.rank1_sigma else min(cfg.rank, sigma_dims.total)
    rho_rank = min(cfg.rank, rho_dims.total)
    states = (
        random_state(rho_dims, rho_rank, seed=instance_seed(base, 0)),
        random_state(sigma_dims, sigma_rank, seed=instance_seed(base, 1)),
        random_state(rho_dims, rho_rank, seed=instance_seed(base, 2)),
        random_state(sigma_dims, sigma_rank, seed=instance_seed(base, 3)),
    )
    report = multiplicativity_check(*states)

    failed = []
    if abs(report.defect) > DEFECT_TOL:
        failed.append("multiplicativity")
    if not report.tensor_feasible:
        failed.append("tensor_witness_feasible")
    if abs(report.tensor_objective - report.f1 * report.f2) > WITNESS_TOL:
        failed.append("tensor_witness_objective")
    if report.product_channel_fidelity < report.f12 - PRODUCT_CHANNEL_TOL:
        failed.append("product_channel")
    if report.renyi_defect_bits is not None and abs(report.renyi_defect_bits) > RENYI_TOL:
        failed.append("renyi_defect")

    row = _base_row(cfg, instance_id)
    row.update(
        rank_sigma=sigma_rank,
        value=report.f12,
        f1=report.f1,
        f2=report.f2,
        f12=report.f12,
        defect=report.defect,
        tensor_objective=report.tensor_objective,
        tensor_violation=report.tensor_violation,
        product_channel_fidelity=report.product_channel_fidelity,
        renyi_defect_bits=report.renyi_defect_bits,
        input={
            "rho1": state_to_dict(states[0]),
            "sigma1": state_to_dict(states[1]),
            "rho2": state_to_dict(states[2]),
            "sigma2": state_to_dict(states[3]),
        },
    )
    return _finish(row, failed)


def _selftest_rows(cfg: SweepConfig) -> List[Dict[str, Any]]:
    from selftest import run_selftest

    rows = []
    for instance_id, outcome in enumerate(run_selftest()):
        row = {"seed": cfg.seed, "instance_id": instance_id, "name": outcome.name, "detail": outcome.detail}
        if outcome.solver_failure:
            row.update(failed=[outcome.name], status=RowStatus.SOLVER_FAILURE.value)
        else:
            _finish(row, [] if outcome.passed else [outcome.name])
        rows.append(row)
    return rows


ROW_BUILDERS: Dict[SweepKind, Callable[[SweepConfig, int], Dict[str, Any]]] = {
    SweepKind.FR: conditional_row,
    SweepKind.PETZ: conditional_row,
    SweepKind.MULT: multiplicativity_row,
}


def _run_instance(cfg: SweepConfig, instance_id: int) -> Dict[str, Any]:
    builder = ROW_BUILDERS[cfg.kind]
    start = time.perf_counter() if cfg.timings else None
    try:
        row = builder(cfg, instance_id)
    except SolverError as e:
        logger.error(f"Instance {instance_id}: {e}")
        row = _base_row(cfg, instance_id)
        status = e.solution.status.value if e.solution is not None else None
        row.update(status=RowStatus.SOLVER_FAILURE.value, failed=["solver"], solver_status=status, error=str(e))
    row["wall_time_ms"] = round((time.perf_counter() - start) * 1000, 3) if start is not None else None
    return row


def run_sweep(cfg: SweepConfig) -> ExperimentReport:
    """Evaluate cfg.n instances and assemble the report"""
    logger.info(f"Running {cfg.kind.value} sweep: {cfg.n} instances, seed {cfg.seed}, {cfg.workers} worker(s)")
    if cfg.kind is SweepKind.SELFTEST:
        rows = _selftest_rows(cfg)
    elif cfg.workers == 1:
        rows = [_run_instance(cfg, i) for i in range(cfg.n)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda i: _run_instance(cfg, i), range(cfg.n)))
    rows.sort(key=lambda row: row["instance_id"])

    report = ExperimentReport(
        spec_revision=config.SPEC_REVISION,
        rng_name=config.RNG_NAME,
        seed=cfg.seed,
        flags=cfg.flags(),
        instances=rows,
    )
    counts = report.summary["status_counts"]
    logger.info(
        f"Sweep finished: {counts[RowStatus.OK.value]} ok, "
        f"{counts[RowStatus.INVARIANT_VIOLATION.value]} violations, "
        f"{counts[RowStatus.SOLVER_FAILURE.value]} solver failures"
    )
    return report


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report: ExperimentReport, out_dir: Optional[Path] = None) -> Tuple[Path, Path]:
    """Write <kind>_seed<S>.json and <kind>_seed<S>.csv into out_dir"""
    out_dir = Path(out_dir) if out_dir is not None else config.REPORT_DIR
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{report.flags['kind']}_seed{report.seed}"
    json_path = write_json(report.to_dict(), out_dir / f"{stem}.json")

    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.csv_rows():
            writer.writerow([_csv_cell(row[column]) for column in CSV_COLUMNS])
    logger.info(f"Report written to {json_path} and {csv_path}")
    return json_path, csv_path
