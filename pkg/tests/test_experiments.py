"""
Tests for sweeps, reports and the built-in self-test
"""
import csv
import json

import pytest

import config
from experiments import (
    CSV_COLUMNS,
    ExperimentReport,
    RowStatus,
    SweepConfig,
    SweepKind,
    conditional_row,
    multiplicativity_row,
    run_sweep,
    write_report,
)
from recovery import MultiplicativityReport, RecoveryResult
from sdp import SolverError
from selftest import CHECKS, CheckOutcome, run_selftest


class TestSweepConfig:
    """Test sweep configuration"""

    def test_defaults_from_config(self):
        cfg = SweepConfig(kind="fr")
        assert cfg.kind is SweepKind.FR
        assert cfg.seed == config.DEFAULT_SEED
        assert cfg.workers == config.SWEEP_WORKERS

    def test_invalid_values_collected(self):
        with pytest.raises(ValueError, match="Sweep configuration errors") as info:
            SweepConfig(kind="fr", n=0, dims=(2, 2), rank=0)
        message = str(info.value)
        assert "n must be" in message and "dims" in message and "rank" in message

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            SweepConfig(kind="plot")

    def test_flags_exclude_seed_and_workers(self):
        flags = SweepConfig(kind="mult", n=3, rank1_sigma=True, workers=4).flags()
        assert flags == {
            "kind": "mult",
            "n": 3,
            "dims": [2, 2, 2],
            "rank": 2,
            "rank1_sigma": True,
            "timings": False,
        }


class TestReport:
    """Test report assembly"""

    def test_summary_and_exit_code(self):
        rows = [
            {"instance_id": 0, "status": "ok", "slack": 0.5, "gap": 1e-9},
            {"instance_id": 1, "status": "invariant_violation", "slack": -0.1, "gap": 2e-9},
        ]
        report = ExperimentReport("r", "g", 7, {"kind": "fr"}, rows)
        assert report.summary["status_counts"] == {"ok": 1, "invariant_violation": 1, "solver_failure": 0}
        assert report.summary["slack"] == {"min": -0.1, "max": 0.5, "mean": pytest.approx(0.2)}
        assert report.summary["defect"] is None
        assert report.exit_code == 2

    def test_solver_failure_takes_precedence(self):
        rows = [
            {"instance_id": 0, "status": "invariant_violation"},
            {"instance_id": 1, "status": "solver_failure"},
        ]
        assert ExperimentReport("r", "g", 7, {}, rows).exit_code == 3

    def test_csv_rows_have_fixed_columns(self):
        report = ExperimentReport("r", "g", 7, {"kind": "fr"}, [{"instance_id": 0, "status": "ok", "extra": 1}])
        assert list(report.csv_rows()[0]) == list(CSV_COLUMNS)


class TestSweeps:
    """Test sweeps end to end on small instance counts"""

    def test_fr_sweep(self):
        report = run_sweep(SweepConfig(kind="fr", n=2, seed=7))
        assert [row["instance_id"] for row in report.instances] == [0, 1]
        assert report.exit_code == 0
        for row in report.instances:
            assert row["status"] == RowStatus.OK.value
            assert row["slack"] >= -1e-6
            assert row["wall_time_ms"] is None
            assert row["input"]["kind"] == "state"
        assert report.spec_revision == config.SPEC_REVISION
        assert report.rng_name == config.RNG_NAME

    def test_petz_sweep(self):
        report = run_sweep(SweepConfig(kind="petz", n=1, seed=3, rank=3))
        row = report.instances[0]
        assert row["f_petz"] <= row["value"] + 1e-6
        assert "renyi_lhs" not in row

    def test_mult_sweep(self):
        report = run_sweep(SweepConfig(kind="mult", n=1, seed=7, rank1_sigma=True))
        row = report.instances[0]
        assert row["rank_sigma"] == 1
        assert abs(row["defect"]) <= 1e-4
        assert report.exit_code == 0

    def test_timings_recorded_on_request(self):
        report = run_sweep(SweepConfig(kind="fr", n=1, timings=True))
        assert report.instances[0]["wall_time_ms"] > 0

    def test_workers_do_not_change_rows(self):
        serial = run_sweep(SweepConfig(kind="fr", n=3, seed=11, workers=1))
        pooled = run_sweep(SweepConfig(kind="fr", n=3, seed=11, workers=3))
        assert json.dumps(serial.to_dict()) == json.dumps(pooled.to_dict())

    def test_solver_failure_rows(self, mocker):
        mocker.patch("experiments.for_conditional", side_effect=SolverError("stalled"))
        report = run_sweep(SweepConfig(kind="fr", n=2))
        assert all(row["status"] == RowStatus.SOLVER_FAILURE.value for row in report.instances)
        assert report.instances[0]["error"] == "stalled"
        assert report.exit_code == 3

    def test_invariant_violation_rows(self, mocker):
        mocker.patch.object(RecoveryResult, "violations", return_value=["gap"])
        report = run_sweep(SweepConfig(kind="fr", n=1))
        row = report.instances[0]
        assert row["status"] == RowStatus.INVARIANT_VIOLATION.value
        assert "gap" in row["failed"]
        assert report.exit_code == 2

    @pytest.mark.parametrize("renyi_defect_bits,expected", [(1e-3, "invariant_violation"), (None, "ok")])
    def test_renyi_defect_checked(self, mocker, renyi_defect_bits, expected):
        report = MultiplicativityReport(
            f1=0.5,
            f2=0.5,
            f12=0.25,
            defect=0.0,
            tensor_objective=0.25,
            tensor_violation=0.0,
            tensor_feasible=True,
            product_channel_fidelity=0.25,
            renyi_defect_bits=renyi_defect_bits,
        )
        mocker.patch("experiments.multiplicativity_check", return_value=report)
        row = multiplicativity_row(SweepConfig(kind="mult", n=1, seed=7), 0)
        assert row["status"] == expected
        assert ("renyi_defect" in row["failed"]) == (renyi_defect_bits is not None)

    @pytest.mark.slow
    @pytest.mark.regression
    @pytest.mark.parametrize("instance_id", [2, 6])
    def test_seed7_fr_instances_certify(self, instance_id):
        """Test the dual witness objective stays within tolerance of dual_ub"""
        row = conditional_row(SweepConfig(kind="fr", n=7, seed=7), instance_id)
        assert row["failed"] == []
        assert row["status"] == RowStatus.OK.value

    @pytest.mark.slow
    @pytest.mark.regression
    def test_stalled_mult_instance_is_accepted(self):
        """Test seed 7 instance 6 with rank-one σ, whose product SDP stalls just short of the gap tolerance"""
        row = multiplicativity_row(SweepConfig(kind="mult", n=7, seed=7, rank1_sigma=True), 6)
        assert row["status"] == RowStatus.OK.value
        assert abs(row["defect"]) <= 1e-4

    def test_selftest_sweep(self, mocker):
        mocker.patch(
            "selftest.run_selftest",
            return_value=[CheckOutcome("one", True, ""), CheckOutcome("two", False, "off by one")],
        )
        report = run_sweep(SweepConfig(kind="selftest"))
        assert [row["name"] for row in report.instances] == ["one", "two"]
        assert report.exit_code == 2


class TestWriteReport:
    """Test report files"""

    def test_files_and_columns(self, report_dir):
        report = run_sweep(SweepConfig(kind="fr", n=1, seed=5))
        json_path, csv_path = write_report(report, report_dir)
        assert json_path.name == "fr_seed5.json"
        assert csv_path.name == "fr_seed5.csv"

        data = json.loads(json_path.read_text())
        assert data["seed"] == 5
        assert data["flags"]["kind"] == "fr"

        with open(csv_path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[1][CSV_COLUMNS.index("wall_time_ms")] == ""
        assert float(rows[1][CSV_COLUMNS.index("value")]) == data["instances"][0]["value"]

    def test_reports_are_reproducible(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        write_report(run_sweep(SweepConfig(kind="fr", n=2, seed=7)), first)
        write_report(run_sweep(SweepConfig(kind="fr", n=2, seed=7)), second)
        for name in ("fr_seed7.json", "fr_seed7.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    @pytest.mark.slow
    def test_full_fr_sweep_is_reproducible(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        report = run_sweep(SweepConfig(kind="fr", n=200, seed=7))
        assert report.exit_code == 0
        write_report(report, first)
        write_report(run_sweep(SweepConfig(kind="fr", n=200, seed=7)), second)
        assert (first / "fr_seed7.json").read_bytes() == (second / "fr_seed7.json").read_bytes()

    @pytest.mark.slow
    def test_full_mult_sweep(self):
        report = run_sweep(SweepConfig(kind="mult", n=50, seed=7, rank1_sigma=True))
        assert report.exit_code == 0
        assert max(abs(row["defect"]) for row in report.instances) <= 1e-4


class TestSelftest:
    """Test the built-in known-answer checks"""

    def test_checks_have_unique_names(self):
        names = [name for name, _ in CHECKS]
        assert len(names) == len(set(names))

    def test_exceptions_become_failures(self, mocker):
        def broken():
            raise ValueError("bad input")

        def stalled():
            raise SolverError("stalled")

        mocker.patch("selftest.CHECKS", [("broken", broken), ("stalled", stalled), ("fine", lambda: True)])
        outcomes = run_selftest()
        assert [o.passed for o in outcomes] == [False, False, True]
        assert outcomes[0].detail == "ValueError: bad input"
        assert outcomes[1].solver_failure

    @pytest.mark.slow
    def test_all_checks_pass(self):
        failed = [o for o in run_selftest() if not o.passed]
        assert failed == []
