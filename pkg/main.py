"""
Main entry point for recoverlab

    python main.py for --named ghz3
    python main.py for --state state.json --json result.json
    python main.py sweep fr -n 200 --seed 7
    python main.py selftest
"""
import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import config
from experiments import SLACK_TOL, SweepConfig, SweepKind, run_sweep, write_report
from recovery import fawzi_renner_gap, for_conditional
from sdp import SolverError
from selftest import run_selftest
from serialization import InputError, load_state, result_to_dict, state_to_dict, write_json
from states import NAMED_STATES, LabeledState, named_state, random_state
from tensor import SystemDims

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_SOLVER = 3
EXIT_INPUT = 4


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as InputError so they map to the input-error exit code"""

    def error(self, message):
        raise InputError(message)


def _dims_arg(text: str) -> Tuple[int, int, int]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}")
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"expected three positive integers, got {text!r}")
    return dims


def _labels_arg(text: str) -> Tuple[str, str, str]:
    labels = tuple(part.strip() for part in text.split(","))
    if len(labels) != 3 or not all(labels):
        raise argparse.ArgumentTypeError(f"expected three comma-separated labels, got {text!r}")
    return labels


def _fmt(x: float) -> str:
    return f"{x:.9f}" if math.isfinite(x) else "inf"


class RecoverLabCLI:
    """Command table over the recovery library"""

    def __init__(self):
        self.parser = self._build_parser()
        self.handlers: Dict[str, Callable[[argparse.Namespace], int]] = {}
        self._register_handlers()

    def _register_handlers(self):
        """Register command handlers"""
        self.handlers["for"] = self.cmd_for
        self.handlers["sweep"] = self.cmd_sweep
        self.handlers["selftest"] = self.cmd_selftest

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = _Parser(prog="recoverlab", description="Fidelity of recovery via certified SDPs")
        commands = parser.add_subparsers(dest="command", required=True)

        p_for = commands.add_parser("for", help="F(A;B|C) of one tripartite state")
        source = p_for.add_mutually_exclusive_group(required=True)
        source.add_argument("--named", help=f"fixture state: {', '.join(NAMED_STATES)}")
        source.add_argument("--state", type=Path, help="state JSON file")
        source.add_argument("--random", action="store_true", help="seeded random state")
        p_for.add_argument("--dims", type=_dims_arg, default=(2, 2, 2), help="d_A,d_B,d_C for --random")
        p_for.add_argument("--rank", type=int, default=2, help="rank for --random")
        p_for.add_argument("--seed", type=int, default=None, help="seed for --random (RECOVERLAB_SEED)")
        p_for.add_argument("--labels", type=_labels_arg, default=("A", "B", "C"), help="labels of A,B,C")
        p_for.add_argument("--json", type=Path, default=None, help="write the full result here")

        p_sweep = commands.add_parser("sweep", help="seeded experiment sweep")
        p_sweep.add_argument("kind", choices=[k.value for k in SweepKind])
        p_sweep.add_argument("-n", type=int, default=10, help="number of instances")
        p_sweep.add_argument("--seed", type=int, default=None, help="base seed (RECOVERLAB_SEED)")
        p_sweep.add_argument("--dims", type=_dims_arg, default=(2, 2, 2), help="d_A,d_B,d_C")
        p_sweep.add_argument("--rank", type=int, default=2)
        p_sweep.add_argument("--rank1-sigma", action="store_true", help="rank-1 σ factors (mult)")
        p_sweep.add_argument("--out", type=Path, default=None, help=f"report directory ({config.REPORT_DIR})")
        p_sweep.add_argument("--workers", type=int, default=None, help="worker threads (SWEEP_WORKERS)")
        p_sweep.add_argument("--timings", action="store_true", help="record wall_time_ms")

        commands.add_parser("selftest", help="run the built-in known-answer checks")
        return parser

    def _load_input(self, args: argparse.Namespace) -> LabeledState:
        if args.named:
            return named_state(args.named)
        if args.state:
            return load_state(args.state)
        d_a, d_b, d_c = args.dims
        seed = config.DEFAULT_SEED if args.seed is None else args.seed
        logger.info(f"Random state dims {args.dims}, rank {args.rank}, seed {seed}")
        return random_state(SystemDims.of(A=d_a, B=d_b, C=d_c), args.rank, seed=seed)

    def cmd_for(self, args: argparse.Namespace) -> int:
        """F(A;B|C) with its Fawzi-Renner slack"""
        state = self._load_input(args)
        a, b, c = args.labels
        result = for_conditional(state, a, b, c)
        fr = fawzi_renner_gap(state, a, b, c, result=result)

        print(f"value        {result.value:.9f}")
        print(f"gap          {result.gap:.3e}")
        print(f"-log2 value  {_fmt(fr.neg_log_for_bits)}")
        print(f"cqmi_bits    {fr.cqmi_bits:.9f}")
        print(f"fr_slack     {_fmt(fr.slack)}")

        failed = result.violations()
        if fr.slack < -SLACK_TOL:
            failed.append("fr_slack")

        if args.json:
            payload = {
                "input": state_to_dict(state),
                "labels": [a, b, c],
                "result": result_to_dict(result),
                "cqmi_bits": fr.cqmi_bits,
                "neglogF_bits": fr.neg_log_for_bits if math.isfinite(fr.neg_log_for_bits) else None,
                "slack": fr.slack if math.isfinite(fr.slack) else None,
                "failed": failed,
            }
            path = write_json(payload, args.json)
            logger.info(f"Result written to {path}")

        if failed:
            logger.warning(f"Invariant violations: {', '.join(failed)}")
            return EXIT_INVARIANT
        return EXIT_OK

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        """Run a sweep and write its JSON and CSV reports"""
        cfg = SweepConfig(
            kind=args.kind,
            n=args.n,
            seed=config.DEFAULT_SEED if args.seed is None else args.seed,
            dims=args.dims,
            rank=args.rank,
            rank1_sigma=args.rank1_sigma,
            workers=config.SWEEP_WORKERS if args.workers is None else args.workers,
            timings=args.timings,
        )
        report = run_sweep(cfg)
        json_path, csv_path = write_report(report, args.out)

        counts = report.summary["status_counts"]
        print(f"instances    {report.summary['instances']}")
        for status, count in counts.items():
            print(f"{status:<20} {count}")
        for key in ("slack", "defect", "gap"):
            stats = report.summary.get(key)
            if stats:
                print(f"{key:<8} min {stats['min']:.3e}  max {stats['max']:.3e}  mean {stats['mean']:.3e}")
        print(f"report       {json_path}")
        print(f"csv          {csv_path}")
        return report.exit_code

    def cmd_selftest(self, args: argparse.Namespace) -> int:
        """Known-answer checks, one PASS/FAIL line each"""
        outcomes = run_selftest()
        for outcome in outcomes:
            if outcome.passed:
                print(f"PASS  {outcome.name}")
            else:
                detail = f": {outcome.detail}" if outcome.detail else ""
                print(f"FAIL  {outcome.name}{detail}")
        passed = sum(o.passed for o in outcomes)
        print(f"{passed}/{len(outcomes)} checks passed")

        if any(o.solver_failure for o in outcomes):
            return EXIT_SOLVER
        if passed < len(outcomes):
            return EXIT_INVARIANT
        return EXIT_OK

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Parse argv, dispatch, and map failures onto exit codes"""
        try:
            args = self.parser.parse_args(argv)
            logger.info(f"Running command {args.command!r}")
            return self.handlers[args.command](args)
        except SolverError as e:
            logger.error(f"Solver failure: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_SOLVER
        except (ValueError, OSError) as e:
            logger.error(f"Input error: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format=config.LOG_FORMAT,
    )
    try:
        config.validate_config()
        logger.info("Configuration validated")
    except ValueError as e:
        logger.error(f"{e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    return RecoverLabCLI().run(argv)


if __name__ == "__main__":
    sys.exit(main())
