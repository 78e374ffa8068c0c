from __future__ import annotations

import os
import sys
import logging
import argparse

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional

from bitswap.config import (
    CAPACITY_MARGIN,
    EXHAUSTIVE_MAX_OPS,
    EXHAUSTIVE_MAX_PROCS,
    MAX_BRUTE_FORCE_OPS,
    Backend,
    InitMode,
    InputPattern,
    Mode,
)
from bitswap.constants import EXIT_CAPACITY, EXIT_PARSE_ERROR, EXIT_REFUSAL
from bitswap.core.base import check_bit
from bitswap.core.history import History, load_records, records_path, save_records
from bitswap.engines.model import ModelEngine
from bitswap.engines.threads import ThreadEngine
from bitswap.exceptions import CapacityError, ContractViolation, HistoryParseError, InstrumentationError, RefusalError
from bitswap.functions.linearizability import (
    Verdict,
    brute_force_linearizable,
    explicit_linearize,
    seq_swap_oracle,
    verify_explicit,
)
from bitswap.functions.properties import check_real_time_rounds, check_round_bound, check_step_bound
from bitswap.functions.utils import build_programs
from bitswap.tools.reporting import (
    BenchReport,
    CheckReport,
    ExhaustiveReport,
    StressReport,
    latency_percentiles,
    plot_step_histogram,
    step_histogram,
)

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """
    The configuration of a harness run.

    Attributes
    ----------
    mode: Mode
        The harness mode.
    procs: int
        The number of processes n (default: 2).
    ops: int
        The number of swaps per process (default: 1).
    seed: int
        The seed of the random input pattern.
    backend: Backend
        The max register backend (default: `Backend.ATOMIC`).
    init_value: int
        The initial value b of the swap object (default: 0).
    capacity: Optional[int]
        The register-tree capacity. If set to None it is sized automatically.
    out_path: Optional[str]
        Where to write the history (and the `.records` sidecar). For `check` mode, the history
        file to check.
    force_large: bool
        If set to True the exhaustive matrix limits are lifted and the register-tree backend can
        be explored exhaustively.
    pattern: Optional[InputPattern]
        The input pattern. Defaults to `mixed` in exhaustive mode and `random` otherwise.
    init_mode: InitMode
        How the swap object reaches its initial value (default: `InitMode.PRESET`).
    plot_path: Optional[str]
        Where the bench mode saves the histogram figure.

    Raises
    ------
    ContractViolation
        Exception raised if a field is out of range.
    RefusalError
        Exception raised if an exhaustive run exceeds the matrix limits without `force_large`.
    """

    mode: Mode
    procs: int = 2
    ops: int = 1
    seed: int = 0
    backend: Backend = Backend.ATOMIC
    init_value: int = 0
    capacity: Optional[int] = None
    out_path: Optional[str] = None
    force_large: bool = False
    pattern: Optional[InputPattern] = None
    init_mode: InitMode = InitMode.PRESET
    plot_path: Optional[str] = None

    def __post_init__(self) -> None:
        check_bit(self.init_value, "initial value")
        if self.procs < 1:
            raise ContractViolation(f"The number of processes must be positive, got {self.procs}")
        if self.ops < 0:
            raise ContractViolation(f"The number of operations cannot be negative, got {self.ops}")
        if self.seed < 0:
            raise ContractViolation(f"The seed must be an unsigned integer, got {self.seed}")
        if self.capacity is not None and (self.capacity < 1 or self.capacity & (self.capacity - 1)):
            raise ContractViolation(f"The capacity must be a power of two, got {self.capacity}")

        if self.pattern is None:
            self.pattern = InputPattern.MIXED if self.mode == Mode.EXHAUSTIVE else InputPattern.RANDOM

        if self.mode == Mode.EXHAUSTIVE and (self.procs > EXHAUSTIVE_MAX_PROCS or self.ops > EXHAUSTIVE_MAX_OPS):
            if not self.force_large:
                msg = (
                    f"Exhaustive mode is limited to {EXHAUSTIVE_MAX_PROCS} processes and {EXHAUSTIVE_MAX_OPS} operations "
                    f"per process (requested {self.procs} x {self.ops}); use --force-large to override"
                )
                logger.error(msg)
                raise RefusalError(msg, self.procs * self.ops, EXHAUSTIVE_MAX_PROCS * EXHAUSTIVE_MAX_OPS)
            logger.warning(f"Exhaustive matrix limits overridden: {self.procs} x {self.ops}")

    @property
    def description(self) -> str:
        info = f"{self.mode.value} | procs: {self.procs} | ops: {self.ops} | backend: {self.backend.value}"
        info += f" | init: {self.init_value} | pattern: {self.pattern.value}"
        if self.pattern == InputPattern.RANDOM:
            info += f" | seed: {self.seed}"
        if self.backend == Backend.REGTREE:
            info += f" | capacity: {self.effective_capacity()}"
        return info

    def effective_capacity(self) -> Optional[int]:
        """
        Returns the register-tree capacity of the run: the configured one or, if unset, the
        smallest power of two above `b + procs*ops` (plus `CAPACITY_MARGIN` outside exhaustive
        mode, where every register access is a scheduler step).
        """
        if self.backend != Backend.REGTREE:
            return None
        if self.capacity is not None:
            return self.capacity

        needed = self.init_value + self.procs * self.ops + 1
        if self.mode != Mode.EXHAUSTIVE:
            needed += CAPACITY_MARGIN
        return 1 << max(1, (needed - 1).bit_length())


def cmd_exhaustive(cfg: RunConfig) -> ExhaustiveReport:
    """
    Explores every schedule of the configured program matrix, checking each history with both
    the brute-force checker and the explicit verifier.

    Raises
    ------
    RefusalError
        Exception raised if the schedule bound is exceeded.
    """
    programs = build_programs(cfg.pattern, cfg.procs, cfg.ops, cfg.seed)
    engine = ModelEngine(
        backend=cfg.backend,
        capacity=cfg.effective_capacity(),
        init_mode=cfg.init_mode,
        allow_regtree=cfg.force_large,
    )
    logger.info(f"Exhaustive run: {cfg.description}")

    report = ExhaustiveReport(cfg.description)
    multisets: Counter = Counter()
    saved = None

    # Many schedules produce the same history: verdicts are cached by history signature
    brute_verdicts: Dict[tuple, bool] = {}
    explicit_verdicts: Dict[tuple, Verdict] = {}

    for outcome in engine.enumerate_outcomes(programs, cfg.init_value):
        signature = outcome.history.signature()
        if signature not in brute_verdicts:
            brute_verdicts[signature] = bool(brute_force_linearizable(outcome.history))
        brute = brute_verdicts[signature]

        grouping = explicit_linearize(outcome.records, cfg.init_value)
        key = signature + tuple((rec.proc, rec.op_id, rec.v, rec.r, rec.tas_result, rec.returned) for rec in grouping.flatten())
        if key not in explicit_verdicts:
            explicit_verdicts[key] = verify_explicit(grouping, outcome.history, cfg.init_value)
        explicit = explicit_verdicts[key]
        steps = check_step_bound(outcome.records)

        report.schedules += 1
        report.max_base_ops = max([report.max_base_ops] + [record.base_ops for record in outcome.records])
        multisets[tuple(sorted(outcome.returned))] += 1

        if bool(brute) != bool(explicit):
            report.disagreements += 1

        # keep the last history, or the first failing one
        if report.first_failure is None:
            saved = outcome

        if brute and explicit and steps:
            report.passed_schedules += 1
        else:
            report.failed_schedules += 1
            if report.first_failure is None:
                reason = explicit if not explicit else steps if not steps else "not linearizable"
                report.first_failure = f"schedule {outcome.schedule}: {reason}"

    report.returned_multisets = dict(multisets)
    logger.info(f"{report.schedules} schedules explored ({len(brute_verdicts)} distinct histories), {report.failed_schedules} failed")

    if cfg.out_path and saved is not None:
        saved.history.save(cfg.out_path)
        save_records(saved.records, records_path(cfg.out_path))

    return report


def cmd_stress(cfg: RunConfig) -> StressReport:
    """
    Runs the configured programs on real threads sharing one swap object, then verifies the
    explicit linearization, the step bound, the real-time order of rounds and the bound on
    `maxRound` at quiescence.
    """
    programs = build_programs(cfg.pattern, cfg.procs, cfg.ops, cfg.seed)
    engine = ThreadEngine(cfg.backend, capacity=cfg.effective_capacity(), init_mode=cfg.init_mode)
    logger.info(f"Stress run: {cfg.description}")

    outcome = engine.run(programs, cfg.init_value)
    grouping = explicit_linearize(outcome.records, cfg.init_value)
    real_time, pairs = check_real_time_rounds(outcome.records, outcome.history)

    oracle_match = None
    if cfg.procs == 1:
        oracle_match = outcome.returned == seq_swap_oracle(cfg.init_value, programs[0].inputs)

    report = StressReport(
        description=cfg.description,
        metrics=outcome.metrics,
        init_value=cfg.init_value,
        explicit=verify_explicit(grouping, outcome.history, cfg.init_value),
        step_bound=check_step_bound(outcome.records),
        real_time=real_time,
        real_time_pairs=pairs,
        round_bound=check_round_bound(outcome.metrics, cfg.init_value),
        histogram=step_histogram(outcome.records),
        oracle_match=oracle_match,
    )
    logger.info(f"Stress verdict: {'pass' if report.passed else 'fail'}")

    if cfg.out_path:
        outcome.history.save(cfg.out_path)
        save_records(outcome.records, records_path(cfg.out_path))

    return report


def cmd_bench(cfg: RunConfig) -> BenchReport:
    """
    Measures the base-object operations, the register accesses and the wall time of every swap.

    Raises
    ------
    CapacityError
        Exception raised if the register-tree backend is exhausted.
    """
    programs = build_programs(cfg.pattern, cfg.procs, cfg.ops, cfg.seed)
    capacity = cfg.effective_capacity()
    engine = ThreadEngine(cfg.backend, capacity=capacity, init_mode=cfg.init_mode, timed=True)
    logger.info(f"Bench run: {cfg.description}")

    outcome = engine.run(programs, cfg.init_value)

    # one max register read, an optional max register write and one test-and-set
    register_bound = None
    if cfg.backend == Backend.REGTREE:
        register_bound = 2 * capacity.bit_length() + 1

    report = BenchReport(
        description=cfg.description,
        histogram=step_histogram(outcome.records),
        register_histogram=step_histogram(outcome.records, "register_ops"),
        register_bound=register_bound,
        latencies=latency_percentiles(outcome.durations_ns),
    )

    if cfg.plot_path:
        plot_step_histogram(report.histogram, cfg.plot_path)

    return report


def cmd_check(path: str) -> CheckReport:
    """
    Checks a history file offline: the brute-force checker runs when the history is small
    enough, the explicit verifier runs when a complete history has a `.records` sidecar.

    Raises
    ------
    HistoryParseError
        Exception raised if the history or the records cannot be parsed.
    RefusalError
        Exception raised if the history is too large for brute force and has no records.
    """
    history = History.from_file(path)
    operations = history.operations()
    report = CheckReport(path, len(operations))

    completed = sum(1 for span in operations if not span.pending)
    if completed <= MAX_BRUTE_FORCE_OPS:
        report.brute_force = brute_force_linearizable(history)
    else:
        logger.warning(f"Brute-force check skipped: {completed} completed operations (bound {MAX_BRUTE_FORCE_OPS})")

    sidecar = records_path(path)
    if os.path.isfile(sidecar):
        if history.is_complete:
            records = load_records(sidecar, history)
            try:
                report.explicit = verify_explicit(explicit_linearize(records, history.init_value), history, history.init_value)
            except (ContractViolation, InstrumentationError) as error:
                report.explicit = Verdict.fail(None, str(error))
        else:
            logger.warning("Explicit verification skipped: the history has pending operations")

    if report.brute_force is None and report.explicit is None:
        msg = f"No check can run on {path}: {completed} completed operations and no usable records"
        logger.error(msg)
        raise RefusalError(msg, completed, MAX_BRUTE_FORCE_OPS)

    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitswap",
        description="Verification harness for the wait-free one-bit swap object",
    )
    parser.add_argument("path", nargs="?", help="History file to check (check mode)")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EXHAUSTIVE.value, help="Harness mode")
    parser.add_argument("--procs", type=int, default=2, help="Number of processes (default: 2)")
    parser.add_argument("--ops", type=int, default=1, help="Swaps per process (default: 1)")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the random input pattern (default: 0)")
    parser.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.ATOMIC.value, help="Max register backend")
    parser.add_argument("--init", type=int, choices=[0, 1], default=0, help="Initial value of the swap object (default: 0)")
    parser.add_argument("--init-mode", choices=[m.value for m in InitMode], default=InitMode.PRESET.value, help="Initialization")
    parser.add_argument("--capacity", type=int, default=None, help="Register-tree capacity, a power of two")
    parser.add_argument("--pattern", choices=[p.value for p in InputPattern], default=None, help="Input pattern")
    parser.add_argument("--out", default=None, help="Write the history (and PATH.records) to PATH")
    parser.add_argument("--plot", default=None, help="Save the bench histogram figure to PATH")
    parser.add_argument("--force-large", action="store_true", help="Lift the exhaustive size limits")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Suppress all logging except errors")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command line entry point. Returns the exit status: 0 if every check passed, 2 on parse
    errors, 3 on refusals, 4 on verification failures, 5 on register-tree exhaustion.
    """
    args = build_parser().parse_args(argv)

    if args.quiet:
        logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    elif args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    else:
        logging.basicConfig(level=logging.INFO, format="%(message)s")

    mode = Mode(args.mode)
    try:
        if mode == Mode.CHECK:
            path = args.path or args.out
            if path is None:
                logger.error("Check mode requires a history file")
                return EXIT_PARSE_ERROR
            report = cmd_check(path)
        else:
            cfg = RunConfig(
                mode=mode,
                procs=args.procs,
                ops=args.ops,
                seed=args.seed,
                backend=Backend(args.backend),
                init_value=args.init,
                capacity=args.capacity,
                out_path=args.out,
                force_large=args.force_large,
                pattern=InputPattern(args.pattern) if args.pattern else None,
                init_mode=InitMode(args.init_mode),
                plot_path=args.plot,
            )
            commands = {Mode.EXHAUSTIVE: cmd_exhaustive, Mode.STRESS: cmd_stress, Mode.BENCH: cmd_bench}
            report = commands[mode](cfg)

    except (HistoryParseError, FileNotFoundError) as error:
        logger.error(f"Parse error: {error}")
        return EXIT_PARSE_ERROR
    except ContractViolation as error:
        logger.error(f"Invalid configuration: {error}")
        return EXIT_PARSE_ERROR
    except RefusalError as error:
        logger.error(f"Refused: {error}")
        return EXIT_REFUSAL
    except CapacityError as error:
        logger.error(f"Register tree exhausted: {error}")
        return EXIT_CAPACITY

    print(report)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
