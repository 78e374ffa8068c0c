from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from bitswap.constants import EXIT_OK, EXIT_VERIFICATION_FAILURE
from bitswap.core.swap import SwapMetrics, SwapRecord
from bitswap.functions.linearizability import LinearizabilityResult, Verdict

logger = logging.getLogger(__name__)

RULE = "----------------------------------------------\n"


def records_frame(records: List[SwapRecord]) -> pd.DataFrame:
    """
    Returns the records as a `pandas.DataFrame` with one row per swap.
    """
    columns = list(SwapRecord.__dataclass_fields__)
    return pd.DataFrame([record.to_dict() for record in records], columns=columns)


def step_histogram(records: List[SwapRecord], column: str = "base_ops") -> pd.Series:
    """
    Returns the number of swaps for each value of a step column (`base_ops` or `register_ops`),
    sorted by number of steps.
    """
    frame = records_frame(records)
    return frame[column].value_counts().sort_index().astype(int)


def latency_percentiles(durations_ns: List[int]) -> pd.Series:
    """
    Returns the 50th, 90th and 99th percentiles and the maximum of the given durations (ns).
    """
    if not durations_ns:
        return pd.Series(dtype=float)
    values = np.asarray(durations_ns, dtype=np.float64)
    quantiles = np.percentile(values, [50, 90, 99])
    return pd.Series({"p50": quantiles[0], "p90": quantiles[1], "p99": quantiles[2], "max": values.max()})


def plot_step_histogram(
    histogram: pd.Series,
    export_path: str,
    title: str = "Base-object operations per swap",
    figsize: Tuple[int, int] = (6, 4),
    color: str = "#154C79",
    export_dpi: int = 300,
) -> None:
    """
    Saves a bar plot of a step histogram.

    Arguments
    ---------
    histogram: pd.Series
        The histogram, indexed by number of steps.
    export_path: str
        The path of the image file.
    title: str
        The title of the figure.
    figsize: Tuple[int, int]
        The size of the matplotlib figure.
    color: str
        The color of the bars.
    export_dpi: int
        The resolution of the exported image (default: 300).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=figsize)
    ax.bar([str(index) for index in histogram.index], histogram.values, color=color)
    ax.set_xlabel("steps")
    ax.set_ylabel("swaps")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(export_path, dpi=export_dpi)
    plt.close(fig)
    logger.info(f"Histogram saved to {export_path}")


def _histogram_lines(histogram: pd.Series) -> str:
    info = " steps     swaps\n"
    for steps, count in histogram.items():
        info += f" {steps:<6}{count:>9}\n"
    return info


@dataclass
class ExhaustiveReport:
    """
    Summary of an exhaustive exploration: one entry per schedule, each history checked with
    both the brute-force checker and the explicit verifier.
    """

    description: str
    schedules: int = 0
    passed_schedules: int = 0
    failed_schedules: int = 0
    disagreements: int = 0
    max_base_ops: int = 0
    returned_multisets: Dict[Tuple[int, ...], int] = field(default_factory=dict)
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failed_schedules == 0 and self.disagreements == 0

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_VERIFICATION_FAILURE

    def __str__(self) -> str:
        info = "EXHAUSTIVE VERIFICATION\n"
        info += RULE
        info += f" {self.description}\n"
        info += RULE
        info += f" schedules            {self.schedules:>10}\n"
        info += f" passed               {self.passed_schedules:>10}\n"
        info += f" failed               {self.failed_schedules:>10}\n"
        info += f" checker disagreement {self.disagreements:>10}\n"
        info += f" max base operations  {self.max_base_ops:>10}\n"
        info += RULE
        info += " returned multiset     schedules\n"
        for multiset, count in sorted(self.returned_multisets.items()):
            info += f" {str(list(multiset)):<20}{count:>10}\n"
        info += RULE
        info += f" verdict: {'pass' if self.passed else 'fail'}\n"
        if self.first_failure:
            info += f" first failure: {self.first_failure}\n"
        return info


@dataclass
class StressReport:
    """
    Summary of a multi-threaded run verified at quiescence.
    """

    description: str
    metrics: SwapMetrics
    init_value: int
    explicit: Verdict
    step_bound: Verdict
    real_time: Verdict
    real_time_pairs: int
    round_bound: Verdict
    histogram: pd.Series
    oracle_match: Optional[bool] = None

    @property
    def passed(self) -> bool:
        checks = [self.explicit, self.step_bound, self.real_time, self.round_bound]
        return all(checks) and self.oracle_match is not False

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_VERIFICATION_FAILURE

    def __str__(self) -> str:
        info = "STRESS VERIFICATION\n"
        info += RULE
        info += f" {self.description}\n"
        info += RULE
        info += f" swaps                {self.metrics.total_swaps:>10}\n"
        info += f" value changes (t)    {self.metrics.switch_count:>10}\n"
        info += f" final maxRound       {self.metrics.max_round_final:>10}\n"
        info += f" initial value (b)    {self.init_value:>10}\n"
        info += f" real-time pairs      {self.real_time_pairs:>10}\n"
        info += RULE
        info += _histogram_lines(self.histogram)
        info += RULE
        info += f" explicit linearization  {self.explicit}\n"
        info += f" step bound              {self.step_bound}\n"
        info += f" real-time round order   {self.real_time}\n"
        info += f" maxRound bound          {self.round_bound}\n"
        if self.oracle_match is not None:
            info += f" sequential oracle       {'pass' if self.oracle_match else 'fail'}\n"
        info += RULE
        info += f" verdict: {'pass' if self.passed else 'fail'}\n"
        return info


@dataclass
class BenchReport:
    """
    Step and wall-time measurements of a run.
    """

    description: str
    histogram: pd.Series
    register_histogram: pd.Series
    register_bound: Optional[int]
    latencies: pd.Series

    @property
    def passed(self) -> bool:
        if not set(self.histogram.index) <= {2, 3}:
            return False
        if self.register_bound is not None and len(self.register_histogram):
            return int(self.register_histogram.index.max()) <= self.register_bound
        return True

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_VERIFICATION_FAILURE

    def __str__(self) -> str:
        info = "BENCHMARK\n"
        info += RULE
        info += f" {self.description}\n"
        info += RULE
        info += " base-object operations per swap\n"
        info += _histogram_lines(self.histogram)
        if self.register_bound is not None:
            info += RULE
            info += f" register accesses per swap (bound {self.register_bound})\n"
            info += _histogram_lines(self.register_histogram)
        info += RULE
        info += " wall time per swap (ns)\n"
        for name, value in self.latencies.items():
            info += f" {name:<6}{value:>12.0f}\n"
        info += RULE
        info += f" verdict: {'pass' if self.passed else 'fail'}\n"
        return info


@dataclass
class CheckReport:
    """
    Verdicts of the offline checks run on a history file.
    """

    path: str
    operations: int
    brute_force: Optional[LinearizabilityResult] = None
    explicit: Optional[Verdict] = None

    @property
    def passed(self) -> bool:
        if self.brute_force is not None and not self.brute_force:
            return False
        if self.explicit is not None and not self.explicit:
            return False
        return True

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_VERIFICATION_FAILURE

    def __str__(self) -> str:
        info = "HISTORY CHECK\n"
        info += RULE
        info += f" {self.path} ({self.operations} operations)\n"
        info += RULE
        if self.brute_force is None:
            info += " brute force             skipped\n"
        else:
            info += f" brute force             {'pass' if self.brute_force else 'fail'}\n"
        info += f" explicit linearization  {self.explicit if self.explicit is not None else 'skipped'}\n"
        info += RULE
        info += f" verdict: {'pass' if self.passed else 'fail'}\n"
        return info
