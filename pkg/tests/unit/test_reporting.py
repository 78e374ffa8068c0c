import pandas as pd

from os.path import isfile

from bitswap.constants import EXIT_OK, EXIT_VERIFICATION_FAILURE
from bitswap.core.swap import SwapMetrics, SwapRecord
from bitswap.functions.linearizability import LinearizabilityResult, Verdict
from bitswap.tools.reporting import (
    BenchReport,
    CheckReport,
    ExhaustiveReport,
    StressReport,
    latency_percentiles,
    plot_step_histogram,
    records_frame,
    step_histogram,
)

RECORDS = [
    SwapRecord(0, 0, 1, 1, 0, 0, 3, 3, 0, True),
    SwapRecord(0, 1, 1, 1, 1, 1, 2, 2, 1, False),
    SwapRecord(1, 0, 0, 2, 0, 2, 3, 7, 1, True),
]


# Test the dataframe helpers
# ------------------------------------------------------------------------------------------
def test_records_frame():

    frame = records_frame(RECORDS)
    assert type(frame) == pd.DataFrame
    assert len(frame) == 3
    assert list(frame["r"]) == [1, 1, 2]
    assert "register_ops" in frame.columns


def test_step_histogram():

    histogram = step_histogram(RECORDS)
    assert list(histogram.index) == [2, 3]
    assert list(histogram.values) == [1, 2]

    histogram = step_histogram(RECORDS, "register_ops")
    assert list(histogram.index) == [2, 3, 7]


def test_step_histogram_empty():
    assert len(step_histogram([])) == 0


def test_latency_percentiles():

    latencies = latency_percentiles(list(range(1, 101)))
    assert list(latencies.index) == ["p50", "p90", "p99", "max"]
    assert latencies["max"] == 100
    assert 50 <= latencies["p50"] <= 51

    assert len(latency_percentiles([])) == 0


def test_plot_step_histogram(tmp_path):

    path = str(tmp_path / "histogram.png")
    plot_step_histogram(step_histogram(RECORDS), path)
    assert isfile(path)


# Test the report classes
# ------------------------------------------------------------------------------------------
def test_ExhaustiveReport():

    report = ExhaustiveReport("dummy", schedules=4, passed_schedules=4, returned_multisets={(0, 1): 4})
    assert report.passed == True
    assert report.exit_code == EXIT_OK
    assert "verdict: pass" in str(report)
    assert "[0, 1]" in str(report)

    report.failed_schedules = 1
    report.first_failure = "schedule [0, 1]: not linearizable"
    assert report.exit_code == EXIT_VERIFICATION_FAILURE
    assert "first failure" in str(report)


def test_StressReport():

    report = StressReport(
        description="dummy",
        metrics=SwapMetrics(3, 2, 2),
        init_value=0,
        explicit=Verdict.ok(),
        step_bound=Verdict.ok(),
        real_time=Verdict.ok(),
        real_time_pairs=2,
        round_bound=Verdict.ok(),
        histogram=step_histogram(RECORDS),
    )
    assert report.passed == True
    assert "verdict: pass" in str(report)

    report.oracle_match = False
    assert report.passed == False

    report.oracle_match = True
    report.explicit = Verdict.fail(5, "round 1 has 2 winners")
    assert report.exit_code == EXIT_VERIFICATION_FAILURE
    assert "fail(clause 5)" in str(report)


def test_BenchReport():

    report = BenchReport(
        description="dummy",
        histogram=step_histogram(RECORDS),
        register_histogram=step_histogram(RECORDS, "register_ops"),
        register_bound=7,
        latencies=latency_percentiles([10, 20, 30]),
    )
    assert report.passed == True
    assert "p99" in str(report)

    report.register_bound = 5
    assert report.passed == False


def test_BenchReport_bad_histogram():

    report = BenchReport("dummy", pd.Series({1: 2}), pd.Series(dtype=int), None, pd.Series(dtype=float))
    assert report.passed == False


def test_CheckReport():

    report = CheckReport("history.txt", 2, brute_force=LinearizabilityResult(True))
    assert report.passed == True
    assert "skipped" in str(report)

    report.explicit = Verdict.fail(2, "wrong value")
    assert report.exit_code == EXIT_VERIFICATION_FAILURE

    report = CheckReport("history.txt", 2, brute_force=LinearizabilityResult(False))
    assert report.passed == False
