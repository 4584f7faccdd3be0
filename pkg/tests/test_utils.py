"""
Tests for enumeration, parallel helpers, error handling, metrics, reports and settings
"""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from loguru import logger

from src.config import Settings
from src.dependencies import FieldContainer, get_base_field, get_real_field
from src.models.schemas import PrimeCoefficient
from src.utils.enumeration import count_bound, form_value, integral_form, ldl_coefficients, short_vectors
from src.utils.metrics import PerformanceMetrics, track_performance, get_metrics
from src.utils.parallel import ordered_map, stable_sum
from src.utils.report_export import ReportExporter
from src.utils.resilience import (
    BatchStatus,
    ConfigurationError,
    DivisorProximityError,
    ExitCode,
    FieldValidationError,
    LatticeError,
    exit_code_for,
    log_failures,
    run_item,
)


# ============= Enumeration =============

GRAMS = [
    np.array([[2.0, 1.0], [1.0, 2.0]]),
    np.array([[1.0, 0.5, 0.0], [0.5, 3.0, -1.0], [0.0, -1.0, 2.0]]),
    np.array([[5.0, 2.0], [2.0, 1.0]]),
]


@pytest.mark.parametrize("gram", GRAMS)
@pytest.mark.parametrize("bound", [0.5, 3.0, 7.5])
def test_short_vectors_match_brute_force(gram, bound):
    """Test Fincke-Pohst against a box search wide enough to contain the ellipsoid"""
    n = gram.shape[0]
    width = int(np.ceil(np.sqrt(bound * np.max(np.diag(np.linalg.inv(gram)))))) + 1
    expected = {
        x for x in itertools.product(range(-width, width + 1), repeat=n)
        if float(np.array(x) @ gram @ np.array(x)) <= bound + 1e-9
    }
    found = set(short_vectors(gram, bound))
    assert found == expected
    q, _ = ldl_coefficients(gram)
    assert len(found) <= count_bound(q, bound)


def test_short_vectors_edge_cases():
    assert list(short_vectors(np.zeros((0, 0)), 1.0)) == [()]
    assert list(short_vectors(GRAMS[0], -1.0)) == []
    with pytest.raises(LatticeError):
        list(short_vectors(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0))


def test_integral_form_and_values():
    matrix = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 3), Fraction(2)]]
    s, scale = integral_form(matrix)
    assert scale == 6
    assert s == [[3, 2], [2, 12]]
    assert form_value(s, (1, -1)) == 3 - 4 + 12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), max_size=40), st.randoms())
def test_stable_sum_ignores_order(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert stable_sum(values) == stable_sum(shuffled)


# ============= Parallel helpers =============

def test_ordered_map_keeps_input_order():
    items = list(range(50))
    assert ordered_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert ordered_map(lambda x: x, [], threads=4) == []


# ============= Errors =============

def test_run_item_records_failures():
    status = BatchStatus()
    ok = status.record(run_item("good", lambda: 7))
    assert ok.ok and ok.as_entry() == 7

    def bad():
        raise LatticeError("not self-dual")

    failed = status.record(run_item("bad", bad))
    assert not failed.ok
    assert failed.as_entry() == {"error": "LatticeError", "message": "not self-dual"}
    assert status.exit_code is ExitCode.ITEM_FAILURE

    def numeric():
        raise DivisorProximityError("on the divisor")

    status.record(run_item("numeric", numeric))
    assert status.exit_code is ExitCode.NUMERIC_FAILURE


def test_run_item_lets_programming_errors_through():
    with pytest.raises(ZeroDivisionError):
        run_item("broken", lambda: 1 / 0)


def test_exit_codes():
    assert exit_code_for(ConfigurationError("bad")) is ExitCode.CONFIG_ERROR
    assert exit_code_for(FieldValidationError("even")) is ExitCode.CONFIG_ERROR
    assert exit_code_for(DivisorProximityError("close")) is ExitCode.NUMERIC_FAILURE
    assert exit_code_for(LatticeError("odd")) is ExitCode.ITEM_FAILURE
    assert BatchStatus().exit_code is ExitCode.SUCCESS


def test_configuration_error_render():
    error = ConfigurationError("config failed validation", [(4, "m_range", "bad value"), (None, "d_k", "missing")])
    lines = error.render().splitlines()
    assert lines == [
        "config failed validation",
        "  line 4: m_range: bad value",
        "  line ?: d_k: missing",
    ]


def test_log_failures_reraises():
    @log_failures("probe")
    def probe():
        raise DivisorProximityError("h is on the divisor")

    with pytest.raises(DivisorProximityError):
        probe()


# ============= Metrics =============

def test_measure_counts_calls_and_errors():
    metrics = PerformanceMetrics()
    with metrics.measure("enumerate", {"m": 1}):
        pass
    with pytest.raises(ValueError):
        with metrics.measure("enumerate"):
            raise ValueError("boom")

    stats = metrics.get_operation_stats("enumerate")
    assert stats["total_calls"] == 2
    assert stats["errors"] == 1
    assert stats["error_rate_percent"] == 50.0
    assert stats["total_ms"] >= 0
    assert metrics.get_operation_stats("never_run")["total_calls"] == 0


def test_log_summary_lists_each_operation():
    metrics = PerformanceMetrics()
    with metrics.measure("green_full"):
        pass
    with metrics.measure("i_arch"):
        pass

    lines = []
    sink = logger.add(lambda message: lines.append(str(message)), level="DEBUG", format="{message}")
    try:
        metrics.log_summary()
    finally:
        logger.remove(sink)
    assert sorted(line.split(":")[0] for line in lines) == ["green_full", "i_arch"]


def test_track_performance_uses_global_tracker():
    @track_performance("square_for_test")
    def square(x):
        return x * x

    before = get_metrics().get_operation_stats("square_for_test")["total_calls"]
    assert square(4) == 16
    assert get_metrics().get_operation_stats("square_for_test")["total_calls"] == before + 1


# ============= Reports =============

def test_render_json_is_deterministic():
    exporter = ReportExporter()
    document = {"reports": [PrimeCoefficient(prime=3, coefficient="2/3", value=0.7324081924454065)]}
    text = exporter.render_json(document)
    assert text == exporter.render_json(document)
    assert json.loads(text)["reports"][0]["coefficient"] == "2/3"
    assert text.endswith("\n")


def test_render_csv_with_comments():
    text = ReportExporter().render_csv(("a", "b"), [["1", "2"]], ["verdict: bounded"])
    assert text == "a,b\n1,2\n# verdict: bounded\n"


def test_write_to_file_and_stdout(tmp_path, capsys):
    exporter = ReportExporter()
    out = tmp_path / "nested" / "report.json"
    exporter.write("{}\n", out)
    assert out.read_text(encoding="utf-8") == "{}\n"

    exporter.write("x\n", None)
    assert capsys.readouterr().out == "x\n"


# ============= Settings and field cache =============

def test_settings_defaults_validate():
    assert Settings().validate_numeric_ranges() is True


@pytest.mark.parametrize(
    "overrides",
    [{"default_tol": 0}, {"default_threads": 0}, {"log_level": "LOUD"}, {"theta_precision_digits": 10}],
)
def test_settings_reject_bad_values(overrides):
    with pytest.raises(ValueError):
        Settings(**overrides).validate_numeric_ranges()


def test_field_container_caches_fields():
    FieldContainer.cleanup()
    assert get_base_field(3) is get_base_field(3)
    assert get_real_field([1, -1, -1], 3) is get_real_field((1, -1, -1), 3)
    FieldContainer.cleanup()
