"""CSV ingestion and rolling diagnostics."""

import io

import numpy as np
import pytest

from feedbackcast.errors import (
    InsufficientData,
    ParseError,
    SchemaError,
    WindowTooLarge,
    ZeroVariance,
)
from feedbackcast.evaluate import (
    ForecastSeries,
    ingest_csv,
    moving_average_bias,
    rolling_mz,
)
from feedbackcast.simulate import ols_mz

HEADER = "period,forecast,realization\n"


def _series_text(rows):
    return HEADER + "".join(f"{p},{f},{r}\n" for p, f, r in rows)


def _write(tmp_path, text, name="series.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestIngest:
    def test_basic_file(self, tmp_path):
        rows = [("2001q1", 1.0, 1.5), ("2001q2", 2.0, 1.5), ("2001q3", 0.5, 1.0)]
        series = ingest_csv(_write(tmp_path, _series_text(rows)))
        assert isinstance(series, ForecastSeries)
        assert series.periods == ("2001q1", "2001q2", "2001q3")
        assert np.array_equal(series.forecast, [1.0, 2.0, 0.5])
        assert np.array_equal(series.realization, [1.5, 1.5, 1.0])

    def test_accepts_streams(self):
        series = ingest_csv(io.StringIO(_series_text([("a", 1, 2), ("b", 3, 4)])))
        assert len(series.periods) == 2

    def test_blank_lines_are_skipped(self, tmp_path):
        text = HEADER + "a,1,2\n\n\nb,3,4\n"
        series = ingest_csv(_write(tmp_path, text))
        assert series.periods == ("a", "b")

    def test_parse_error_reports_line_number(self, tmp_path):
        text = HEADER + "a,1,2\nb,not_a_number,4\n"
        with pytest.raises(ParseError) as exc:
            ingest_csv(_write(tmp_path, text))
        assert exc.value.line_number == 3
        assert "line 3" in str(exc.value)

    def test_wrong_field_count(self, tmp_path):
        text = HEADER + "a,1\n"
        with pytest.raises(ParseError):
            ingest_csv(_write(tmp_path, text))

    def test_empty_label(self, tmp_path):
        text = HEADER + ",1,2\n"
        with pytest.raises(ParseError):
            ingest_csv(_write(tmp_path, text))

    def test_bad_header(self, tmp_path):
        with pytest.raises(SchemaError):
            ingest_csv(_write(tmp_path, "period,forecast\na,1\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(SchemaError):
            ingest_csv(_write(tmp_path, ""))

    def test_header_only_gives_empty_series(self, tmp_path):
        series = ingest_csv(_write(tmp_path, HEADER))
        assert series.periods == ()
        with pytest.raises(WindowTooLarge):
            rolling_mz(series, window=3)

    def test_nonfinite_values_rejected(self, tmp_path):
        for bad in ("inf", "-inf", "nan"):
            text = HEADER + f"a,1,2\nb,{bad},4\n"
            with pytest.raises(ValueError):
                ingest_csv(_write(tmp_path, text))

    def test_labels_must_strictly_increase(self, tmp_path):
        text = HEADER + "b,1,2\na,3,4\n"
        with pytest.raises(ValueError):
            ingest_csv(_write(tmp_path, text))
        text = HEADER + "a,1,2\na,3,4\n"
        with pytest.raises(ValueError):
            ingest_csv(_write(tmp_path, text))


def _random_series(n, seed=0):
    rng = np.random.default_rng(seed)
    forecasts = rng.normal(2.0, 1.0, n)
    realizations = 0.2 + 0.9 * forecasts + rng.normal(0.0, 0.5, n)
    labels = tuple(f"p{i:04d}" for i in range(n))
    return ForecastSeries(periods=labels, forecast=forecasts, realization=realizations)


class TestRollingMz:
    def test_record_count_and_labels(self):
        series = _random_series(4)
        result = rolling_mz(series, window=3)
        assert len(result) == 2
        assert result.window == 3
        assert result.window_end == ("p0002", "p0003")

    def test_full_window_matches_the_plain_fit(self):
        series = _random_series(50, seed=3)
        result = rolling_mz(series, window=50)
        fit = ols_mz(series.forecast, series.realization)
        assert result.mz_intercept[0] == fit.line.intercept
        assert result.mz_slope[0] == fit.line.slope
        assert result.slope_stderr[0] == fit.stderrs[1]
        assert result.r_squared[0] == fit.r_squared

    def test_window_bounds(self):
        series = _random_series(10)
        with pytest.raises(InsufficientData):
            rolling_mz(series, window=2)
        with pytest.raises(WindowTooLarge):
            rolling_mz(series, window=11)

    def test_flat_window_names_the_offender(self):
        labels = ("a", "b", "c", "d")
        forecasts = np.array([1.0, 2.0, 2.0, 2.0])
        realizations = np.array([1.0, 2.0, 3.0, 4.0])
        series = ForecastSeries(periods=labels, forecast=forecasts, realization=realizations)
        with pytest.raises(ZeroVariance) as exc:
            rolling_mz(series, window=3)
        assert "d" in str(exc.value)

    def test_shifting_realizations_shifts_only_the_intercept(self):
        series = _random_series(80, seed=5)
        shifted = ForecastSeries(
            periods=series.periods,
            forecast=series.forecast,
            realization=series.realization + 2.5,
        )
        base = rolling_mz(series, window=20)
        moved = rolling_mz(shifted, window=20)
        assert np.allclose(moved.mz_slope, base.mz_slope, atol=1e-9)
        assert np.allclose(moved.mz_intercept, base.mz_intercept + 2.5, atol=1e-9)


class TestMovingAverageBias:
    def test_constant_errors(self):
        n = 6
        series = ForecastSeries(
            periods=tuple(f"t{i}" for i in range(n)),
            forecast=np.arange(n, dtype=float),
            realization=np.arange(n, dtype=float) + 0.5,
        )
        points = moving_average_bias(series, window=3)
        assert [label for label, _ in points] == ["t2", "t3", "t4", "t5"]
        assert all(value == pytest.approx(0.5, abs=1e-12) for _, value in points)

    def test_window_one_returns_raw_errors(self):
        series = _random_series(5, seed=9)
        points = moving_average_bias(series, window=1)
        errors = series.realization - series.forecast
        assert np.array_equal([v for _, v in points], errors)

    def test_agrees_with_the_rolling_fit_column(self):
        series = _random_series(60, seed=11)
        result = rolling_mz(series, window=15)
        points = moving_average_bias(series, window=15)
        assert list(result.window_end) == [label for label, _ in points]
        assert np.array_equal(result.mean_error, [v for _, v in points])

    def test_validation(self):
        series = _random_series(5)
        with pytest.raises(ValueError):
            moving_average_bias(series, window=0)
        with pytest.raises(WindowTooLarge):
            moving_average_bias(series, window=6)
