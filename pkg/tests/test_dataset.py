from __future__ import annotations

from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset import (
    FeatureSpec,
    MinMaxScaler,
    RawSeries,
    build_framed_dataset,
    build_pool,
    frame_windows,
    generate_time_covariates,
    load_csv,
    normalize_target,
    sample_series,
    split_train_test,
)
from tsxfidel.errors import (
    ConstantTargetError,
    EmptySplitError,
    MissingColumnError,
    NonMonotonicTimestampsError,
    NotEnoughSeriesError,
    SeriesTooShortError,
    UnparseableCellError,
)

SCHEMA = [
    FeatureSpec(name="load", is_target=True),
    FeatureSpec(name="temp"),
    FeatureSpec(name="site", kind="categorical-encoded"),
]


def hourly_stamps(start: str, n: int) -> tuple[datetime, ...]:
    t0 = datetime.fromisoformat(start)
    return tuple(t0 + timedelta(hours=i) for i in range(n))


def simple_series(values: np.ndarray, granularity: str = "hourly", start: str = "2021-03-01T00:00") -> RawSeries:
    values = np.asarray(values, dtype=np.float64)
    specs = tuple(
        FeatureSpec(name="target" if j == 0 else f"f{j}", is_target=j == 0) for j in range(values.shape[1])
    )
    t0 = datetime.fromisoformat(start)
    step = timedelta(hours=1) if granularity == "hourly" else timedelta(days=1)
    return RawSeries(
        series_id="s",
        timestamps=tuple(t0 + i * step for i in range(values.shape[0])),
        values=values,
        granularity=granularity,
        feature_specs=specs,
    )


class TestLoadCsv:
    def write(self, tmp_path, rows: list[str]):
        path = tmp_path / "data.csv"
        path.write_text("\n".join(["timestamp,series_id,load,temp,site"] + rows) + "\n")
        return path

    def test_single_series_read_back(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                "2021-01-01T00:00,a,1.0,10,north",
                "2021-01-01T01:00,a,2.0,11,north",
                "2021-01-01T02:00,a,3.0,12,north",
                "2021-01-01T03:00,a,4.0,13,north",
            ],
        )
        series = load_csv(path, SCHEMA, "hourly")
        assert len(series) == 1
        assert series[0].values.shape == (4, 3)
        assert series[0].values[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_duplicate_timestamp_rejected(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                "2021-01-01T00:00,a,1.0,10,north",
                "2021-01-01T00:00,a,2.0,11,north",
            ],
        )
        with pytest.raises(NonMonotonicTimestampsError):
            load_csv(path, SCHEMA, "hourly")

    def test_interleaved_series_partitioned(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                "2021-01-01T00:00,a,1.0,10,north",
                "2021-01-01T00:00,b,5.0,20,south",
                "2021-01-01T01:00,a,2.0,11,north",
                "2021-01-01T01:00,b,6.0,21,south",
                "2021-01-01T02:00,a,3.0,12,north",
                "2021-01-01T02:00,b,7.0,22,south",
            ],
        )
        series = {s.series_id: s for s in load_csv(path, SCHEMA, "hourly")}
        assert set(series) == {"a", "b"}
        assert series["a"].values[:, 0].tolist() == [1.0, 2.0, 3.0]
        assert series["b"].values[:, 0].tolist() == [5.0, 6.0, 7.0]
        # categorical codes follow sorted vocabulary: north=0, south=1
        assert series["a"].values[0, 2] == 0.0
        assert series["b"].values[0, 2] == 1.0

    def test_missing_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("timestamp,series_id,load,temp\n2021-01-01T00:00,a,1,2\n")
        with pytest.raises(MissingColumnError, match="site"):
            load_csv(path, SCHEMA, "hourly")

    def test_unparseable_cell_names_row_and_column(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                "2021-01-01T00:00,a,1.0,10,north",
                "2021-01-01T01:00,a,oops,11,north",
            ],
        )
        with pytest.raises(UnparseableCellError, match=r"3.*'load'|'load'.*3"):
            load_csv(path, SCHEMA, "hourly")

    def test_uneven_spacing_rejected(self, tmp_path):
        path = self.write(
            tmp_path,
            [
                "2021-01-01T00:00,a,1.0,10,north",
                "2021-01-01T02:00,a,2.0,11,north",
            ],
        )
        with pytest.raises(NonMonotonicTimestampsError):
            load_csv(path, SCHEMA, "hourly")


class TestTimeCovariates:
    def test_hourly_calendar_fields(self):
        series = simple_series(np.ones((3, 1)), start="2014-01-01T00:00")
        out = generate_time_covariates(series)
        names = [s.name for s in out.feature_specs]
        assert names == ["target", "hour_of_day", "day_of_week", "week_of_month", "month"]
        # 2014-01-01 was a Wednesday (Monday = 0)
        assert out.values[0, 1:].tolist() == [0.0, 2.0, 1.0, 1.0]

    def test_hour_23(self):
        series = simple_series(np.ones((24, 1)), start="2021-03-01T00:00")
        out = generate_time_covariates(series)
        assert out.values[23, 1] == 23.0

    def test_daily_appends_exactly_two(self):
        series = simple_series(np.ones((5, 2)), granularity="daily")
        out = generate_time_covariates(series)
        added = [s for s in out.feature_specs if s.is_covariate]
        assert [s.name for s in added] == ["week_of_month", "month"]

    def test_existing_name_treated_as_raw(self):
        values = np.ones((4, 2))
        specs = (FeatureSpec(name="target", is_target=True), FeatureSpec(name="month"))
        series = RawSeries(
            series_id="s",
            timestamps=hourly_stamps("2021-03-01T00:00", 4),
            values=values,
            granularity="hourly",
            feature_specs=specs,
        )
        out = generate_time_covariates(series)
        names = [s.name for s in out.feature_specs]
        assert names.count("month") == 1
        assert set(names) == {"target", "month", "hour_of_day", "day_of_week", "week_of_month"}


class TestNormalizeTarget:
    def test_linear_map(self):
        series = simple_series(np.array([[0.0], [5.0], [10.0]]))
        out, scaler = normalize_target(series)
        assert out.values[:, 0].tolist() == [0.0, 0.5, 1.0]
        assert (scaler.minimum, scaler.maximum) == (0.0, 10.0)

    def test_already_unit_interval(self):
        series = simple_series(np.array([[0.0], [0.25], [1.0]]))
        out, scaler = normalize_target(series)
        assert out.values[:, 0].tolist() == [0.0, 0.25, 1.0]
        assert (scaler.minimum, scaler.maximum) == (0.0, 1.0)

    def test_constant_target(self):
        series = simple_series(np.array([[3.0], [3.0], [3.0]]))
        with pytest.raises(ConstantTargetError):
            normalize_target(series)

    @given(
        lo=st.floats(-1e3, 1e3),
        spread=st.floats(1e-3, 1e3),
        u=st.floats(0.0, 1.0),
    )
    def test_round_trip(self, lo, spread, u):
        scaler = MinMaxScaler(minimum=lo, maximum=lo + spread)
        v = lo + u * spread
        assert abs(scaler.inverse_transform(scaler.transform(v)) - v) <= 1e-12


class TestFrameWindows:
    def test_count_t10(self):
        series = simple_series(np.arange(20.0).reshape(10, 2))
        assert len(frame_windows(series, 3, 2)) == 6

    def test_too_short(self):
        series = simple_series(np.arange(10.0).reshape(5, 2))
        with pytest.raises(SeriesTooShortError):
            frame_windows(series, 3, 3)

    def test_electricity_scale_indexing(self):
        series = simple_series(np.arange(2000.0).reshape(2000, 1))
        windows = frame_windows(series, 168, 12)
        assert len(windows) == 2000 - 168 - 12 + 1 == 1821
        first = windows[0]
        assert first.t_anchor == 167
        assert first.y.tolist() == list(np.arange(168.0, 180.0))

    def test_alignment_last_column(self):
        values = np.arange(24.0).reshape(12, 2)
        series = simple_series(values)
        for k, window in enumerate(frame_windows(series, 4, 2)):
            assert window.x[:, -1].tolist() == values[k + 3].tolist()

    @given(
        window_len=st.integers(1, 12),
        horizons=st.integers(1, 6),
        extra=st.integers(0, 30),
    )
    @settings(max_examples=40, deadline=None)
    def test_count_property(self, window_len, horizons, extra):
        T = window_len + horizons + extra
        series = simple_series(np.random.default_rng(0).normal(size=(T, 2)))
        assert len(frame_windows(series, window_len, horizons)) == T - window_len - horizons + 1


class TestSplit:
    def make(self, n):
        series = simple_series(np.arange(float(2 * (n + 4))).reshape(n + 4, 2))
        return frame_windows(series, 3, 2)

    def test_80_20(self):
        windows = self.make(10)
        train, test = split_train_test(windows, 0.8)
        assert (len(train), len(test)) == (8, 2)
        assert max(w.t_anchor for w in train) < min(w.t_anchor for w in test)

    def test_floor(self):
        train, test = split_train_test(self.make(5), 0.8)
        assert (len(train), len(test)) == (4, 1)

    def test_single_window(self):
        with pytest.raises(EmptySplitError):
            split_train_test(self.make(1), 0.8)


class TestSampleSeries:
    def make_pool(self, n):
        return [simple_series(np.arange(8.0).reshape(4, 2)) for _ in range(n)]

    def test_deterministic_and_distinct(self):
        pool = [
            RawSeries(
                series_id=f"id{i}",
                timestamps=hourly_stamps("2021-01-01T00:00", 4),
                values=np.arange(4.0).reshape(4, 1),
                granularity="hourly",
                feature_specs=(FeatureSpec(name="t", is_target=True),),
            )
            for i in range(370)
        ]
        first = sample_series(pool, 100, seed=7)
        second = sample_series(pool, 100, seed=7)
        ids = [s.series_id for s in first]
        assert len(set(ids)) == 100
        assert ids == [s.series_id for s in second]

    def test_full_sample_is_identity(self):
        pool = self.make_pool(5)
        assert sample_series(pool, 5, seed=3) == pool

    def test_too_many(self):
        with pytest.raises(NotEnoughSeriesError):
            sample_series(self.make_pool(3), 4, seed=0)


class TestPool:
    def test_enumeration(self):
        series = simple_series(np.array([[1.0], [2.0], [3.0], [4.0]]))
        windows = frame_windows(series, 2, 1)  # x values {1,2} and {2,3}
        pool = build_pool(windows)
        assert sorted(pool.values[0].tolist()) == [1.0, 2.0, 2.0, 3.0]

    def test_empirical_frequency(self):
        series = simple_series(np.array([[1.0], [2.0], [3.0], [4.0]]))
        pool = build_pool(frame_windows(series, 2, 1))
        draws = pool.draw(0, keyed_rng(0, "freq"), size=100_000)
        assert abs(np.mean(draws == 2.0) - 0.5) < 0.02

    def test_single_window_pool(self):
        series = simple_series(np.array([[1.0], [2.0], [3.0]]))
        windows = frame_windows(series, 2, 1)[:1]
        pool = build_pool(windows)
        draws = pool.draw(0, keyed_rng(1, "single"), size=50)
        assert set(np.asarray(draws).tolist()) <= {1.0, 2.0}

    def test_cardinality_property(self, driver_dataset):
        n_train = len(driver_dataset.train)
        assert driver_dataset.pool.size == n_train * driver_dataset.window_len


class TestFramedDataset:
    def test_train_test_disjoint_and_ordered(self, driver_dataset):
        train_anchors = {(w.series_id, w.t_anchor) for w in driver_dataset.train}
        test_anchors = {(w.series_id, w.t_anchor) for w in driver_dataset.test}
        assert not train_anchors & test_anchors
        assert max(a for _, a in train_anchors) < min(a for _, a in test_anchors)

    def test_target_scaled_to_unit_interval(self, driver_dataset):
        target_rows = np.concatenate([w.x[0] for w in driver_dataset.train])
        assert target_rows.min() >= 0.0 and target_rows.max() <= 1.0

    def test_global_means_match_training_range(self, driver_dataset):
        # non-target features are standardized over the same range, so their
        # training means vanish
        means = driver_dataset.global_means["syn0"]
        assert np.allclose(means[1:], 0.0, atol=1e-12)
