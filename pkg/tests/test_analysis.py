"""Spike-train metrics and raster export."""

import math

import pytest

from neurocore.analysis import (
    DegenerateReferenceError,
    InsufficientSpikesError,
    SpikeTrain,
    cv_isi,
    errt,
    export_raster,
    export_raster_csv,
    export_raster_svg,
    firing_rate,
    load_raster_csv,
)
from neurocore.network import SpikeRecord


def train(*times):
    return SpikeTrain(tuple(float(t) for t in times))


class TestSpikeTrain:
    def test_requires_strictly_increasing_times(self):
        with pytest.raises(ValueError):
            train(1.0, 1.0)

    def test_from_steps(self):
        t = SpikeTrain.from_steps([0, 8, 80])
        assert t.times == (0.0, 1.0, 10.0)


class TestErrt:
    def test_identical_trains(self):
        t = train(5, 15, 30)
        assert errt(t, t) == 0.0

    def test_ten_percent(self):
        reference = train(0, 10)
        test = train(0, 11)
        assert errt(reference, test) == pytest.approx(10.0)

    def test_scale_invariance(self):
        a, b = train(0, 10, 25), train(0, 12, 30)
        scaled_a = train(0, 20, 50)
        scaled_b = train(0, 24, 60)
        assert errt(a, b) == pytest.approx(errt(scaled_a, scaled_b))

    def test_insufficient_spikes(self):
        with pytest.raises(InsufficientSpikesError):
            errt(train(1.0), train(1, 2))
        with pytest.raises(InsufficientSpikesError):
            errt(train(1, 2), train(1.0))

    def test_degenerate_reference(self):
        # a zero first interval cannot arise from a valid train (times are
        # strictly increasing), so bypass the constructor to hit the guard
        degenerate = SpikeTrain.__new__(SpikeTrain)
        object.__setattr__(degenerate, "times", (0.0, 0.0))
        with pytest.raises(DegenerateReferenceError):
            errt(degenerate, train(0, 11))

    def test_only_first_two_spikes_count(self):
        reference = train(0, 10, 100)
        test = train(0, 10, 500)
        assert errt(reference, test) == 0.0

    def test_mean_gaps_variant(self):
        reference = train(0, 10, 20)
        test = train(0, 11, 21)
        # per-gap errors 10% and 10%/... : gaps ref (10,10), test (11,10)
        assert errt(reference, test, mean_gaps=True) == pytest.approx(5.0)


class TestFiringRate:
    def test_empty_train(self):
        assert firing_rate(train(), (0.0, 1000.0)) == 0.0

    def test_fifteen_uniform_spikes(self):
        t = train(*(i * (1000.0 / 15) for i in range(15)))
        assert firing_rate(t, (0.0, 1000.0)) == pytest.approx(15.0)

    def test_half_open_window(self):
        t = train(0.0, 500.0, 1000.0)
        assert firing_rate(t, (0.0, 1000.0)) == pytest.approx(2.0)

    def test_additive_over_disjoint_windows(self):
        t = train(1, 2, 3, 400, 800, 900)
        full = firing_rate(t, (0.0, 1000.0)) * 1.0
        parts = (
            firing_rate(t, (0.0, 300.0)) * 0.3
            + firing_rate(t, (300.0, 1000.0)) * 0.7
        )
        assert full == pytest.approx(parts)

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            firing_rate(train(), (5.0, 5.0))


class TestCvIsi:
    def test_regular_train_has_zero_cv(self):
        t = train(*(10.0 * i for i in range(1, 30)))
        assert cv_isi(t) == pytest.approx(0.0)

    def test_too_few_spikes_is_infinite(self):
        assert math.isinf(cv_isi(train(1, 2)))


class TestRasterExport:
    def _record(self):
        record = SpikeRecord()
        record.append(0, "A", [0, 2])
        record.append(5, "B", [1])
        record.append(9, "A", [3])
        return record

    def test_csv_roundtrip(self, tmp_path):
        record = self._record()
        path = export_raster_csv(record, tmp_path / "raster.csv")
        assert load_raster_csv(path) == record

    def test_empty_record_header_only(self, tmp_path):
        path = export_raster_csv(SpikeRecord(), tmp_path / "empty.csv")
        assert path.read_text() == "step,time_ms,population,neuron\n"
        assert load_raster_csv(path) == SpikeRecord()

    def test_csv_schema(self, tmp_path):
        path = export_raster_csv(self._record(), tmp_path / "raster.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "step,time_ms,population,neuron"
        assert lines[1] == "0,0,A,0"
        assert lines[3] == "5,0.625,B,1"

    def test_missing_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        with pytest.raises(ValueError):
            load_raster_csv(bad)

    def test_svg_contains_bands_and_events(self, tmp_path):
        path = export_raster_svg(self._record(), tmp_path / "raster.svg")
        svg = path.read_text()
        assert svg.startswith("<svg")
        assert svg.count("<circle") == 4
        assert ">A<" in svg and ">B<" in svg
        assert "time (ms)" in svg

    def test_empty_svg_has_axes_only(self, tmp_path):
        path = export_raster_svg(SpikeRecord(), tmp_path / "empty.svg")
        svg = path.read_text()
        assert "<circle" not in svg
        assert "<line" in svg

    def test_combined_export_writes_both(self, tmp_path):
        record = self._record()
        csv_path, svg_path = export_raster(record, tmp_path / "run")
        assert csv_path.name == "run.csv" and csv_path.exists()
        assert svg_path.name == "run.svg" and svg_path.exists()
        assert load_raster_csv(csv_path) == record
