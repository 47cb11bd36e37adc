"""Signal containers, generators, and the CSV schema."""

import numpy as np
import pytest

from sdneuro.signals import (
    SIGNAL_HEADER,
    Signal,
    make_dc,
    make_sine,
    read_signal_csv,
    write_signal_csv,
)


def test_make_dc_basic():
    x = make_dc(12.5, 0.001, 1e6)
    assert x.samples.shape == (1000,)
    assert np.all(x.samples == 12.5)
    assert x.sample_rate == 1e6
    assert x.dt == 1e-6
    assert x.duration == pytest.approx(0.001)


def test_make_dc_sample_count_rounding():
    # 1e-4 s at 1 MHz must be exactly 100 samples despite binary rounding
    assert make_dc(1.0, 1e-4, 1e6).samples.size == 100
    assert make_dc(1.0, 0.3, 10.0).samples.size == 3


def test_make_sine_values():
    x = make_sine(50.0, 50.0, 5.0, 0.4, 1e5)
    t = x.times()
    expected = 50.0 + 50.0 * np.sin(2.0 * np.pi * 5.0 * t)
    assert np.array_equal(x.samples, expected)
    assert x.samples.min() >= 0.0  # 50-on-50 stays unipolar


def test_make_sine_rejects_bad_freq():
    with pytest.raises(ValueError):
        make_sine(1.0, 0.0, -5.0, 1.0)
    with pytest.raises(ValueError):
        make_sine(1.0, 0.0, 0.0, 1.0)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Signal(np.zeros(4), sample_rate=0.0)
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.nan]))


def test_times_grid():
    x = make_dc(1.0, 1e-3, 1e4)
    t = x.times()
    assert t[0] == 0.0
    assert t[1] == pytest.approx(1e-4)
    assert t.size == x.samples.size


def test_csv_roundtrip_exact(tmp_path):
    x = make_sine(50.0, 50.0, 7.3, 0.01, 1e4)
    path = tmp_path / "sig.csv"
    write_signal_csv(path, x)
    y = read_signal_csv(path)
    # repr-based formatting must round-trip every float bit-for-bit
    assert np.array_equal(x.samples, y.samples)
    assert y.sample_rate == pytest.approx(x.sample_rate, rel=1e-12)


def test_csv_header(tmp_path):
    path = tmp_path / "sig.csv"
    write_signal_csv(path, make_dc(1.0, 1e-3, 1e4))
    first = path.read_text().splitlines()[0]
    assert first == ",".join(SIGNAL_HEADER)


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,i\n0.0,1.0\n")
    with pytest.raises(ValueError, match="header"):
        read_signal_csv(path)


def test_csv_rejects_nonuniform_grid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,current_na\n0.0,1.0\n1e-6,1.0\n3e-6,1.0\n")
    with pytest.raises(ValueError, match="grid"):
        read_signal_csv(path)


def test_csv_rejects_garbage_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,current_na\n0.0,1.0\n1e-6,banana\n")
    with pytest.raises(ValueError, match=":3:"):
        read_signal_csv(path)


def test_csv_rejects_wrong_column_count(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,current_na\n0.0,1.0,9.0\n")
    with pytest.raises(ValueError):
        read_signal_csv(path)
