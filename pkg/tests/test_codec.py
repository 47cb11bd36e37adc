"""Encode/decode chain: spike trains, reconstruction, round trips."""

import math

import numpy as np
import pytest

from sdneuro.codec import (
    SpikeTrain,
    decode,
    encode,
    read_spike_csv,
    roundtrip,
    transient_skip,
    write_spike_csv,
    write_trace_csv,
)
from sdneuro.filters import FilterParams, lpf_pulse_peak
from sdneuro.neurons import AdexParams, SdNeuronParams
from sdneuro.signals import make_dc, make_sine


def test_spike_train_validation():
    with pytest.raises(ValueError):
        SpikeTrain(np.array([0.2, 0.1]), 100e-6, 1.0)  # not increasing
    with pytest.raises(ValueError):
        SpikeTrain(np.array([0.1, 0.1]), 100e-6, 1.0)  # duplicate
    with pytest.raises(ValueError):
        SpikeTrain(np.array([1.5]), 100e-6, 1.0)  # past the end
    with pytest.raises(ValueError):
        SpikeTrain(np.array([-0.1]), 100e-6, 1.0)


def test_encode_zero_signal_empty_train():
    train, trace = encode(make_dc(0.0, 0.01))
    assert train.times.size == 0
    assert trace is None


def test_encode_rejects_negative_signal():
    x = make_sine(2.0, 1.0, 5.0, 0.2, 1e5)  # dips below zero
    with pytest.raises(ValueError, match="unipolar"):
        encode(x)


def test_encode_trace_record():
    x = make_dc(50.0, 0.005)
    train, trace = encode(x, record=True)
    assert train.times.size > 0
    assert trace.i.shape == x.samples.shape
    assert trace.imem.shape == x.samples.shape
    assert trace.s.shape == x.samples.shape
    assert trace.pulse.shape == x.samples.shape
    assert set(np.unique(trace.pulse)) <= {0.0, 100.0}


def test_single_spike_peak_matches_closed_form():
    train = SpikeTrain(np.array([0.01]), 100e-6, 0.05)
    y = decode(train, 1e6)
    predicted = lpf_pulse_peak(FilterParams(gain=1.0, tau=10e-3), 100e-6, 100.0)
    assert abs(y.samples.max() - predicted) <= 1e-9 * predicted


def test_periodic_train_settles_to_duty_average():
    # 100 us pulses every 250 us -> duty 0.4 -> mean gain*A*0.4 = 40 nA
    times = np.arange(0.0, 0.5, 250e-6)
    train = SpikeTrain(times, 100e-6, 0.5)
    y = decode(train, 1e6)
    seg = y.samples[200_000:500_000]  # settled, whole number of periods
    assert seg.mean() == pytest.approx(40.0, rel=1e-3)


def test_decode_pulse_overlap_saturates():
    # two spikes closer than the width cover the union, not the sum
    train = SpikeTrain(np.array([0.001, 0.00105]), 100e-6, 0.01)
    y = decode(train, 1e6)
    peak_two = y.samples.max()
    single = decode(SpikeTrain(np.array([0.001]), 100e-6, 0.01), 1e6)
    widened = decode(SpikeTrain(np.array([0.001]), 150e-6, 0.01), 1e6)
    assert peak_two > single.samples.max()
    assert peak_two == pytest.approx(widened.samples.max(), rel=1e-12)


def test_roundtrip_regression():
    x = make_sine(50.0, 50.0, 5.0, 2.2, 1e6)
    rt = roundtrip(x, SdNeuronParams())
    # DC loop balance predicts reconstruction gain 1/k = 1/1.2
    assert rt.fitted_gain == pytest.approx(1.0 / 1.2, rel=0.02)
    skip = transient_skip(10e-3, 10e-3)
    keep = x.times() >= skip
    rms = float(np.sqrt(np.mean(rt.residual.samples[keep] ** 2)))
    assert rms == pytest.approx(1.953, rel=0.05)
    assert rt.train.times.size == pytest.approx(9155, rel=0.01)


def test_roundtrip_rejects_short_signal():
    x = make_dc(50.0, 0.01)
    with pytest.raises(ValueError, match="skip"):
        roundtrip(x)


def test_transient_skip():
    assert transient_skip(10e-3, 10e-3) == pytest.approx(0.05)
    assert transient_skip(1e-3, 20e-3) == pytest.approx(0.1)


def test_adex_encode():
    x = make_dc(50.0, 0.02, 1e6)
    train, _ = encode(x, AdexParams(), kind="adex")
    assert train.times.size > 0
    assert train.pulse_width == AdexParams().kick_width


def test_lif_encode_ignores_feedback():
    x = make_dc(10.0, 0.1)
    lif_train, _ = encode(x, kind="lif")
    sd_train, _ = encode(x, kind="sd")
    # without feedback the error never shrinks, so LIF fires faster
    assert lif_train.times.size > sd_train.times.size


def test_encode_unknown_kind():
    with pytest.raises(ValueError, match="kind"):
        encode(make_dc(1.0, 0.001), kind="izhikevich")


def test_spike_csv_roundtrip(tmp_path):
    x = make_sine(50.0, 50.0, 20.0, 0.1, 1e6)
    train, _ = encode(x)
    path = tmp_path / "spikes.csv"
    write_spike_csv(path, train)
    back = read_spike_csv(path, train.pulse_width, train.duration)
    assert np.array_equal(train.times, back.times)
    assert back.pulse_width == train.pulse_width


def test_spike_csv_header(tmp_path):
    path = tmp_path / "spikes.csv"
    write_spike_csv(path, SpikeTrain(np.array([0.001]), 100e-6, 0.01))
    assert path.read_text().splitlines()[0] == "spike_time_s"


def test_read_spike_csv_rejects_disorder(tmp_path):
    path = tmp_path / "spikes.csv"
    path.write_text("spike_time_s\n0.002\n0.001\n")
    with pytest.raises(ValueError):
        read_spike_csv(path, 100e-6, 0.01)


def test_trace_csv(tmp_path):
    x = make_dc(50.0, 0.001)
    _train, trace = encode(x, record=True)
    path = tmp_path / "trace.csv"
    write_trace_csv(path, trace)
    lines = path.read_text().splitlines()
    assert lines[0] == "time_s,i_na,imem_na,s_na,pulse_na"
    assert len(lines) == x.samples.size + 1
