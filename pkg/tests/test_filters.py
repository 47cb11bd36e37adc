"""First-order low-pass behavior: exact discretization identities."""

import math

import numpy as np
import pytest

from sdneuro.filters import FilterParams, FilterState, lpf_pulse_peak, lpf_run, lpf_step

TOL = 1e-9


def test_params_validation():
    with pytest.raises(ValueError):
        FilterParams(gain=1.0, tau=0.0)
    with pytest.raises(ValueError):
        FilterParams(gain=1.0, tau=-1e-3)
    with pytest.raises(ValueError):
        FilterParams(gain=math.inf, tau=1e-3)


def test_step_response_matches_analytic():
    # unit step through gain g, tau: y(t) = g * (1 - exp(-t/tau)) exactly
    # at every grid point, because the update is the exact ZOH solution
    p = FilterParams(gain=2.5, tau=3e-3)
    dt = 1e-5
    n = 2000
    y = lpf_run(np.ones(n), dt, p)
    t = (np.arange(n) + 1) * dt  # y[k] holds the state after step k
    analytic = p.gain * (1.0 - np.exp(-t / p.tau))
    assert np.max(np.abs(y - analytic)) <= TOL * p.gain


def test_decay_matches_analytic():
    p = FilterParams(gain=1.0, tau=2e-3)
    dt = 1e-6
    y0 = 7.0
    y = lpf_run(np.zeros(500), dt, p, y0=y0)
    t = (np.arange(500) + 1) * dt
    assert np.max(np.abs(y - y0 * np.exp(-t / p.tau))) <= TOL * y0


def test_run_equals_repeated_step():
    # the vectorized path must be bit-identical to stepping the scalar form
    rng = np.random.default_rng(11)
    x = rng.uniform(-2.0, 2.0, 300)
    p = FilterParams(gain=0.7, tau=1.3e-3)
    dt = 2e-6
    st = FilterState(y=0.25)
    stepped = np.empty_like(x)
    for k in range(x.size):
        st = lpf_step(st, x[k], dt, p)
        stepped[k] = st.y
    ran = lpf_run(x, dt, p, y0=0.25)
    assert np.array_equal(ran, stepped)


def test_dc_gain():
    p = FilterParams(gain=3.0, tau=1e-3)
    y = lpf_run(np.full(20000, 4.0), 1e-6, p)
    assert y[-1] == pytest.approx(12.0, rel=1e-8)


def test_pulse_peak_identity():
    # simulate one rectangular pulse; the peak must equal the closed form
    p = FilterParams(gain=1.0, tau=10e-3)
    dt = 1e-6
    width = 100
    amplitude = 100.0
    x = np.zeros(5000)
    x[:width] = amplitude
    y = lpf_run(x, dt, p)
    predicted = lpf_pulse_peak(p, width * dt, amplitude)
    assert abs(y[width - 1] - predicted) <= TOL * predicted
    assert np.max(y) == y[width - 1]


def test_pulse_peak_short_width_limit():
    # for width << tau the peak approaches gain * A * width / tau
    p = FilterParams(gain=1.0, tau=10e-3)
    peak = lpf_pulse_peak(p, 1e-6, 100.0)
    assert peak == pytest.approx(100.0 * 1e-6 / 10e-3, rel=1e-3)


def test_step_state_type():
    p = FilterParams()
    st = lpf_step(FilterState(), 1.0, 1e-6, p)
    assert isinstance(st, FilterState)
    assert st.y > 0.0
