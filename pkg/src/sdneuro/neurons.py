"""Spiking encoder models.

Two views of the same loop:

* ``sd_step``/``run_sd``: the explicit sigma-delta modulator.  The input
  error ``i - s`` is low-passed, compared against a threshold, and each
  spike stretches into a rectangular feedback pulse (width ``pulse_width``)
  that the feedback filter turns into the tracking signal ``s``.
* ``adex_step``/``run_adex``: the adaptive-exponential neuron integrated
  with forward Euler.  Its feedback pulse is a single narrow kick per
  spike, which is what makes it slew on fast inputs; the adaptation state
  ``s`` otherwise follows the same first-order dynamics.

Currents in nA, times in seconds.
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .filters import ERR_TAU, FB_TAU, FilterParams

# Spike detection happens on the sample grid, so spike times carry up to
# one step of jitter; the ADEX default keeps steps at 0.1 us so that ten
# accumulated intervals stay well inside a 2% timing budget.
DEFAULT_ADEX_DT = 1e-7


@dataclass(frozen=True)
class SdNeuronParams:
    """Sigma-delta loop parameters."""

    err: FilterParams = FilterParams(gain=1.0, tau=ERR_TAU)
    fb: FilterParams = FilterParams(gain=1.0, tau=FB_TAU)
    delta: float = 1.0  # comparator threshold (nA)
    pulse_width: float = 100e-6  # feedback pulse width (s)
    pulse_amplitude: float = 100.0  # feedback pulse height (nA)
    reset_value: float = 0.0  # comparator input after a spike (nA)

    def __post_init__(self):
        if not (self.delta > self.reset_value):
            raise ValueError("delta must exceed reset_value")
        if self.pulse_width < 0.0:
            raise ValueError("pulse_width must be >= 0")
        if not (self.pulse_amplitude > 0.0):
            raise ValueError("pulse_amplitude must be positive")

    def width_steps(self, dt):
        """Feedback pulse width in whole samples at step ``dt``."""
        return int(math.floor(self.pulse_width / dt + 0.5))


@dataclass(frozen=True)
class SdNeuronState:
    """Loop state: filtered error, feedback output, remaining pulse time."""

    imem: float = 0.0
    s: float = 0.0
    pulse_remaining: float = 0.0


def sd_step(state, i, dt, p):
    """One sigma-delta step; returns ``(state', spiked, pulse_level)``.

    Order of operations: integrate the error, test the threshold (reset
    and re-arm the pulse on a spike), emit the pulse level, then update
    the feedback filter with it.
    """
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    a_e = math.exp(-dt / p.err.tau)
    c_e = p.err.gain * (1.0 - a_e)
    a_h = math.exp(-dt / p.fb.tau)
    c_h = p.fb.gain * (1.0 - a_h)

    e = i - state.s
    imem = a_e * state.imem + c_e * e
    # pulse time left, in whole steps (robust against float drift)
    n_rem = int(math.floor(state.pulse_remaining / dt + 0.5))
    spiked = imem > p.delta
    if spiked:
        imem = p.reset_value
        n_rem = p.width_steps(dt)
    level = p.pulse_amplitude if n_rem > 0 else 0.0
    if n_rem > 0:
        n_rem -= 1
    s = a_h * state.s + c_h * level
    return SdNeuronState(imem, s, n_rem * dt), spiked, level


@dataclass(frozen=True)
class AdexParams:
    """Adaptive-exponential neuron parameters.

    The per-spike adaptation kick models a rectangular feedback pulse of
    width ``kick_width`` collapsed to an instantaneous jump of ``s``, so
    refining the integration step does not change the model.  The default
    feedback gain is large because a 1 us pulse carries so little charge;
    it is sized to put 50 nA-scale DC inputs in the hundreds-of-Hz band.
    """

    alpha_l: float = 1.0  # leak strength (dimensionless)
    i_leak: float = 0.0  # resting current (nA)
    delta_t: float = 0.1  # exponential slope factor (nA), 0.1 * delta
    delta: float = 1.0  # threshold (nA)
    tau_mem: float = ERR_TAU
    alpha_s: float = 0.01  # continuous adaptation coupling
    tau_w: float = FB_TAU
    reset_value: float = 0.0
    pulse_amplitude: float = 100.0
    fb_gain: float = 500.0
    kick_width: float = 1e-6

    def __post_init__(self):
        if not (self.delta > self.i_leak):
            raise ValueError("delta must exceed i_leak")
        if not (self.delta_t > 0.0 and self.tau_mem > 0.0 and self.tau_w > 0.0):
            raise ValueError("delta_t and time constants must be positive")
        if not (self.alpha_l > 0.0):
            raise ValueError("alpha_l must be positive")

    @property
    def clamp_max(self):
        """Upper bound applied to I_mem inside the exponential term."""
        return self.delta + 10.0 * self.delta_t

    @property
    def spike_kick(self):
        """Adaptation jump per spike (nA)."""
        return self.fb_gain * self.pulse_amplitude * (
            1.0 - math.exp(-self.kick_width / self.tau_w)
        )


@dataclass(frozen=True)
class AdexState:
    imem: float = 0.0
    s: float = 0.0


def adex_step(state, i, dt, p):
    """One forward-Euler step; returns ``(state', spiked)``."""
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > p.tau_mem / 10.0:
        raise ValueError(f"dt {dt} too coarse for tau_mem {p.tau_mem}")
    arg = (state.imem - p.delta) / p.delta_t
    if arg > 10.0:
        arg = 10.0
    dimem = (
        -p.alpha_l * (state.imem - p.i_leak)
        + p.alpha_l * p.delta_t * math.exp(arg)
        - state.s
        + i
    ) * (dt / p.tau_mem)
    ds = (p.alpha_s * (state.imem - p.i_leak) - state.s) * (dt / p.tau_w)
    imem = state.imem + dimem
    s = state.s + ds
    spiked = imem > p.delta
    if spiked:
        imem = p.reset_value
        s = s + p.spike_kick
    return AdexState(imem, s), spiked


class SdRunResult(NamedTuple):
    spike_idx: np.ndarray
    imem: Optional[np.ndarray]
    s: Optional[np.ndarray]
    pulse: Optional[np.ndarray]
    final: SdNeuronState


class AdexRunResult(NamedTuple):
    spike_idx: np.ndarray
    imem: Optional[np.ndarray]
    s: Optional[np.ndarray]
    final: AdexState


def run_sd(samples, dt, p, state=None, record=False):
    """Run the sigma-delta loop over a sample array via the active kernel."""
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    st = state or SdNeuronState()
    pulse_steps0 = int(math.floor(st.pulse_remaining / dt + 0.5))
    spike_idx, imem_tr, s_tr, level_tr, imem, s, pulse_steps = kernels.sd_run(
        samples,
        dt,
        p.err.gain,
        p.err.tau,
        p.fb.gain,
        p.fb.tau,
        p.delta,
        p.reset_value,
        p.width_steps(dt),
        p.pulse_amplitude,
        st.imem,
        st.s,
        pulse_steps0,
        1 if record else 0,
    )
    final = SdNeuronState(imem, s, pulse_steps * dt)
    return SdRunResult(spike_idx, imem_tr, s_tr, level_tr, final)


def run_adex(samples, dt, p, state=None, record=False):
    """Run the ADEX neuron over a sample array via the active kernel."""
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > p.tau_mem / 10.0:
        raise ValueError(f"dt {dt} too coarse for tau_mem {p.tau_mem}")
    st = state or AdexState()
    spike_idx, imem_tr, s_tr, imem, s = kernels.adex_run(
        samples,
        dt,
        p.alpha_l,
        p.i_leak,
        p.delta_t,
        p.delta,
        p.tau_mem,
        p.alpha_s,
        p.tau_w,
        p.reset_value,
        p.spike_kick,
        st.imem,
        st.s,
        1 if record else 0,
    )
    return AdexRunResult(spike_idx, imem_tr, s_tr, AdexState(imem, s))


def narrow_pulse_params(p, dt, compensate=True):
    """Narrow-pulse (one sample wide) variant of a sigma-delta config.

    With ``compensate`` the feedback gain is scaled by
    ``pulse_width / dt`` so each spike still injects the same charge;
    without it the feedback response per spike shrinks by that factor,
    which is what forces the loop to slew.
    """
    scale = p.pulse_width / dt if compensate else 1.0
    return replace(
        p,
        pulse_width=dt,
        fb=FilterParams(gain=p.fb.gain * scale, tau=p.fb.tau),
    )


class RateEstimate(NamedTuple):
    rate_hz: float
    spike_count: int
    too_short: bool  # window ended before one full inter-spike interval


def lif_rate(i_dc, duration, p, dt=1e-6):
    """Firing rate with the feedback loop opened (LIF mode).

    Runs ``sd_step`` dynamics with the feedback gain forced to zero and
    returns spike count / duration.  ``too_short`` flags a window that
    produced no spikes at all.
    """
    if not (duration > 0.0):
        raise ValueError(f"duration must be positive, got {duration}")
    open_loop = replace(p, fb=FilterParams(gain=0.0, tau=p.fb.tau))
    n = int(math.floor(duration * (1.0 / dt) + 0.5))
    res = run_sd(np.full(n, float(i_dc)), dt, open_loop)
    count = int(res.spike_idx.size)
    if count == 0:
        return RateEstimate(0.0, 0, True)
    return RateEstimate(count / duration, count, False)
