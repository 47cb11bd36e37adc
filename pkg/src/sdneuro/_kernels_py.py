"""Pure-Python simulation kernels.

Fallback used when the compiled extension (``sdneuro._kernels``) is not
available.  Every routine here is the semantic reference for the Cython
version: same arithmetic, same operation order, so the two backends agree
bit for bit (the extension is compiled with -ffp-contract=off for that
reason).

Conventions shared by both backends:

* leaky integrators use the exact exponential update
  ``y' = a*y + c*x`` with ``a = exp(-dt/tau)`` and ``c = gain*(1 - a)``,
* feedback pulses are counted down in whole steps; a pulse scheduled for
  ``width_steps`` emits its amplitude on exactly that many samples,
* spike indices are sample indices (time = index * dt).
"""

import math

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "lpf_run",
    "sd_run",
    "adex_run",
    "render_pulses",
    "sd_run_const_nodes",
]


def lpf_run(x, y0, dt, gain, tau):
    """Run a first-order low-pass over ``x`` starting from state ``y0``."""
    a = math.exp(-dt / tau)
    c = gain * (1.0 - a)
    # lfilter in transposed direct form II performs exactly
    # y[k] = c*x[k] + a*y[k-1]; seed the delay line with a*y0.
    y, _ = lfilter([c], [1.0, -a], np.asarray(x, dtype=np.float64), zi=[a * y0])
    return y


def sd_run(
    x,
    dt,
    err_gain,
    err_tau,
    fb_gain,
    fb_tau,
    delta,
    reset_value,
    width_steps,
    pulse_amplitude,
    imem0,
    s0,
    pulse_steps0,
    record,
):
    """Run the sigma-delta loop over an input sample array.

    Returns ``(spike_idx, imem_trace, s_trace, level_trace, imem, s,
    pulse_steps)``; the trace arrays are None unless ``record`` is true.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    a_e = math.exp(-dt / err_tau)
    c_e = err_gain * (1.0 - a_e)
    a_h = math.exp(-dt / fb_tau)
    c_h = fb_gain * (1.0 - a_h)

    imem = float(imem0)
    s = float(s0)
    pulse_steps = int(pulse_steps0)

    spikes = []
    if record:
        imem_tr = np.empty(n)
        s_tr = np.empty(n)
        level_tr = np.empty(n)
    else:
        imem_tr = s_tr = level_tr = None

    for k in range(n):
        e = x[k] - s
        imem = a_e * imem + c_e * e
        if imem > delta:
            spikes.append(k)
            imem = reset_value
            pulse_steps = width_steps
        level = pulse_amplitude if pulse_steps > 0 else 0.0
        if pulse_steps > 0:
            pulse_steps -= 1
        s = a_h * s + c_h * level
        if record:
            imem_tr[k] = imem
            s_tr[k] = s
            level_tr[k] = level

    spike_idx = np.asarray(spikes, dtype=np.int64)
    return spike_idx, imem_tr, s_tr, level_tr, imem, s, pulse_steps


def adex_run(
    x,
    dt,
    alpha_l,
    i_leak,
    delta_t,
    delta,
    tau_mem,
    alpha_s,
    tau_w,
    reset_value,
    kick,
    imem0,
    s0,
    record,
):
    """Forward-Euler run of the adaptive-exponential neuron.

    ``kick`` is the fixed adaptation increment applied to ``s`` on each
    spike (narrow feedback pulse collapsed to an instantaneous jump).
    Returns ``(spike_idx, imem_trace, s_trace, imem, s)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    r_mem = dt / tau_mem
    r_w = dt / tau_w

    imem = float(imem0)
    s = float(s0)

    spikes = []
    if record:
        imem_tr = np.empty(n)
        s_tr = np.empty(n)
    else:
        imem_tr = s_tr = None

    for k in range(n):
        arg = (imem - delta) / delta_t
        if arg > 10.0:
            arg = 10.0  # keeps exp() finite; spikes fire long before this
        dimem = (
            -alpha_l * (imem - i_leak)
            + alpha_l * delta_t * math.exp(arg)
            - s
            + x[k]
        ) * r_mem
        ds = (alpha_s * (imem - i_leak) - s) * r_w
        imem = imem + dimem
        s = s + ds
        if imem > delta:
            spikes.append(k)
            imem = reset_value
            s = s + kick
        if record:
            imem_tr[k] = imem
            s_tr[k] = s

    spike_idx = np.asarray(spikes, dtype=np.int64)
    return spike_idx, imem_tr, s_tr, imem, s


def render_pulses(spike_idx, n, width_steps, amplitude):
    """Piecewise-constant pulse train on the sample grid.

    Overlapping pulses saturate at ``amplitude`` (coverage is a union,
    not a sum).
    """
    spike_idx = np.asarray(spike_idx, dtype=np.int64)
    if width_steps <= 0 or spike_idx.size == 0:
        return np.zeros(n)
    edges = np.zeros(n + 1, dtype=np.int64)
    starts = np.minimum(spike_idx, n)
    stops = np.minimum(spike_idx + width_steps, n)
    np.add.at(edges, starts, 1)
    np.add.at(edges, stops, -1)
    covered = np.cumsum(edges[:n]) > 0
    return np.where(covered, float(amplitude), 0.0)


def sd_run_const_nodes(
    drive,
    imem,
    s,
    pulse_steps,
    spike_counts,
    s_sum,
    n_steps,
    dt,
    err_gain,
    err_tau,
    fb_gain,
    fb_tau,
    delta,
    reset_value,
    width_steps,
    pulse_amplitude,
):
    """Advance a bank of sigma-delta loops ``n_steps`` with constant drives.

    All array arguments are per-node and updated in place; ``spike_counts``
    and ``s_sum`` accumulate spikes and the sum of the feedback state over
    the window (for tick-averaged readout).  Vectorized across nodes; the
    per-element operations match ``sd_run`` exactly.
    """
    a_e = math.exp(-dt / err_tau)
    c_e = err_gain * (1.0 - a_e)
    a_h = math.exp(-dt / fb_tau)
    c_h = fb_gain * (1.0 - a_h)

    acc = np.zeros_like(s_sum)
    for _ in range(n_steps):
        e = drive - s
        np.multiply(imem, a_e, out=imem)
        imem += c_e * e
        spiked = imem > delta
        imem[spiked] = reset_value
        pulse_steps[spiked] = width_steps
        active = pulse_steps > 0
        level = np.where(active, pulse_amplitude, 0.0)
        np.subtract(pulse_steps, active.astype(np.int64), out=pulse_steps)
        np.multiply(s, a_h, out=s)
        s += c_h * level
        spike_counts += spiked.astype(np.int64)
        acc += s
    s_sum += acc
