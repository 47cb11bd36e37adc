# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirrors sdneuro._kernels_py operation for operation; keep the two in sync.
The heavy loops release the GIL so sweep points can run on a thread pool.
"""

from libc.math cimport exp

import numpy as np


def lpf_run(x, double y0, double dt, double gain, double tau):
    """Run a first-order low-pass over ``x`` starting from state ``y0``."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double a = exp(-dt / tau)
    cdef double c = gain * (1.0 - a)
    cdef double y = y0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            y = c * xv[k] + a * y
            out[k] = y
    return out_arr


def sd_run(
    x,
    double dt,
    double err_gain,
    double err_tau,
    double fb_gain,
    double fb_tau,
    double delta,
    double reset_value,
    long long width_steps,
    double pulse_amplitude,
    double imem0,
    double s0,
    long long pulse_steps0,
    int record,
):
    """Run the sigma-delta loop over an input sample array.

    Returns ``(spike_idx, imem_trace, s_trace, level_trace, imem, s,
    pulse_steps)``; the trace arrays are None unless ``record`` is true.
    """
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double a_e = exp(-dt / err_tau)
    cdef double c_e = err_gain * (1.0 - a_e)
    cdef double a_h = exp(-dt / fb_tau)
    cdef double c_h = fb_gain * (1.0 - a_h)

    cdef double imem = imem0
    cdef double s = s0
    cdef long long pulse_steps = pulse_steps0
    cdef double e, level

    spike_buf = np.empty(n if n > 0 else 1, dtype=np.int64)
    cdef long long[::1] spikes = spike_buf
    cdef Py_ssize_t n_spikes = 0

    imem_arr = s_arr = level_arr = None
    cdef double[::1] imem_tr = None
    cdef double[::1] s_tr = None
    cdef double[::1] level_tr = None
    if record:
        imem_arr = np.empty(n)
        s_arr = np.empty(n)
        level_arr = np.empty(n)
        imem_tr = imem_arr
        s_tr = s_arr
        level_tr = level_arr

    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            e = xv[k] - s
            imem = a_e * imem + c_e * e
            if imem > delta:
                spikes[n_spikes] = k
                n_spikes += 1
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

    spike_idx = spike_buf[:n_spikes].copy()
    return spike_idx, imem_arr, s_arr, level_arr, imem, s, pulse_steps


def adex_run(
    x,
    double dt,
    double alpha_l,
    double i_leak,
    double delta_t,
    double delta,
    double tau_mem,
    double alpha_s,
    double tau_w,
    double reset_value,
    double kick,
    double imem0,
    double s0,
    int record,
):
    """Forward-Euler run of the adaptive-exponential neuron.

    Returns ``(spike_idx, imem_trace, s_trace, imem, s)``.
    """
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double r_mem = dt / tau_mem
    cdef double r_w = dt / tau_w

    cdef double imem = imem0
    cdef double s = s0
    cdef double arg, dimem, ds

    spike_buf = np.empty(n if n > 0 else 1, dtype=np.int64)
    cdef long long[::1] spikes = spike_buf
    cdef Py_ssize_t n_spikes = 0

    imem_arr = s_arr = None
    cdef double[::1] imem_tr = None
    cdef double[::1] s_tr = None
    if record:
        imem_arr = np.empty(n)
        s_arr = np.empty(n)
        imem_tr = imem_arr
        s_tr = s_arr

    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            arg = (imem - delta) / delta_t
            if arg > 10.0:
                arg = 10.0  # keeps exp() finite; spikes fire long before this
            dimem = (
                -alpha_l * (imem - i_leak)
                + alpha_l * delta_t * exp(arg)
                - s
                + xv[k]
            ) * r_mem
            ds = (alpha_s * (imem - i_leak) - s) * r_w
            imem = imem + dimem
            s = s + ds
            if imem > delta:
                spikes[n_spikes] = k
                n_spikes += 1
                imem = reset_value
                s = s + kick
            if record:
                imem_tr[k] = imem
                s_tr[k] = s

    spike_idx = spike_buf[:n_spikes].copy()
    return spike_idx, imem_arr, s_arr, imem, s


def render_pulses(spike_idx, Py_ssize_t n, long long width_steps, double amplitude):
    """Piecewise-constant pulse train on the sample grid (saturating union)."""
    cdef long long[::1] idx = np.ascontiguousarray(spike_idx, dtype=np.int64)
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m = idx.shape[0]
    if width_steps <= 0 or m == 0:
        return out_arr
    cdef Py_ssize_t j, k, start, stop
    with nogil:
        for j in range(m):
            start = idx[j]
            if start > n:
                start = n
            stop = idx[j] + width_steps
            if stop > n:
                stop = n
            for k in range(start, stop):
                out[k] = amplitude
    return out_arr


def sd_run_const_nodes(
    drive,
    imem,
    s,
    pulse_steps,
    spike_counts,
    s_sum,
    Py_ssize_t n_steps,
    double dt,
    double err_gain,
    double err_tau,
    double fb_gain,
    double fb_tau,
    double delta,
    double reset_value,
    long long width_steps,
    double pulse_amplitude,
):
    """Advance a bank of sigma-delta loops ``n_steps`` with constant drives.

    Per-node state arrays are updated in place; ``spike_counts`` and
    ``s_sum`` accumulate spikes and the summed feedback state.
    """
    cdef double[::1] dv = drive
    cdef double[::1] imv = imem
    cdef double[::1] sv = s
    cdef long long[::1] pv = pulse_steps
    cdef long long[::1] cv = spike_counts
    cdef double[::1] qv = s_sum
    cdef Py_ssize_t m = dv.shape[0]

    cdef double a_e = exp(-dt / err_tau)
    cdef double c_e = err_gain * (1.0 - a_e)
    cdef double a_h = exp(-dt / fb_tau)
    cdef double c_h = fb_gain * (1.0 - a_h)

    cdef double x_j, im_j, s_j, e, level, acc
    cdef long long p_j, n_sp
    cdef Py_ssize_t j, k
    with nogil:
        for j in range(m):
            x_j = dv[j]
            im_j = imv[j]
            s_j = sv[j]
            p_j = pv[j]
            n_sp = 0
            acc = 0.0
            for k in range(n_steps):
                e = x_j - s_j
                im_j = a_e * im_j + c_e * e
                if im_j > delta:
                    n_sp += 1
                    im_j = reset_value
                    p_j = width_steps
                level = pulse_amplitude if p_j > 0 else 0.0
                if p_j > 0:
                    p_j -= 1
                s_j = a_h * s_j + c_h * level
                acc += s_j
            imv[j] = im_j
            sv[j] = s_j
            pv[j] = p_j
            cv[j] += n_sp
            qv[j] += acc
