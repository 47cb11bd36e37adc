"""Reconstruction quality and energy metrics.

SDR analysis windows the post-transient segment down to a whole number of
fundamental cycles, so a Hann window confines each tone to its bin and the
two neighbours; signal power is the fundamental bin +/- 1, distortion is
everything else in band except the DC bins.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SdrReport",
    "sdr",
    "firing_rate",
    "EnergyReport",
    "energy_model",
    "energy_per_spike",
    "nrmse",
    "ADEX_ENERGY_PROXY",
    "SD_ENERGY_PROXY",
]

BAND_MULTIPLE = 25.0  # in-band upper limit as a multiple of the fundamental
MIN_CYCLES = 10

# Energy proxy constants (static drain in W, per-spike cost in J).  The
# ADEX-style circuit burns a continuous bias current; the sigma-delta
# version is duty-cycled, so its static share is tiny and the 10 pJ
# per-spike figure dominates.
ADEX_ENERGY_PROXY = (10e-9, 20e-12)
SD_ENERGY_PROXY = (0.1e-9, 10e-12)


@dataclass(frozen=True)
class SdrReport:
    sdr_db: float
    fundamental_hz: float
    band_hz: float
    n_cycles: int
    fitted_gain: float
    fitted_offset: float


def sdr(recon, fundamental_hz, band_hz=None, skip=0.05, reference=None):
    """Signal-to-distortion ratio of a reconstructed sinusoid.

    Needs at least ``MIN_CYCLES`` whole fundamental cycles after the
    transient skip.  ``band_hz`` defaults to 25x the fundamental.  When a
    ``reference`` signal is given, the gain/offset fit of reconstruction
    onto reference is reported (the ratio itself is scale-invariant).
    """
    if not (fundamental_hz > 0.0):
        raise ValueError("fundamental_hz must be positive")
    band = band_hz if band_hz is not None else BAND_MULTIPLE * fundamental_hz
    if band <= fundamental_hz:
        raise ValueError("band must extend beyond the fundamental")
    fs = recon.sample_rate
    k0 = int(math.floor(skip * fs + 0.5))
    x = recon.samples[k0:]
    n_cycles = int(math.floor(x.size / fs * fundamental_hz))
    if n_cycles < MIN_CYCLES:
        raise ValueError(
            f"need >= {MIN_CYCLES} whole cycles after the transient skip, got {n_cycles}"
        )
    n = int(math.floor(n_cycles / fundamental_hz * fs + 0.5))
    x = x[:n]

    win = np.hanning(n)
    spec = np.abs(np.fft.rfft(x * win)) ** 2
    df = fs / n
    kf = int(math.floor(fundamental_hz / df + 0.5))
    if kf < 3:
        raise ValueError("fundamental too close to DC for this window")
    p_signal = float(spec[kf - 1 : kf + 2].sum())
    k_band = min(int(math.floor(band / df)), spec.size - 1)
    mask = np.zeros(spec.size, dtype=bool)
    mask[2 : k_band + 1] = True  # skip DC bins 0 and 1
    mask[kf - 1 : kf + 2] = False
    p_dist = float(spec[mask].sum())
    if p_dist <= 0.0:
        raise ValueError("no distortion bins in band")

    gain, offset = 1.0, float(np.mean(x))
    if reference is not None:
        if reference.samples.size != recon.samples.size:
            raise ValueError("reference and reconstruction must share the grid")
        r = reference.samples[k0 : k0 + n]
        a_mat = np.stack([r, np.ones(n)], axis=1)
        coef, *_ = np.linalg.lstsq(a_mat, x, rcond=None)
        gain, offset = float(coef[0]), float(coef[1])

    return SdrReport(
        sdr_db=10.0 * math.log10(p_signal / p_dist),
        fundamental_hz=fundamental_hz,
        band_hz=min(band, (spec.size - 1) * df),
        n_cycles=n_cycles,
        fitted_gain=gain,
        fitted_offset=offset,
    )


def firing_rate(train, t0=0.0, t1=None):
    """Mean rate over ``[t0, t1)``; the window must lie inside the train."""
    if t1 is None:
        t1 = train.duration
    if not (t1 > t0):
        raise ValueError(f"empty window [{t0}, {t1})")
    if t0 < 0.0 or t1 > train.duration:
        raise ValueError("window outside the train duration")
    count = int(np.count_nonzero((train.times >= t0) & (train.times < t1)))
    return count / (t1 - t0)


@dataclass(frozen=True)
class EnergyReport:
    total_j: float
    static_j: float
    spike_j: float
    spike_count: int
    duration_s: float


def energy_model(train, e_static_w, e_spike_j, duration=None):
    """Total energy of a run: static drain plus a fixed cost per spike."""
    if e_static_w < 0.0 or e_spike_j < 0.0:
        raise ValueError("energy coefficients must be >= 0")
    t = duration if duration is not None else train.duration
    if not (t > 0.0):
        raise ValueError("duration must be positive")
    static = e_static_w * t
    spikes = e_spike_j * train.count
    return EnergyReport(static + spikes, static, spikes, train.count, t)


def energy_per_spike(total_j, rate_hz, sim_time_s):
    """Energy per spike = total energy / (firing rate x simulation time)."""
    denom = rate_hz * sim_time_s
    if denom <= 0.0:
        raise ValueError("rate and simulation time must be positive")
    return total_j / denom


def nrmse(estimate, target):
    """RMS error normalized by the target's RMS."""
    estimate = np.asarray(estimate, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if estimate.shape != target.shape:
        raise ValueError("shape mismatch")
    denom = math.sqrt(float(np.mean(target**2)))
    if denom == 0.0:
        raise ValueError("target is identically zero")
    return math.sqrt(float(np.mean((estimate - target) ** 2))) / denom
