"""Spike encoding and reconstruction.

``encode`` turns a current signal into a spike train with one of the loop
models; ``decode`` renders the train back into rectangular feedback pulses
(saturating where they overlap) and low-passes them.  Reconstruction works
because the decoder uses the same pulse shape the loop's feedback filter
saw, so its output approximates the loop's internal tracking signal.
"""

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .filters import RECON_TAU, FilterParams
from .neurons import AdexParams, SdNeuronParams, run_adex, run_sd
from .signals import Signal

__all__ = [
    "SpikeTrain",
    "EncodeTrace",
    "RoundtripResult",
    "encode",
    "decode",
    "roundtrip",
    "transient_skip",
    "write_spike_csv",
    "read_spike_csv",
    "write_trace_csv",
]

SPIKE_HEADER = ("spike_time_s",)
TRACE_HEADER = ("time_s", "i_na", "imem_na", "s_na", "pulse_na")


@dataclass(eq=False)
class SpikeTrain:
    """Sorted spike times plus the pulse shape they carry."""

    times: np.ndarray  # seconds
    pulse_width: float
    duration: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.times.size:
            if np.any(np.diff(self.times) <= 0.0):
                raise ValueError("spike times must be strictly increasing")
            if self.times[0] < 0.0 or self.times[-1] >= self.duration:
                raise ValueError("spike times must lie in [0, duration)")
        if self.pulse_width < 0.0:
            raise ValueError("pulse_width must be >= 0")
        if not (self.duration > 0.0):
            raise ValueError("duration must be positive")

    @property
    def count(self):
        return int(self.times.size)


@dataclass(eq=False)
class EncodeTrace:
    """Per-sample loop internals recorded during encoding."""

    sample_rate: float
    i: np.ndarray  # input (nA)
    imem: np.ndarray  # filtered error / membrane state (nA)
    s: np.ndarray  # feedback / adaptation state (nA)
    pulse: np.ndarray  # feedback pulse level (nA)

    def times(self):
        return np.arange(self.i.size) / self.sample_rate


def encode(x, params=None, kind="sd", state=None, record=False):
    """Encode a non-negative signal into spikes.

    ``kind`` selects the loop: ``sd`` (extended pulse), ``adex`` (narrow
    kick, forward Euler), or ``lif`` (sd loop with the feedback opened).
    Returns ``(SpikeTrain, EncodeTrace | None)``.
    """
    if x.samples.size == 0:
        raise ValueError("cannot encode an empty signal")
    if float(x.samples.min()) < 0.0:
        raise ValueError("encoders are unipolar: signal must be non-negative")
    dt = x.dt
    if kind in ("sd", "lif"):
        p = params if params is not None else SdNeuronParams()
        if kind == "lif":
            p = replace(p, fb=FilterParams(gain=0.0, tau=p.fb.tau))
        res = run_sd(x.samples, dt, p, state=state, record=record)
        train = SpikeTrain(res.spike_idx * dt, p.pulse_width, x.duration)
        trace = None
        if record:
            trace = EncodeTrace(x.sample_rate, x.samples.copy(), res.imem, res.s, res.pulse)
        return train, trace
    if kind == "adex":
        p = params if params is not None else AdexParams()
        res = run_adex(x.samples, dt, p, state=state, record=record)
        train = SpikeTrain(res.spike_idx * dt, p.kick_width, x.duration)
        trace = None
        if record:
            width = max(1, int(math.floor(p.kick_width / dt + 0.5)))
            pulse = kernels.render_pulses(res.spike_idx, x.samples.size, width, p.pulse_amplitude)
            trace = EncodeTrace(x.sample_rate, x.samples.copy(), res.imem, res.s, pulse)
        return train, trace
    raise ValueError(f"unknown encoder kind {kind!r}")


def decode(train, sample_rate=1e6, recon=None, amplitude=100.0):
    """Reconstruct a signal from a spike train.

    Renders each spike as a rectangular pulse of the train's width
    (overlaps saturate at ``amplitude``) and low-passes the result.
    """
    if not (sample_rate > 0.0):
        raise ValueError("sample_rate must be positive")
    p = recon if recon is not None else FilterParams(gain=1.0, tau=RECON_TAU)
    dt = 1.0 / sample_rate
    n = int(math.floor(train.duration * sample_rate + 0.5))
    idx = np.floor(train.times * sample_rate + 0.5).astype(np.int64)
    width = int(math.floor(train.pulse_width / dt + 0.5))
    level = kernels.render_pulses(idx, n, width, amplitude)
    y = kernels.lpf_run(level, 0.0, dt, p.gain, p.tau)
    return Signal(y, sample_rate)


def transient_skip(fb_tau, recon_tau):
    """Settling time to drop before comparing input and reconstruction."""
    return max(5.0 * fb_tau, 5.0 * recon_tau)


@dataclass(eq=False)
class RoundtripResult:
    reconstruction: Signal
    residual: Signal  # input units, after the gain/offset fit
    fitted_gain: float
    fitted_offset: float
    train: SpikeTrain


def roundtrip(x, params=None, kind="sd", recon=None, amplitude=100.0, skip=None):
    """Encode, decode, and fit the reconstruction back onto the input.

    The reconstruction tracks ``gain * x + offset``; both are fitted by
    least squares on the post-transient window and divided back out, so
    the residual is in input units.
    """
    p = params if params is not None else SdNeuronParams()
    rp = recon if recon is not None else FilterParams(gain=1.0, tau=RECON_TAU)
    train, _ = encode(x, p, kind=kind)
    y = decode(train, x.sample_rate, rp, amplitude)
    if skip is None:
        fb_tau = p.tau_w if kind == "adex" else p.fb.tau
        skip = transient_skip(fb_tau, rp.tau)
    k0 = int(math.floor(skip * x.sample_rate + 0.5))
    if k0 >= x.samples.size:
        raise ValueError("signal shorter than the transient skip")
    a_mat = np.stack([x.samples[k0:], np.ones(x.samples.size - k0)], axis=1)
    coef, *_ = np.linalg.lstsq(a_mat, y.samples[k0:], rcond=None)
    gain, offset = float(coef[0]), float(coef[1])
    if gain == 0.0:
        raise ValueError("degenerate fit: reconstruction has no signal content")
    residual = (y.samples - offset) / gain - x.samples
    return RoundtripResult(y, Signal(residual, x.sample_rate), gain, offset, train)


def write_spike_csv(path, train):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SPIKE_HEADER)
        for t in train.times:
            w.writerow((repr(float(t)),))


def read_spike_csv(path, pulse_width, duration):
    """Read spike times; pulse width and duration are not stored in the CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SPIKE_HEADER:
        raise ValueError(f"{path}:1: expected header {SPIKE_HEADER[0]}")
    times = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 1:
            raise ValueError(f"{path}:{lineno}: expected 1 field")
        try:
            times.append(float(row[0]))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unparsable float") from None
    return SpikeTrain(np.asarray(times), pulse_width, duration)


def write_trace_csv(path, trace):
    dt = 1.0 / trace.sample_rate
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for k in range(trace.i.size):
            w.writerow(
                (
                    repr(k * dt),
                    repr(float(trace.i[k])),
                    repr(float(trace.imem[k])),
                    repr(float(trace.s[k])),
                    repr(float(trace.pulse[k])),
                )
            )
