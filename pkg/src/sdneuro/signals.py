"""Current-signal containers and generators.

All signal amplitudes are currents in nA on a uniform sample grid.  The
encoders are unipolar: they only accept non-negative inputs, so test
signals are typically a sinusoid riding on a DC offset at least as large
as its amplitude.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_RATE = 1e6  # Hz; 1 us grid

SIGNAL_HEADER = ("time_s", "current_na")
TIME_TOL = 1e-9  # max deviation of the time column from a uniform grid


@dataclass(eq=False)
class Signal:
    """Uniformly sampled current waveform (nA)."""

    samples: np.ndarray
    sample_rate: float = DEFAULT_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not (self.sample_rate > 0.0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def dt(self):
        return 1.0 / self.sample_rate

    @property
    def duration(self):
        return self.samples.size / self.sample_rate

    def times(self):
        return np.arange(self.samples.size) / self.sample_rate


def make_dc(amplitude_na, duration_s, sample_rate=DEFAULT_RATE):
    """Constant current of the given duration."""
    n = _sample_count(duration_s, sample_rate)
    return Signal(np.full(n, float(amplitude_na)), sample_rate)


def make_sine(amplitude_na, offset_na, freq_hz, duration_s, sample_rate=DEFAULT_RATE):
    """Sinusoid ``offset + amplitude * sin(2 pi f t)``."""
    if freq_hz <= 0.0:
        raise ValueError(f"freq_hz must be positive, got {freq_hz}")
    n = _sample_count(duration_s, sample_rate)
    t = np.arange(n) / sample_rate
    return Signal(offset_na + amplitude_na * np.sin(2.0 * math.pi * freq_hz * t), sample_rate)


def _sample_count(duration_s, sample_rate):
    if not (duration_s > 0.0):
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    if not (sample_rate > 0.0):
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    n = int(math.floor(duration_s * sample_rate + 0.5))
    if n < 1:
        raise ValueError("duration shorter than one sample")
    return n


def write_signal_csv(path, signal):
    """Write ``time_s,current_na`` rows; floats use shortest round-trip form."""
    dt = signal.dt
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SIGNAL_HEADER)
        for k, v in enumerate(signal.samples):
            w.writerow((repr(k * dt), repr(float(v))))


def read_signal_csv(path):
    """Read a signal written by :func:`write_signal_csv`.

    The time column must be a strictly uniform grid (tolerance
    ``TIME_TOL`` seconds); errors cite the offending line.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SIGNAL_HEADER:
        raise ValueError(f"{path}:1: expected header {','.join(SIGNAL_HEADER)}")
    times = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            t = float(row[0])
            v = float(row[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: unparsable float") from None
        if not (math.isfinite(t) and math.isfinite(v)):
            raise ValueError(f"{path}:{lineno}: non-finite value")
        times.append(t)
        values.append(v)
    if len(values) < 2:
        raise ValueError(f"{path}: need at least 2 samples to infer the grid")
    dt = times[1] - times[0]
    if dt <= 0.0:
        raise ValueError(f"{path}:3: time column must increase")
    for k, t in enumerate(times):
        if abs(t - k * dt) > TIME_TOL:
            raise ValueError(
                f"{path}:{k + 2}: time {t!r} off the uniform grid (step {dt!r})"
            )
    return Signal(np.asarray(values), 1.0 / dt)
