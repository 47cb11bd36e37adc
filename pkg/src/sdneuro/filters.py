"""First-order low-pass (leaky integrator) filters.

All three filters in the encoder loop share this form: the error filter
ahead of the comparator, the feedback filter shaping spikes back into the
loop, and the reconstruction filter on the decoder side.  The update is
the exact zero-order-hold solution of ``tau * dy/dt = gain * x - y``, so
stepping is exact for piecewise-constant inputs at any dt.
"""

import math
from dataclasses import dataclass

from . import kernels

# Loop defaults (time constants in seconds): error filter, feedback
# filter, reconstruction filter.
ERR_TAU = 2e-3
FB_TAU = 10e-3
RECON_TAU = 10e-3


@dataclass(frozen=True)
class FilterParams:
    """DC gain and time constant of a first-order low-pass."""

    gain: float = 1.0
    tau: float = 10e-3

    def __post_init__(self):
        if not (self.tau > 0.0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not math.isfinite(self.gain):
            raise ValueError("gain must be finite")


@dataclass(frozen=True)
class FilterState:
    """Filter output state ``y`` (nA)."""

    y: float = 0.0


def lpf_step(state, x, dt, p):
    """Advance the filter one step of width ``dt`` under constant input ``x``.

    Exact exponential update: y' = a*y + gain*(1-a)*x with a = exp(-dt/tau).
    """
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    a = math.exp(-dt / p.tau)
    c = p.gain * (1.0 - a)
    return FilterState(c * x + a * state.y)


def lpf_run(x, dt, p, y0=0.0):
    """Filter a whole sample array; returns the output array."""
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    return kernels.lpf_run(x, y0, dt, p.gain, p.tau)


def lpf_pulse_peak(p, pulse_width, amplitude):
    """Peak response to a single rectangular pulse from rest.

    The output of a first-order low-pass rises monotonically during the
    pulse and decays after it, so the peak sits at the pulse's trailing
    edge: gain * amplitude * (1 - exp(-pulse_width/tau)).
    """
    if pulse_width < 0.0:
        raise ValueError(f"pulse_width must be >= 0, got {pulse_width}")
    return p.gain * amplitude * (1.0 - math.exp(-pulse_width / p.tau))
