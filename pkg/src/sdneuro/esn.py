"""Echo-state network and its mapping onto spiking encoders.

The floating-point reservoir follows the leaky update

    s[n+1] = (1 - alpha) * s[n] + alpha * tanh(W_in x[n] + W s[n] + b)

with spectral radius < 1 for the echo-state property.  In the spiking
version each node's state lives in the feedback signal of one sigma-delta
loop: every tick the recurrence is evaluated on the decoded node outputs,
the resulting targets are encoded as DC drives for the next tick, and the
loops' feedback states are read back through a calibrated inverse of the
loop's DC transfer.  An ideal pass-through encoder (test hook) reduces the
whole pipeline to the floating-point recurrence.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import kernels
from .filters import FilterParams
from .neurons import SdNeuronParams

__all__ = [
    "EsnParams",
    "esn_init",
    "esn_step",
    "run_reservoir",
    "train_readout",
    "spectral_radius_power_iter",
    "save_esn",
    "load_esn",
    "SpikingEsnConfig",
    "map_to_spiking",
    "SpikingEsnResult",
    "run_spiking_esn",
]

# Node encoder defaults: a stiffer error filter keeps the loop's DC
# tracking error around 1 nA so the calibrated decode stays accurate.
NODE_NEURON = SdNeuronParams(err=FilterParams(gain=10.0, tau=2e-3))
NODE_OFFSET = 50.0  # nA for node state 0
NODE_GAIN = 30.0  # nA per node-state unit


@dataclass(eq=False)
class EsnParams:
    """Reservoir weights and update parameters."""

    n: int
    w_in: np.ndarray  # (n, n_in)
    w: np.ndarray  # (n, n)
    b: np.ndarray  # (n,)
    alpha: float  # retention factor, 0 < alpha < 1
    nonlinearity: str = "tanh"
    w_out: Optional[np.ndarray] = None

    def __post_init__(self):
        self.w_in = np.asarray(self.w_in, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.w.shape != (self.n, self.n):
            raise ValueError(f"w must be ({self.n}, {self.n})")
        if self.w_in.ndim != 2 or self.w_in.shape[0] != self.n:
            raise ValueError(f"w_in must be ({self.n}, n_in)")
        if self.b.shape != (self.n,):
            raise ValueError(f"b must be ({self.n},)")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.nonlinearity != "tanh":
            raise ValueError(f"unsupported nonlinearity {self.nonlinearity!r}")
        if self.w_out is not None:
            self.w_out = np.asarray(self.w_out, dtype=np.float64)
            if self.w_out.shape != (self.n,):
                raise ValueError(f"w_out must be ({self.n},)")

    @property
    def n_in(self):
        return self.w_in.shape[1]


def esn_init(
    n=50,
    n_in=2,
    spectral_radius=0.9,
    density=0.2,
    input_scale=0.5,
    bias_scale=0.1,
    alpha=0.1,
    seed=0,
):
    """Random reservoir with the recurrent weights rescaled to the target
    spectral radius."""
    if n < 1 or n_in < 1:
        raise ValueError("n and n_in must be >= 1")
    if not (0.0 < spectral_radius < 1.0):
        raise ValueError("spectral_radius must be in (0, 1)")
    rng = np.random.default_rng(seed)
    w_in = rng.uniform(-input_scale, input_scale, size=(n, n_in))
    w = rng.uniform(-1.0, 1.0, size=(n, n)) * (rng.random((n, n)) < density)
    rho = float(np.max(np.abs(np.linalg.eigvals(w))))
    if rho == 0.0:
        raise ValueError("recurrent matrix has zero spectral radius; cannot rescale")
    w *= spectral_radius / rho
    b = rng.uniform(-bias_scale, bias_scale, size=n)
    return EsnParams(n=n, w_in=w_in, w=w, b=b, alpha=alpha)


def esn_step(s, x, p):
    """One reservoir update; returns the new state vector."""
    s = np.asarray(s, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if s.shape != (p.n,):
        raise ValueError(f"state must be ({p.n},)")
    if x.shape != (p.n_in,):
        raise ValueError(f"input must be ({p.n_in},)")
    return (1.0 - p.alpha) * s + p.alpha * np.tanh(p.w_in @ x + p.w @ s + p.b)


def run_reservoir(p, inputs, s0=None):
    """Drive the reservoir with ``inputs`` (n_ticks, n_in); returns states
    (n_ticks, n), one row per tick after its update."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != p.n_in:
        raise ValueError(f"inputs must be (n_ticks, {p.n_in})")
    s = np.zeros(p.n) if s0 is None else np.asarray(s0, dtype=np.float64)
    states = np.empty((inputs.shape[0], p.n))
    for k in range(inputs.shape[0]):
        s = esn_step(s, inputs[k], p)
        states[k] = s
    return states


def train_readout(states, targets, ridge_lambda=1e-3):
    """Ridge-regressed readout weights via the normal equations.

    Solves (S^T S + lambda I) w = S^T y with a symmetric positive-definite
    factorization; lambda = 0 is allowed only for full-rank states.
    """
    states = np.asarray(states, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if states.ndim != 2 or targets.shape != (states.shape[0],):
        raise ValueError("states must be (n_ticks, n) and targets (n_ticks,)")
    if ridge_lambda < 0.0:
        raise ValueError("ridge_lambda must be >= 0")
    gram = states.T @ states + ridge_lambda * np.eye(states.shape[1])
    try:
        c = cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            f"normal equations not positive definite ({exc}); use ridge_lambda > 0"
        ) from exc
    return cho_solve(c, states.T @ targets)


def spectral_radius_power_iter(w, warmup=200, span=200, seed=0):
    """Power-iteration estimate of the spectral radius.

    Uses the geometric mean growth rate of |w^k v| after a warmup, which
    converges even when the dominant eigenvalues are a complex pair (the
    per-step norm then oscillates but its geometric mean does not).
    """
    w = np.asarray(w, dtype=np.float64)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(w.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(warmup):
        v = w @ v
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            return 0.0
        v /= nrm
    log_growth = 0.0
    for _ in range(span):
        v = w @ v
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            return 0.0
        log_growth += math.log(nrm)
        v /= nrm
    return math.exp(log_growth / span)


def save_esn(path, p):
    """Flat text serialization: dims header, then row-major weight blocks."""
    with open(path, "w") as fh:
        fh.write(f"esn n={p.n} n_in={p.n_in} alpha={p.alpha!r} nonlinearity={p.nonlinearity}\n")
        fh.write(f"has_w_out={int(p.w_out is not None)}\n")
        for name, arr in (("w_in", p.w_in), ("w", p.w), ("b", p.b)):
            fh.write(f"{name}\n")
            for v in np.ravel(arr, order="C"):
                fh.write(repr(float(v)) + "\n")
        if p.w_out is not None:
            fh.write("w_out\n")
            for v in p.w_out:
                fh.write(repr(float(v)) + "\n")


def load_esn(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("esn "):
        raise ValueError(f"{path}: not an ESN file")
    head = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    n = int(head["n"])
    n_in = int(head["n_in"])
    alpha = float(head["alpha"])
    nonlinearity = head["nonlinearity"]
    has_w_out = bool(int(lines[1].split("=", 1)[1]))
    pos = 2
    blocks = {}
    order = [("w_in", n * n_in), ("w", n * n), ("b", n)]
    if has_w_out:
        order.append(("w_out", n))
    for name, count in order:
        if lines[pos] != name:
            raise ValueError(f"{path}: expected block {name!r} at line {pos + 1}")
        pos += 1
        vals = [float(v) for v in lines[pos : pos + count]]
        if len(vals) != count:
            raise ValueError(f"{path}: block {name!r} truncated")
        pos += count
        blocks[name] = np.asarray(vals)
    return EsnParams(
        n=n,
        w_in=blocks["w_in"].reshape(n, n_in),
        w=blocks["w"].reshape(n, n),
        b=blocks["b"],
        alpha=alpha,
        nonlinearity=nonlinearity,
        w_out=blocks.get("w_out"),
    )


@dataclass(eq=False)
class SpikingEsnConfig:
    """One sigma-delta loop per node plus the drive scaling and the
    measured DC transfer used to decode node states."""

    esn: EsnParams
    neuron: SdNeuronParams
    tick_hz: float
    sim_rate_hz: float
    offset_na: float
    gain_na: float
    cal_drive: np.ndarray  # calibration grid (nA)
    cal_s: np.ndarray  # settled mean feedback per drive (nA)


def map_to_spiking(
    esn,
    neuron=None,
    tick_hz=1000.0,
    sim_rate_hz=1e5,
    offset_na=NODE_OFFSET,
    gain_na=NODE_GAIN,
    cal_points=25,
    cal_settle=0.2,
    cal_window=0.1,
):
    """Build the spiking realization of a reservoir.

    Node states in [-1, 1] map to drives ``offset + gain * state``; the
    drive range must stay non-negative (unipolar encoders) and below the
    feedback saturation level.  The loop's DC transfer is measured on a
    drive grid so node states can be decoded by interpolation.
    """
    p = neuron if neuron is not None else NODE_NEURON
    if gain_na <= 0.0:
        raise ValueError("gain_na must be positive")
    lo = offset_na - gain_na
    hi = offset_na + gain_na
    if lo < 0.0:
        raise ValueError(f"drive range [{lo}, {hi}] goes negative; encoders are unipolar")
    saturation = p.fb.gain * p.pulse_amplitude
    if hi >= saturation:
        raise ValueError(f"drive range [{lo}, {hi}] reaches feedback saturation {saturation}")
    if not (tick_hz > 0.0 and sim_rate_hz > 0.0):
        raise ValueError("rates must be positive")
    sub = sim_rate_hz / tick_hz
    if abs(sub - round(sub)) > 1e-9 or round(sub) < 1:
        raise ValueError("sim_rate_hz must be an integer multiple of tick_hz")

    dt = 1.0 / sim_rate_hz
    # margin so decode can interpolate slightly past the nominal range
    grid = np.linspace(max(lo - 2.0, 0.0), hi + 2.0, cal_points)
    meas = np.empty(cal_points)
    settle_steps = int(math.floor(cal_settle * sim_rate_hz + 0.5))
    window_steps = int(math.floor(cal_window * sim_rate_hz + 0.5))
    w_steps = p.width_steps(dt)
    for j, d in enumerate(grid):
        drive = np.full(1, float(d))
        imem = np.zeros(1)
        s = np.zeros(1)
        ps = np.zeros(1, dtype=np.int64)
        cnt = np.zeros(1, dtype=np.int64)
        ssum = np.zeros(1)
        kernels.sd_run_const_nodes(
            drive, imem, s, ps, cnt, ssum, settle_steps, dt,
            p.err.gain, p.err.tau, p.fb.gain, p.fb.tau,
            p.delta, p.reset_value, w_steps, p.pulse_amplitude,
        )
        ssum[0] = 0.0
        kernels.sd_run_const_nodes(
            drive, imem, s, ps, cnt, ssum, window_steps, dt,
            p.err.gain, p.err.tau, p.fb.gain, p.fb.tau,
            p.delta, p.reset_value, w_steps, p.pulse_amplitude,
        )
        meas[j] = ssum[0] / window_steps
    if np.any(np.diff(meas) <= 0.0):
        raise ValueError("calibration transfer not monotone; loop misconfigured")
    return SpikingEsnConfig(esn, p, tick_hz, sim_rate_hz, offset_na, gain_na, grid, meas)


@dataclass(eq=False)
class SpikingEsnResult:
    states: np.ndarray  # decoded node states, (n_ticks, n)
    spike_counts: np.ndarray  # per tick per node, (n_ticks, n)
    saturated: bool  # any node pegged at max pulse rate on > 1% of ticks
    pegged_fraction: np.ndarray  # per node


def run_spiking_esn(cfg, inputs, passthrough=False, warmup=0.1):
    """Run the spiking reservoir over tick inputs (n_ticks, n_in).

    Before the first tick every loop is driven at the zero-state operating
    point for ``warmup`` seconds so the feedback filters start settled
    instead of slewing up from zero.  With ``passthrough`` the encoders are
    replaced by an ideal identity, which reproduces the floating-point
    reservoir exactly (test hook).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    p = cfg.esn
    if inputs.ndim != 2 or inputs.shape[1] != p.n_in:
        raise ValueError(f"inputs must be (n_ticks, {p.n_in})")
    n_ticks = inputs.shape[0]
    nn = cfg.neuron
    dt = 1.0 / cfg.sim_rate_hz
    sub = int(round(cfg.sim_rate_hz / cfg.tick_hz))
    w_steps = nn.width_steps(dt)
    # a node is pegged when its pulse output never turns off in a tick
    peg_count = sub / max(w_steps, 1)

    target = np.zeros(p.n)
    s_hat = np.zeros(p.n)
    imem = np.zeros(p.n)
    s_neu = np.zeros(p.n)
    ps = np.zeros(p.n, dtype=np.int64)

    warm_steps = int(math.floor(warmup * cfg.sim_rate_hz + 0.5))
    if warm_steps > 0 and not passthrough:
        drive = np.full(p.n, cfg.offset_na)
        kernels.sd_run_const_nodes(
            drive, imem, s_neu, ps,
            np.zeros(p.n, dtype=np.int64), np.zeros(p.n), warm_steps, dt,
            nn.err.gain, nn.err.tau, nn.fb.gain, nn.fb.tau,
            nn.delta, nn.reset_value, w_steps, nn.pulse_amplitude,
        )
    states = np.empty((n_ticks, p.n))
    counts = np.zeros((n_ticks, p.n), dtype=np.int64)

    for k in range(n_ticks):
        target = (1.0 - p.alpha) * target + p.alpha * np.tanh(
            p.w_in @ inputs[k] + p.w @ s_hat + p.b
        )
        if passthrough:
            s_hat = target
        else:
            drive = cfg.offset_na + cfg.gain_na * target
            cnt = counts[k]
            ssum = np.zeros(p.n)
            kernels.sd_run_const_nodes(
                drive, imem, s_neu, ps, cnt, ssum, sub, dt,
                nn.err.gain, nn.err.tau, nn.fb.gain, nn.fb.tau,
                nn.delta, nn.reset_value, w_steps, nn.pulse_amplitude,
            )
            mean_s = ssum / sub
            drive_hat = np.interp(mean_s, cfg.cal_s, cfg.cal_drive)
            s_hat = (drive_hat - cfg.offset_na) / cfg.gain_na
        states[k] = s_hat

    pegged = (counts >= 0.95 * peg_count).mean(axis=0)
    return SpikingEsnResult(
        states=states,
        spike_counts=counts,
        saturated=bool(np.any(pegged > 0.01)),
        pegged_fraction=pegged,
    )
