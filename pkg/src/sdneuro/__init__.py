"""Behavioral simulator of spike-based signal encoding.

A sigma-delta feedback loop around a leaky integrator encodes analog
current waveforms as asynchronous spike trains; extended feedback pulses
make the loop track fast inputs without the slewing pathology of the
adaptive-exponential neuron it abstracts.  The package bundles the neuron
models, an encode/decode codec, SDR and energy metrics, an echo-state
network mapped onto spiking nodes, and a CLI that reruns the experiments
as CSV/SVG artifacts.
"""

from .codec import (
    EncodeTrace,
    RoundtripResult,
    SpikeTrain,
    decode,
    encode,
    read_spike_csv,
    roundtrip,
    transient_skip,
    write_spike_csv,
    write_trace_csv,
)
from .esn import (
    EsnParams,
    SpikingEsnConfig,
    SpikingEsnResult,
    esn_init,
    esn_step,
    load_esn,
    map_to_spiking,
    run_reservoir,
    run_spiking_esn,
    save_esn,
    train_readout,
)
from .filters import (
    ERR_TAU,
    FB_TAU,
    RECON_TAU,
    FilterParams,
    FilterState,
    lpf_pulse_peak,
    lpf_run,
    lpf_step,
)
from .kernels import BACKEND
from .metrics import (
    ADEX_ENERGY_PROXY,
    SD_ENERGY_PROXY,
    EnergyReport,
    SdrReport,
    energy_model,
    energy_per_spike,
    firing_rate,
    nrmse,
    sdr,
)
from .neurons import (
    DEFAULT_ADEX_DT,
    AdexParams,
    AdexState,
    RateEstimate,
    SdNeuronParams,
    SdNeuronState,
    adex_step,
    lif_rate,
    narrow_pulse_params,
    run_adex,
    run_sd,
    sd_step,
)
from .signals import Signal, make_dc, make_sine, read_signal_csv, write_signal_csv

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    # signals
    "Signal",
    "make_dc",
    "make_sine",
    "read_signal_csv",
    "write_signal_csv",
    # filters
    "ERR_TAU",
    "FB_TAU",
    "RECON_TAU",
    "FilterParams",
    "FilterState",
    "lpf_step",
    "lpf_run",
    "lpf_pulse_peak",
    # neurons
    "DEFAULT_ADEX_DT",
    "SdNeuronParams",
    "SdNeuronState",
    "AdexParams",
    "AdexState",
    "RateEstimate",
    "sd_step",
    "adex_step",
    "run_sd",
    "run_adex",
    "lif_rate",
    "narrow_pulse_params",
    # codec
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
    # metrics
    "SdrReport",
    "EnergyReport",
    "ADEX_ENERGY_PROXY",
    "SD_ENERGY_PROXY",
    "sdr",
    "firing_rate",
    "energy_model",
    "energy_per_spike",
    "nrmse",
    # esn
    "EsnParams",
    "SpikingEsnConfig",
    "SpikingEsnResult",
    "esn_init",
    "esn_step",
    "run_reservoir",
    "train_readout",
    "save_esn",
    "load_esn",
    "map_to_spiking",
    "run_spiking_esn",
]
