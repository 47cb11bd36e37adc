"""Experiment runner.

Subcommands reproduce the desk-scale experiments as CSV/SVG artifacts:

    sdneuro dc-sweep   --config cfg.ini [--set sec.key=v] [--out dir]
    sdneuro sine-sweep ...
    sdneuro slew-demo  ...
    sdneuro esn-demo   ...
    sdneuro codec      ...

Configs are INI files with one section per module; every key must match a
known default (unknown keys are a config error, exit code 2).  Reruns with
the same config and seed produce byte-identical CSVs.  `SDNEURO_THREADS`
caps the sweep worker pool; row order is fixed by the grid, not by
completion time.
"""

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import codec as codec_mod
from . import esn as esn_mod
from . import kernels, metrics, plotting
from .filters import RECON_TAU, FilterParams
from .neurons import SdNeuronParams
from .signals import Signal, make_dc, make_sine, read_signal_csv, write_signal_csv

__all__ = ["main"]

# ---------------------------------------------------------------------------
# defaults: one flat (section, key) -> value table per experiment.  The
# default's Python type decides how the INI string is parsed.

NEURON_DEFAULTS = {
    "err_gain": 1.0,
    "err_tau_s": 2e-3,
    "fb_gain": 1.0,
    "fb_tau_s": 10e-3,
    "delta_na": 1.0,
    "pulse_width_s": 100e-6,
    "pulse_amplitude_na": 100.0,
    "reset_na": 0.0,
}

SIGNAL_DEFAULTS = {
    "freq_hz": 5.0,
    "amplitude_na": 50.0,
    "offset_na": 50.0,
    "duration_s": 1.0,
    "sample_rate_hz": 1e6,
}

DEFAULTS = {
    "dc-sweep": {
        "dc_sweep": {
            "i_min_na": 5.0,
            "i_max_na": 50.0,
            "points": 10,
            "duration_s": 0.5,
            "sample_rate_hz": 1e6,
        },
        "neuron": dict(NEURON_DEFAULTS),
    },
    "sine-sweep": {
        "sine_sweep": {
            "freqs_hz": (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0),
            "fb_gains": (1.0,),
            "amplitude_na": 50.0,
            "offset_na": 50.0,
            "duration_s": 2.2,
            "sample_rate_hz": 1e6,
        },
        "neuron": dict(NEURON_DEFAULTS),
    },
    "slew-demo": {
        "slew_demo": {
            "freq_hz": 20.0,
            "amplitude_na": 50.0,
            "offset_na": 50.0,
            "duration_s": 0.6,
            "sample_rate_hz": 1e6,
            # feedback charge kept per narrow pulse, as a fraction of the
            # extended pulse's charge; 1.0 matches DC rates but overshoots
            # on slews, lower values trade spikes back for SDR
            "narrow_compensation": 0.4,
            "trace_rate_hz": 10e3,
        },
        "neuron": dict(NEURON_DEFAULTS),
    },
    "esn-demo": {
        "esn": {
            "n": 50,
            "n_in": 2,
            "spectral_radius": 0.9,
            "density": 0.2,
            "input_scale": 0.5,
            "bias_scale": 0.1,
            "alpha": 0.1,
            "seed": 42,
            "ridge_lambda": 1e-3,
        },
        "esn_demo": {
            "n_ticks": 3000,
            "skip_ticks": 200,
            "delay_ticks": 5,
            "tick_hz": 1000.0,
            "sim_rate_hz": 1e5,
            "offset_na": 50.0,
            "gain_na": 30.0,
            "input_seed": 7,
        },
    },
    "codec": {
        "codec": {
            "input_csv": "",
            "kind": "sd",
            "recon_tau_s": 10e-3,
        },
        "signal": dict(SIGNAL_DEFAULTS),
        "neuron": dict(NEURON_DEFAULTS),
    },
}


class ConfigError(Exception):
    pass


def _parse_value(default, raw, where):
    try:
        if isinstance(default, bool):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError("expected true/false")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(tok) for tok in raw.split(",") if tok.strip() != "")
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r}: {exc}") from exc


def load_config(experiment, config_path=None, overrides=()):
    """Merge defaults, an optional INI file, and --set overrides."""
    cfg = {sec: dict(keys) for sec, keys in DEFAULTS[experiment].items()}
    if config_path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(config_path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
        for sec in parser.sections():
            if sec not in cfg:
                raise ConfigError(
                    f"{config_path}: unknown section [{sec}] for {experiment} "
                    f"(known: {', '.join(sorted(cfg))})"
                )
            for key, raw in parser[sec].items():
                if key not in cfg[sec]:
                    raise ConfigError(
                        f"{config_path}: unknown key {sec}.{key} "
                        f"(known: {', '.join(sorted(cfg[sec]))})"
                    )
                cfg[sec][key] = _parse_value(cfg[sec][key], raw, f"{config_path}: {sec}.{key}")
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        target, raw = item.split("=", 1)
        sec, key = target.split(".", 1)
        if sec not in cfg or key not in cfg[sec]:
            raise ConfigError(f"--set {item!r}: unknown key {sec}.{key}")
        cfg[sec][key] = _parse_value(cfg[sec][key], raw, f"--set {sec}.{key}")
    return cfg


def _neuron_from_cfg(section):
    return SdNeuronParams(
        err=FilterParams(gain=section["err_gain"], tau=section["err_tau_s"]),
        fb=FilterParams(gain=section["fb_gain"], tau=section["fb_tau_s"]),
        delta=section["delta_na"],
        pulse_width=section["pulse_width_s"],
        pulse_amplitude=section["pulse_amplitude_na"],
        reset_value=section["reset_na"],
    )


def _n_workers():
    raw = os.environ.get("SDNEURO_THREADS", "")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"SDNEURO_THREADS={raw!r} is not an integer")
        if n < 1:
            raise ConfigError("SDNEURO_THREADS must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)


def _map_pool(fn, items):
    """Map over grid points with a worker pool, keeping grid order."""
    workers = _n_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")


def _downsample(arr, max_points=2000):
    arr = np.asarray(arr)
    if arr.shape[0] <= max_points:
        return arr
    stride = int(math.ceil(arr.shape[0] / max_points))
    return arr[::stride]


# ---------------------------------------------------------------------------
# experiments: each returns (file names, warnings, metrics dict)


def run_dc_sweep(cfg, out_dir):
    sw = cfg["dc_sweep"]
    p = _neuron_from_cfg(cfg["neuron"])
    if sw["points"] < 2:
        raise ConfigError("dc_sweep.points must be >= 2")
    levels = np.linspace(sw["i_min_na"], sw["i_max_na"], sw["points"])

    def one(i_dc):
        x = make_dc(float(i_dc), sw["duration_s"], sw["sample_rate_hz"])
        train, _ = codec_mod.encode(x, p, kind="lif")
        rate = metrics.firing_rate(train)
        energy = metrics.energy_model(train, *metrics.SD_ENERGY_PROXY)
        return float(i_dc), rate, energy.total_j

    rows = _map_pool(one, list(levels))
    csv_path = os.path.join(out_dir, "dc_sweep.csv")
    _write_csv(csv_path, ("i_dc_na", "rate_hz", "energy_proxy_j"), rows)

    i_col = np.array([r[0] for r in rows])
    rate_col = np.array([r[1] for r in rows])
    slope, intercept = np.polyfit(i_col, rate_col, 1)
    fit = slope * i_col + intercept
    ss_res = float(np.sum((rate_col - fit) ** 2))
    ss_tot = float(np.sum((rate_col - rate_col.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    svg_path = os.path.join(out_dir, "dc_sweep.svg")
    plotting.line_plot(
        svg_path,
        [("rate", i_col, rate_col)],
        title="Firing rate vs DC input (feedback disabled)",
        x_label="i_dc (nA)",
        y_label="rate (Hz)",
    )
    met = {
        "r_squared": r_squared,
        "intercept_hz": float(intercept),
        "intercept_over_max_rate": float(intercept / rate_col.max()) if rate_col.max() > 0 else 0.0,
    }
    return ["dc_sweep.csv", "dc_sweep.svg"], [], met


def run_sine_sweep(cfg, out_dir):
    sw = cfg["sine_sweep"]
    base = _neuron_from_cfg(cfg["neuron"])
    grid = [(f, g) for f in sw["freqs_hz"] for g in sw["fb_gains"]]
    if not grid:
        raise ConfigError("sine_sweep grids must be non-empty")

    def one(point):
        freq, fb_gain = point
        p = replace(base, fb=replace(base.fb, gain=fb_gain))
        skip = codec_mod.transient_skip(p.fb.tau, RECON_TAU)
        # duration_s is a minimum; slow fundamentals get extended so the
        # SDR window always holds the required whole cycles
        duration = max(sw["duration_s"], skip + (metrics.MIN_CYCLES + 0.5) / freq)
        x = make_sine(sw["amplitude_na"], sw["offset_na"], freq, duration,
                      sw["sample_rate_hz"])
        rt = codec_mod.roundtrip(x, p)
        report = metrics.sdr(rt.reconstruction, freq, skip=skip, reference=x)
        energy = metrics.energy_model(rt.train, *metrics.SD_ENERGY_PROXY)
        return freq, fb_gain, report.sdr_db, energy.total_j

    rows = _map_pool(one, grid)
    csv_path = os.path.join(out_dir, "sine_sweep.csv")
    _write_csv(csv_path, ("freq_hz", "fb_gain", "sdr_db", "energy_proxy_j"), rows)

    series = []
    for g in sw["fb_gains"]:
        xs = [r[0] for r in rows if r[1] == g]
        ys = [r[2] for r in rows if r[1] == g]
        series.append((f"fb_gain={g:g}", xs, ys))
    svg_path = os.path.join(out_dir, "sine_sweep.svg")
    plotting.line_plot(
        svg_path,
        series,
        title="Reconstruction SDR vs sinusoid frequency",
        x_label="frequency (Hz)",
        y_label="SDR (dB)",
    )
    return ["sine_sweep.csv", "sine_sweep.svg"], [], {"n_points": len(rows)}


def run_slew_demo(cfg, out_dir):
    sw = cfg["slew_demo"]
    extended = _neuron_from_cfg(cfg["neuron"])
    x = make_sine(sw["amplitude_na"], sw["offset_na"], sw["freq_hz"], sw["duration_s"],
                  sw["sample_rate_hz"])
    dt = 1.0 / sw["sample_rate_hz"]
    scale = sw["narrow_compensation"] * extended.pulse_width / dt
    narrow = replace(
        extended,
        pulse_width=dt,
        fb=replace(extended.fb, gain=extended.fb.gain * scale),
    )

    def one(item):
        name, p, proxy = item
        rt = codec_mod.roundtrip(x, p)
        skip = codec_mod.transient_skip(p.fb.tau, RECON_TAU)
        report = metrics.sdr(rt.reconstruction, sw["freq_hz"], skip=skip, reference=x)
        energy = metrics.energy_model(rt.train, *proxy)
        return name, p, rt, report, energy

    results = _map_pool(one, [
        ("extended", extended, metrics.SD_ENERGY_PROXY),
        ("narrow", narrow, metrics.ADEX_ENERGY_PROXY),
    ])

    rows = []
    series = [("input", _downsample(x.times()), _downsample(x.samples))]
    files = []
    for name, p, rt, report, energy in results:
        rows.append((name, p.pulse_width, p.fb.gain, len(rt.train.times),
                     report.sdr_db, energy.total_j))
        trace_stride = int(round(sw["sample_rate_hz"] / sw["trace_rate_hz"]))
        t = x.times()[::trace_stride]
        recon = rt.reconstruction.samples[::trace_stride]
        trace_name = f"slew_{name}.csv"
        _write_csv(os.path.join(out_dir, trace_name), ("time_s", "recon_na"),
                   list(zip(t, recon)))
        files.append(trace_name)
        series.append((name, _downsample(x.times()), _downsample(rt.reconstruction.samples)))

    _write_csv(
        os.path.join(out_dir, "slew_summary.csv"),
        ("config", "pulse_width_s", "fb_gain", "spike_count", "sdr_db", "energy_proxy_j"),
        rows,
    )
    plotting.line_plot(
        os.path.join(out_dir, "slew_demo.svg"),
        series,
        title="Narrow vs extended feedback pulses",
        x_label="time (s)",
        y_label="current (nA)",
    )
    counts = {name: n for name, _, _, n, _, _ in rows}
    sdrs = {name: s for name, _, _, _, s, _ in rows}
    met = {
        "count_ratio_narrow_over_extended": counts["narrow"] / counts["extended"],
        "sdr_gap_db": sdrs["narrow"] - sdrs["extended"],
    }
    return ["slew_summary.csv", *files, "slew_demo.svg"], [], met


def leaky_smooth(x, alpha=0.1, passes=1):
    """Repeated first-order leaky smoothing, used to band-limit demo inputs."""
    y = np.asarray(x, dtype=np.float64).copy()
    for _ in range(passes):
        acc = 0.0
        for k in range(y.shape[0]):
            acc += alpha * (y[k] - acc)
            y[k] = acc
    return y


def run_esn_demo(cfg, out_dir):
    ec = cfg["esn"]
    dm = cfg["esn_demo"]
    p = esn_mod.esn_init(
        n=ec["n"],
        n_in=ec["n_in"],
        spectral_radius=ec["spectral_radius"],
        density=ec["density"],
        input_scale=ec["input_scale"],
        bias_scale=ec["bias_scale"],
        alpha=ec["alpha"],
        seed=ec["seed"],
    )
    n_ticks = dm["n_ticks"]
    skip = dm["skip_ticks"]
    if not (0 <= skip < n_ticks):
        raise ConfigError("esn_demo.skip_ticks must be in [0, n_ticks)")

    rng = np.random.default_rng(dm["input_seed"])
    u = leaky_smooth(rng.uniform(-1.0, 1.0, n_ticks), passes=2)
    u /= np.max(np.abs(u))
    inputs = np.stack([u] + [np.ones(n_ticks)] * (ec["n_in"] - 1), axis=1)
    target = leaky_smooth(np.roll(u, dm["delay_ticks"]), passes=5)

    states_f = esn_mod.run_reservoir(p, inputs)
    p.w_out = esn_mod.train_readout(states_f[skip:], target[skip:], ec["ridge_lambda"])
    readout_f = states_f @ p.w_out

    spiking_cfg = esn_mod.map_to_spiking(
        p,
        tick_hz=dm["tick_hz"],
        sim_rate_hz=dm["sim_rate_hz"],
        offset_na=dm["offset_na"],
        gain_na=dm["gain_na"],
    )
    res = esn_mod.run_spiking_esn(spiking_cfg, inputs)
    readout_s = res.states @ p.w_out

    err = readout_s[skip:] - readout_f[skip:]
    nrmse = float(np.sqrt(np.mean(err**2)) / np.sqrt(np.mean(readout_f[skip:] ** 2)))

    t = np.arange(n_ticks) / dm["tick_hz"]
    _write_csv(
        os.path.join(out_dir, "esn_trace.csv"),
        ("time_s", "readout_float", "readout_spiking"),
        list(zip(t, readout_f, readout_s)),
    )
    esn_mod.save_esn(os.path.join(out_dir, "esn_model.txt"), p)
    plotting.line_plot(
        os.path.join(out_dir, "esn_demo.svg"),
        [
            ("float", _downsample(t), _downsample(readout_f)),
            ("spiking", _downsample(t), _downsample(readout_s)),
        ],
        title="Floating-point vs spiking reservoir readout",
        x_label="time (s)",
        y_label="readout",
    )
    warnings = []
    if res.saturated:
        worst = float(res.pegged_fraction.max())
        warnings.append(
            f"spiking nodes pegged at max pulse rate on up to {worst:.1%} of ticks; "
            f"reduce esn_demo.gain_na or the input amplitude"
        )
    met = {"nrmse": nrmse, "saturated": res.saturated}
    return ["esn_trace.csv", "esn_model.txt", "esn_demo.svg"], warnings, met


def run_codec(cfg, out_dir):
    cc = cfg["codec"]
    p = _neuron_from_cfg(cfg["neuron"])
    if cc["kind"] not in ("sd", "lif", "adex"):
        raise ConfigError(f"codec.kind must be sd, lif or adex, got {cc['kind']!r}")
    if cc["input_csv"]:
        try:
            x = read_signal_csv(cc["input_csv"])
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    else:
        sg = cfg["signal"]
        x = make_sine(sg["amplitude_na"], sg["offset_na"], sg["freq_hz"],
                      sg["duration_s"], sg["sample_rate_hz"])

    recon_p = FilterParams(gain=1.0, tau=cc["recon_tau_s"])
    rt = codec_mod.roundtrip(x, p, recon=recon_p)
    codec_mod.write_spike_csv(os.path.join(out_dir, "spikes.csv"), rt.train)
    write_signal_csv(os.path.join(out_dir, "input.csv"), x)
    write_signal_csv(os.path.join(out_dir, "recon.csv"), rt.reconstruction)
    plotting.line_plot(
        os.path.join(out_dir, "codec.svg"),
        [
            ("input", _downsample(x.times()), _downsample(x.samples)),
            ("recon", _downsample(x.times()), _downsample(rt.reconstruction.samples)),
        ],
        title="Encode/decode round trip",
        x_label="time (s)",
        y_label="current (nA)",
    )
    skip = codec_mod.transient_skip(p.fb.tau, recon_p.tau)
    keep = x.times() >= skip
    met = {
        "spike_count": len(rt.train.times),
        "fitted_gain": rt.fitted_gain,
        "fitted_offset": rt.fitted_offset,
        "residual_rms_na": float(np.sqrt(np.mean(rt.residual.samples[keep] ** 2))),
    }
    return ["spikes.csv", "input.csv", "recon.csv", "codec.svg"], [], met


EXPERIMENTS = {
    "dc-sweep": run_dc_sweep,
    "sine-sweep": run_sine_sweep,
    "slew-demo": run_slew_demo,
    "esn-demo": run_esn_demo,
    "codec": run_codec,
}


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def run_experiment(experiment, cfg, out_dir):
    """Run one experiment and write its manifest; returns the manifest dict."""
    os.makedirs(out_dir, exist_ok=True)
    files, warnings, met = EXPERIMENTS[experiment](cfg, out_dir)
    if warnings:
        with open(os.path.join(out_dir, "warnings.txt"), "w", newline="\n") as fh:
            for w in warnings:
                fh.write(w + "\n")
        files = [*files, "warnings.txt"]
    manifest = {
        "experiment": experiment,
        "backend": kernels.BACKEND,
        "config": cfg,
        "files": {name: _sha256(os.path.join(out_dir, name)) for name in sorted(files)},
        "metrics": met,
        "warnings": warnings,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sdneuro",
        description="Spike-encoding experiments: sweeps, demos, codec round trips.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SEC.KEY=VALUE",
            help="override one config value (repeatable)",
        )
        sp.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    out_dir = args.out if args.out is not None else args.experiment.replace("-", "_") + "_out"
    try:
        cfg = load_config(args.experiment, args.config, args.overrides)
        manifest = run_experiment(args.experiment, cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(manifest['files'])} files + manifest.json to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
