"""Configuration-driven experiment runner.

One JSON config describes one reproducible run: the physics sections
(drive, signal, noise, readout, timing, wavegen) plus an experiment kind
and its parameters.  Outputs are CSV/JSON stamped with the sha256 of the
effective config, and optional SVG plots rendered deterministically.

Exit codes: 0 success, 2 malformed config, 3 physics validation
(grid/Nyquist/timing/step), 1 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, dsp, wavegen
from ._kernels import backend
from .dynamics import TimeGrid, propagate_batch, measured_z, rotating_frame_model
from .noise import NoiseConfig
from .readout import CALIBRATED_CONTRAST_KAPPA, ReadoutConfig
from .sequences import (
    SIGMA0,
    PhaseResponseCache,
    SequenceTiming,
    clock_frequency_hz,
    compute_phase_sensitivity_curve,
    compute_sensitivity,
    heterodyne_spectrum,
    rabi_spectrum,
    run_fixed_point_sweep,
    run_heterodyne,
    run_rabi,
    snr_vs_time,
)
from .spincore import (
    ConfigError,
    DriveConfig,
    PhysicsValidationError,
    SignalConfig,
)

SCHEMA_VERSION = 1
KINDS = (
    "rabi",
    "amp-sweep",
    "phase-sweep",
    "sensitivity",
    "phase-sensitivity",
    "heterodyne",
    "resonances",
    "bloch",
    "snr-scaling",
)


class SchemaError(ValueError):
    """Config file violates the schema."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def _require_keys(section: dict, allowed: set, name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise SchemaError(f"unknown keys in '{name}': {sorted(unknown)}")


def _num(section: dict, key: str, default):
    v = section.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"'{key}' must be a number")
    return float(v)


def build_drive(section: dict) -> DriveConfig:
    _require_keys(
        section,
        {"omega0_hz", "Omega_hz", "epsilon_m_hz", "omega_m_hz", "theta_m", "phase_offset"},
        "drive",
    )
    kwargs = {}
    if "omega0_hz" in section:
        kwargs["omega0"] = _num(section, "omega0_hz", None)
    if "Omega_hz" in section:
        kwargs["Omega"] = _num(section, "Omega_hz", None)
    if "epsilon_m_hz" in section:
        kwargs["epsilon_m"] = _num(section, "epsilon_m_hz", None)
    if "omega_m_hz" in section:
        kwargs["omega_m"] = _num(section, "omega_m_hz", None)
    if "theta_m" in section:
        kwargs["theta_m"] = _num(section, "theta_m", None)
    if "phase_offset" in section:
        kwargs["phase_offset"] = _num(section, "phase_offset", None)
    return DriveConfig(**kwargs)


def build_signal(section: dict | None) -> SignalConfig | None:
    if section is None:
        return None
    _require_keys(section, {"g_hz", "omega_s_hz", "phi_s"}, "signal")
    g = section.get("g_hz", (0.0, 0.0, 0.0))
    if not (isinstance(g, (list, tuple)) and len(g) == 3):
        raise SchemaError("'g_hz' must be a 3-element list")
    return SignalConfig(
        g=tuple(float(v) for v in g),
        omega_s=_num(section, "omega_s_hz", 2.31e9),
        phi_s=_num(section, "phi_s", 0.0),
    )


def build_noise(section: dict) -> NoiseConfig:
    _require_keys(section, {"T2star_s", "drive_frac_sigma", "T1_s", "seed"}, "noise")
    kwargs = {}
    if "T2star_s" in section:
        kwargs["T2star"] = _num(section, "T2star_s", None)
    if "drive_frac_sigma" in section:
        kwargs["drive_frac_sigma"] = _num(section, "drive_frac_sigma", None)
    if "T1_s" in section:
        kwargs["T1"] = _num(section, "T1_s", None)
    if "seed" in section:
        seed = section["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise SchemaError("'noise.seed' must be an integer")
        kwargs["seed"] = seed
    return NoiseConfig(**kwargs)


def build_readout(section: dict) -> ReadoutConfig:
    _require_keys(
        section, {"mean_photons", "contrast_kappa", "gate_s", "laser_init_s"}, "readout"
    )
    kwargs = {}
    if "mean_photons" in section:
        kwargs["mean_photons"] = _num(section, "mean_photons", None)
    if "contrast_kappa" in section:
        kwargs["contrast_kappa"] = _num(section, "contrast_kappa", None)
    if "gate_s" in section:
        kwargs["gate"] = _num(section, "gate_s", None)
    if "laser_init_s" in section:
        kwargs["laser_init"] = _num(section, "laser_init_s", None)
    return ReadoutConfig(**kwargs)


def build_timing(section: dict, drive: DriveConfig) -> SequenceTiming:
    _require_keys(section, {"T_MW_s", "delta_T_s", "T_rep_s"}, "timing")
    T_MW = _num(section, "T_MW_s", 950e-9)
    T_rep = _num(section, "T_rep_s", 5e-6)
    if "delta_T_s" in section:
        return SequenceTiming(T_MW=T_MW, delta_T=_num(section, "delta_T_s", None), T_rep=T_rep)
    return SequenceTiming.for_drive(drive, T_MW=T_MW, T_rep=T_rep)


def build_wavegen(section: dict) -> wavegen.WaveformSpec:
    _require_keys(section, {"sample_rate_hz", "memory_length_s", "freq_grid_hz"}, "wavegen")
    kwargs = {}
    if "sample_rate_hz" in section:
        kwargs["sample_rate"] = _num(section, "sample_rate_hz", None)
    if "memory_length_s" in section:
        kwargs["memory_length"] = _num(section, "memory_length_s", None)
    if "freq_grid_hz" in section:
        kwargs["freq_grid"] = _num(section, "freq_grid_hz", None)
    return wavegen.WaveformSpec(**kwargs)


TOP_KEYS = {
    "schema", "kind", "seed", "out",
    "drive", "signal", "noise", "readout", "timing", "wavegen", "run",
}


def load_config(raw: dict) -> dict:
    """Validate the raw dict and return the effective config (defaults filled)."""
    if not isinstance(raw, dict):
        raise SchemaError("config root must be a JSON object")
    _require_keys(raw, TOP_KEYS, "config")
    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {raw.get('schema')!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got {kind!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError("'seed' must be an integer")
    for name in ("drive", "noise", "readout", "timing", "wavegen", "run"):
        if name in raw and not isinstance(raw[name], dict):
            raise SchemaError(f"'{name}' must be an object")
    if "signal" in raw and raw["signal"] is not None and not isinstance(raw["signal"], dict):
        raise SchemaError("'signal' must be an object or null")
    eff = {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "seed": seed,
        "out": raw.get("out", "ccdd_sense_out"),
        "drive": dict(raw.get("drive", {})),
        "signal": (dict(raw["signal"]) if raw.get("signal") is not None else None),
        "noise": dict(raw.get("noise", {})),
        "readout": dict(raw.get("readout", {})),
        "timing": dict(raw.get("timing", {})),
        "wavegen": dict(raw.get("wavegen", {})),
        "run": dict(raw.get("run", {})),
    }
    if not isinstance(eff["out"], str):
        raise SchemaError("'out' must be a string")
    return eff


def config_hash(effective: dict) -> str:
    """sha256 over the physics content; the output location is not physics."""
    body = {k: v for k, v in effective.items() if k != "out"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def presets() -> dict[str, dict]:
    """Named reference configurations, schema-valid as written."""
    clock = 2.32e9 - 10e6
    base_noise = {}
    base_readout = {"contrast_kappa": CALIBRATED_CONTRAST_KAPPA}
    return {
        "fig2a": {
            "schema": 1, "kind": "rabi", "seed": 21,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [2e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"t_max_s": 4e-6, "n_points": 2001, "n_realizations": 128},
        },
        "fig2e": {
            "schema": 1, "kind": "rabi", "seed": 25,
            "drive": {"theta_m": 0.0},
            "signal": {"g_hz": [2e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"t_max_s": 4e-6, "n_points": 2001, "n_realizations": 128},
        },
        "fig3a": {
            "schema": 1, "kind": "amp-sweep", "seed": 31,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [1e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"start_hz": 0.0, "stop_hz": 1.5e6, "num": 13,
                    "shots_per_repeat": 200_000, "n_realizations": 128},
        },
        "fig3d": {
            "schema": 1, "kind": "phase-sensitivity", "seed": 34,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [1e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"start_hz": 0.4e6, "stop_hz": 1.6e6, "num": 7, "t_m_s": 1.0,
                    "n_realizations": 128},
        },
        "fig4c": {
            "schema": 1, "kind": "heterodyne", "seed": 43,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [1e6, 0.0, 0.0], "omega_s_hz": clock + 8e3, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"t_m_s": 10.0, "use_acf": True, "n_realizations": 128},
        },
        "fig4d": {
            "schema": 1, "kind": "snr-scaling", "seed": 44,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [1e6, 0.0, 0.0], "omega_s_hz": clock + 8e3, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"times_s": [0.5, 1.0, 2.0, 5.0, 10.0], "n_repeats": 4,
                    "n_realizations": 128},
        },
        "si-fig3": {
            "schema": 1, "kind": "resonances", "seed": 53,
            "drive": {"theta_m": 0.0},
            "signal": {"g_hz": [0.8e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "run": {"start_hz": 2.20e9, "stop_hz": 2.44e9, "num": 49,
                    "n_realizations": 64},
        },
        "si-fig6": {
            "schema": 1, "kind": "rabi", "seed": 56,
            "drive": {"theta_m": math.pi / 2},
            "signal": {"g_hz": [2e6, 0.0, 0.0], "omega_s_hz": clock, "phi_s": 0.0},
            "noise": base_noise, "readout": base_readout,
            "timing": {"T_MW_s": 125e-9, "T_rep_s": 2.5e-6},
            "run": {"t_max_s": 1e-6, "n_points": 1001, "n_realizations": 128},
        },
    }


# ---------------------------------------------------------------------------
# runners (one per kind); each returns {file name: writer callable}
# ---------------------------------------------------------------------------


def _grid_values(run: dict, key_list: str, key_start: str, key_stop: str, key_num: str):
    if key_list in run:
        vals = run[key_list]
        if not isinstance(vals, (list, tuple)) or len(vals) < 1:
            raise SchemaError(f"'{key_list}' must be a non-empty list")
        return np.asarray([float(v) for v in vals])
    for k in (key_start, key_stop, key_num):
        if k not in run:
            raise SchemaError(f"run section needs '{key_list}' or '{key_start}/{key_stop}/{key_num}'")
    num = run[key_num]
    if not isinstance(num, int) or num < 2:
        raise SchemaError(f"'{key_num}' must be an integer >= 2")
    return np.linspace(float(run[key_start]), float(run[key_stop]), num)


def _int(run: dict, key: str, default: int) -> int:
    v = run.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"'{key}' must be an integer")
    return v


def _opt_int(run: dict, key: str, default):
    if key in run and run[key] is None:
        return None
    if key not in run:
        return default
    return _int(run, key, default)


def run_kind_rabi(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(run, {"t_max_s", "n_points", "n_realizations", "sample_dt_s"}, "run")
    t_max = _num(run, "t_max_s", 4e-6)
    n_points = _int(run, "n_points", 2001)
    pulsewidths = np.linspace(0.0, t_max, n_points)
    sweep = run_rabi(
        ctx["drive"], ctx["signal"], ctx["noise"], ctx["readout"], pulsewidths,
        timing=ctx["timing"], n_realizations=_int(run, "n_realizations", 128),
        sample_dt=_num(run, "sample_dt_s", 1e-9),
    )
    spec = rabi_spectrum(sweep)
    ctx["payload"] = {"sweep": sweep, "spectrum": spec}
    return {
        "rabi_trace.csv": lambda p: sweep.to_csv(p, ctx["hash"]),
        "rabi_fft.csv": lambda p: _spectrum_csv(spec, p, ctx["hash"]),
    }


def _sweep_kind(ctx: dict, axis: str) -> dict:
    run = ctx["run"]
    _require_keys(
        run,
        {"values", "start_hz", "stop_hz", "start_rad", "stop_rad", "num",
         "n_realizations", "shots_per_repeat", "n_repeats"},
        "run",
    )
    if axis == "amplitude":
        values = _grid_values(run, "values", "start_hz", "stop_hz", "num")
    else:
        if "values" in run:
            values = _grid_values(run, "values", "start_rad", "stop_rad", "num")
        elif "start_rad" in run:
            values = _grid_values(run, "values", "start_rad", "stop_rad", "num")
        else:
            values = np.linspace(0.0, 2.0 * math.pi, _int(run, "num", 64), endpoint=False)
    sweep = run_fixed_point_sweep(
        ctx["drive"], ctx["signal"] or SignalConfig.off(), ctx["noise"], ctx["readout"],
        axis, values,
        n_repeats=_int(run, "n_repeats", 10),
        timing=ctx["timing"],
        n_realizations=_int(run, "n_realizations", 128),
        shots_per_repeat=_opt_int(run, "shots_per_repeat", 200_000),
        seed=ctx["seed"],
    )
    ctx["payload"] = {"sweep": sweep}
    name = "amp_sweep.csv" if axis == "amplitude" else "phase_sweep.csv"
    return {name: lambda p: sweep.to_csv(p, ctx["hash"])}


def run_kind_amp_sweep(ctx: dict) -> dict:
    return _sweep_kind(ctx, "amplitude")


def run_kind_phase_sweep(ctx: dict) -> dict:
    return _sweep_kind(ctx, "phase")


def run_kind_sensitivity(ctx: dict) -> dict:
    run = dict(ctx["run"])
    t_m = _num(run, "t_m_s", 1.0)
    run.pop("t_m_s", None)
    sub = dict(ctx)
    sub["run"] = run
    files = _sweep_kind(sub, "amplitude")
    sweep = sub["payload"]["sweep"]
    report = compute_sensitivity(sweep, t_m=t_m)
    ctx["payload"] = {"sweep": sweep, "report": report}
    files["sensitivity.json"] = lambda p: _write_json(report.as_dict(ctx["hash"]), p)
    return files


def run_kind_phase_sensitivity(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(
        run,
        {"amplitudes_hz", "start_hz", "stop_hz", "num", "t_m_s",
         "n_phases", "n_repeats", "n_realizations"},
        "run",
    )
    amps = _grid_values(run, "amplitudes_hz", "start_hz", "stop_hz", "num")
    curve = compute_phase_sensitivity_curve(
        ctx["drive"], ctx["noise"], ctx["readout"], amps,
        t_m=_num(run, "t_m_s", 1.0),
        signal_template=ctx["signal"],
        timing=ctx["timing"],
        n_phases=_int(run, "n_phases", 24),
        n_repeats=_int(run, "n_repeats", 10),
        n_realizations=_int(run, "n_realizations", 128),
        seed=ctx["seed"],
    )
    ctx["payload"] = {"curve": curve}
    best = {
        "best_amplitude_hz": curve.best_amplitude,
        "best_eta_phi_rad_per_sqrt_hz": curve.best_eta_phi,
        "config_hash": ctx["hash"],
    }
    return {
        "phase_sensitivity.csv": lambda p: curve.to_csv(p, ctx["hash"]),
        "phase_sensitivity.json": lambda p: _write_json(best, p),
    }


def run_kind_heterodyne(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(
        run,
        {"t_m_s", "phi0", "use_acf", "band_hz", "n_phi", "n_realizations",
         "emulate_wavegen"},
        "run",
    )
    if ctx["signal"] is None:
        raise SchemaError("heterodyne needs a signal section")
    use_acf = run.get("use_acf", True)
    if not isinstance(use_acf, bool):
        raise SchemaError("'use_acf' must be a boolean")
    emulate = run.get("emulate_wavegen", False)
    if not isinstance(emulate, bool):
        raise SchemaError("'emulate_wavegen' must be a boolean")
    trace = run_heterodyne(
        ctx["drive"], ctx["signal"], ctx["noise"], ctx["readout"], ctx["timing"],
        t_m=_num(run, "t_m_s", 10.0),
        phi0=_num(run, "phi0", 0.0),
        seed=ctx["seed"],
        n_phi=_int(run, "n_phi", 128),
        n_realizations=_int(run, "n_realizations", 128),
        emulate_wavegen=emulate,
        wavegen_spec=ctx["wavegen_spec"] if emulate else None,
    )
    spec = heterodyne_spectrum(trace, use_acf=use_acf)
    delta = float(ctx["signal"].omega_s) - clock_frequency_hz(ctx["drive"])
    f_tone = 2.0 * abs(delta)
    band = run.get("band_hz", [max(spec.df, f_tone - 2e3), f_tone + 2e3])
    if not (isinstance(band, (list, tuple)) and len(band) == 2):
        raise SchemaError("'band_hz' must be a [lo, hi] pair")
    fitted = dsp.fit_peak(spec, (float(band[0]), float(band[1])))
    ctx["payload"] = {"trace": trace, "spectrum": fitted, "band": band}
    return {
        "photon_trace.csv": lambda p: _trace_csv(trace, p, ctx["hash"]),
        "spectrum.csv": lambda p: _spectrum_csv(fitted, p, ctx["hash"]),
        "peak.json": lambda p: dsp.write_peak_json(fitted, p, ctx["hash"]),
    }


def run_kind_resonances(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(
        run, {"omega_s_hz", "start_hz", "stop_hz", "num", "n_realizations"}, "run"
    )
    freqs = _grid_values(run, "omega_s_hz", "start_hz", "stop_hz", "num")
    template = ctx["signal"] or SignalConfig(g=(0.8e6, 0.0, 0.0))
    n_real = _int(run, "n_realizations", 64)
    contrast = np.empty_like(freqs)
    std = np.empty_like(freqs)
    for i, f in enumerate(freqs):
        sig = SignalConfig(g=template.g, omega_s=float(f), phi_s=template.phi_s)
        one = run_fixed_point_sweep(
            ctx["drive"], sig, ctx["noise"], ctx["readout"], "amplitude",
            [template.amplitude], timing=ctx["timing"],
            n_realizations=n_real, shots_per_repeat=None, seed=ctx["seed"],
        )
        contrast[i] = one.contrast[0]
        std[i] = one.std[0]
    ctx["payload"] = {"freqs": freqs, "contrast": contrast, "std": std}
    return {"resonances.csv": lambda p: _columns_csv(
        p, ctx["hash"], ("omega_s_hz", freqs), ("contrast", contrast), ("std", std)
    )}


def run_kind_bloch(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(run, {"duration_s", "sample_dt_s"}, "run")
    duration = _num(run, "duration_s", 200e-9)
    sample_dt = _num(run, "sample_dt_s", 1e-9)
    drive = ctx["drive"]
    dt = 1.0 / (200.0 * float(drive.Omega))
    stride = max(1, int(round(sample_dt / dt)))
    n_steps = max(stride, int(math.ceil(duration / dt / stride)) * stride)
    grid = TimeGrid(dt=dt, n_steps=n_steps)
    model = rotating_frame_model(drive, ctx["signal"])
    vecs = propagate_batch([model], SIGMA0, grid, stride)[0]
    times = grid.sample_times(stride)
    zm = measured_z(times, vecs, drive)
    ctx["payload"] = {"times": times, "vectors": vecs, "z_meas": zm}
    return {"bloch.csv": lambda p: _columns_csv(
        p, ctx["hash"], ("t_s", times), ("sx", vecs[:, 0]), ("sy", vecs[:, 1]),
        ("sz", vecs[:, 2]), ("z_meas", zm),
    )}


def run_kind_snr_scaling(ctx: dict) -> dict:
    run = ctx["run"]
    _require_keys(run, {"times_s", "n_repeats", "n_realizations", "band_halfwidth_hz"}, "run")
    times = run.get("times_s", [0.5, 1.0, 2.0, 5.0, 10.0])
    if not (isinstance(times, (list, tuple)) and len(times) >= 4):
        raise SchemaError("'times_s' must be a list of >= 4 measurement times")
    if ctx["signal"] is None:
        raise SchemaError("snr-scaling needs a signal section")
    cache = PhaseResponseCache()
    common = dict(
        cache=cache, seed=ctx["seed"],
        band_halfwidth_hz=_num(run, "band_halfwidth_hz", 2e3),
        n_repeats=_int(run, "n_repeats", 4),
        n_realizations=_int(run, "n_realizations", 128),
    )
    pts = {}
    exponents = {}
    for label, use_acf in (("acf", True), ("direct", False)):
        p = snr_vs_time(
            ctx["drive"], ctx["signal"], ctx["noise"], ctx["readout"], ctx["timing"],
            times, use_acf=use_acf, **common,
        )
        pts[label] = p
        exponents[label] = dsp.snr_scaling_fit(p) if len(p) >= 4 else None
    ctx["payload"] = {"points": pts, "exponents": exponents}
    rows = [(label, t, s) for label in pts for t, s in pts[label]]
    report = {f"exponent_{k}": v for k, v in exponents.items()}
    report["config_hash"] = ctx["hash"]
    return {
        "snr_scaling.csv": lambda p: _columns_csv(
            p, ctx["hash"],
            ("mode", np.array([r[0] for r in rows])),
            ("t_m_s", np.array([r[1] for r in rows])),
            ("snr", np.array([r[2] for r in rows])),
        ),
        "snr_scaling.json": lambda p: _write_json(report, p),
    }


RUNNERS = {
    "rabi": run_kind_rabi,
    "amp-sweep": run_kind_amp_sweep,
    "phase-sweep": run_kind_phase_sweep,
    "sensitivity": run_kind_sensitivity,
    "phase-sensitivity": run_kind_phase_sensitivity,
    "heterodyne": run_kind_heterodyne,
    "resonances": run_kind_resonances,
    "bloch": run_kind_bloch,
    "snr-scaling": run_kind_snr_scaling,
}


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _write_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _columns_csv(path, hash_: str, *columns) -> None:
    names = [c[0] for c in columns]
    arrays = [c[1] for c in columns]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={hash_}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(
                v if isinstance(v, str) else f"{float(v):.12e}" for v in row
            ) + "\n")


def _spectrum_csv(spec: dsp.SpectrumResult, path, hash_: str) -> None:
    _columns_csv(path, hash_, ("freq_hz", spec.freqs), ("magnitude", spec.magnitude))


def _trace_csv(trace: dsp.PhotonTrace, path, hash_: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={hash_}\n")
        fh.write("index,t_s,photons\n")
        for i, (t, c) in enumerate(zip(trace.times, trace.counts)):
            fh.write(f"{i},{t:.9e},{int(c)}\n")


def _make_plots(kind: str, ctx: dict, outdir: Path) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = ctx["hash"]
    payload = ctx.get("payload", {})
    path = outdir / f"{kind.replace('-', '_')}.svg"

    if kind in ("rabi",):
        fig, axes = plt.subplots(2, 1, figsize=(7, 6))
        sweep, spec = payload["sweep"], payload["spectrum"]
        axes[0].plot(sweep.values * 1e6, sweep.contrast, lw=0.7)
        axes[0].set_xlabel("pulse width (us)")
        axes[0].set_ylabel("contrast")
        axes[1].plot(spec.freqs / 1e6, spec.magnitude, lw=0.7)
        axes[1].set_xlim(60, 140)
        axes[1].set_xlabel("frequency (MHz)")
        axes[1].set_ylabel("|FFT|")
    elif kind in ("amp-sweep", "sensitivity"):
        fig, ax = plt.subplots(figsize=(6, 4))
        sweep = payload["sweep"]
        ax.errorbar(sweep.values / 1e6, sweep.contrast, yerr=sweep.std, fmt="o-", ms=3)
        ax.set_xlabel("signal amplitude (MHz)")
        ax.set_ylabel("contrast")
    elif kind == "phase-sweep":
        fig, ax = plt.subplots(figsize=(6, 4))
        sweep = payload["sweep"]
        ax.errorbar(sweep.values, sweep.contrast, yerr=sweep.std, fmt="o-", ms=3)
        ax.set_xlabel("signal phase (rad)")
        ax.set_ylabel("contrast")
    elif kind == "phase-sensitivity":
        fig, ax = plt.subplots(figsize=(6, 4))
        curve = payload["curve"]
        ax.semilogy(curve.amplitudes / 1e6, curve.eta_phi, "o-")
        ax.set_xlabel("signal amplitude (MHz)")
        ax.set_ylabel("eta_phi (rad/sqrt(Hz))")
    elif kind == "heterodyne":
        fig, ax = plt.subplots(figsize=(6, 4))
        spec = payload["spectrum"]
        lo, hi = payload["band"]
        sel = (spec.freqs >= lo) & (spec.freqs <= hi)
        ax.plot(spec.freqs[sel], spec.magnitude[sel], lw=0.7)
        if spec.peak is not None and spec.peak.detected:
            ax.axvline(spec.peak.f0_hz, color="r", ls="--", lw=0.7)
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("|FFT|")
    elif kind == "resonances":
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.errorbar(payload["freqs"] / 1e9, payload["contrast"], yerr=payload["std"],
                    fmt="o-", ms=3)
        ax.set_xlabel("signal frequency (GHz)")
        ax.set_ylabel("contrast")
    elif kind == "bloch":
        fig, axes = plt.subplots(1, 3, figsize=(10, 3.4))
        v = payload["vectors"]
        for ax, (i, j, lx, ly) in zip(
            axes, ((0, 1, "sx", "sy"), (0, 2, "sx", "sz"), (1, 2, "sy", "sz"))
        ):
            ax.plot(v[:, i], v[:, j], lw=0.5)
            ax.set_xlabel(lx)
            ax.set_ylabel(ly)
            ax.set_xlim(-1.05, 1.05)
            ax.set_ylim(-1.05, 1.05)
            ax.set_aspect("equal")
    elif kind == "snr-scaling":
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, p in payload["points"].items():
            if p:
                t = [q[0] for q in p]
                s = [q[1] for q in p]
                ax.loglog(t, s, "o-", label=label)
        ax.set_xlabel("t_m (s)")
        ax.set_ylabel("SNR")
        ax.legend()
    else:
        return []
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return [path.name]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _versions() -> dict:
    import numpy
    import scipy

    versions = {"ccdd_sense": __version__, "numpy": numpy.__version__,
                "scipy": scipy.__version__}
    try:
        import numba

        versions["numba"] = numba.__version__
    except ImportError:
        pass
    return versions


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise SchemaError("--threads must be >= 1")
    if backend() == "numba":
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccdd-sense",
        description="Reproducible experiment runs for a continuously decoupled spin sensor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a '{kind}' experiment")
        p.add_argument("--config", type=str, help="JSON config path")
        p.add_argument("--preset", type=str, help="named preset instead of --config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int, help="cap worker threads")
        p.add_argument("--plots", action="store_true", help="emit SVG plots")
        p.add_argument("--out", type=str, help="output directory")
    lister = sub.add_parser("presets", help="list or write the named presets")
    lister.add_argument("--write", type=str, help="write preset JSON files to this directory")
    return parser


def _resolve_raw_config(args) -> dict:
    if (args.config is None) == (args.preset is None):
        raise SchemaError("provide exactly one of --config or --preset")
    if args.preset is not None:
        table = presets()
        if args.preset not in table:
            raise SchemaError(f"unknown preset {args.preset!r}; options: {sorted(table)}")
        return json.loads(json.dumps(table[args.preset]))
    path = Path(args.config)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc


def _run(args) -> int:
    t_start = time.time()
    raw = _resolve_raw_config(args)
    eff = load_config(raw)
    if eff["kind"] != args.command:
        raise SchemaError(f"config kind {eff['kind']!r} does not match command {args.command!r}")
    if args.seed is not None:
        eff["seed"] = args.seed
    out = args.out or os.environ.get("CCDD_SENSE_OUT") or eff["out"]
    eff["out"] = out
    _apply_threads(args.threads)

    hash_ = config_hash(eff)
    ctx = {
        "run": eff["run"],
        "seed": eff["seed"],
        "hash": hash_,
        "drive": build_drive(eff["drive"]),
        "signal": build_signal(eff["signal"]),
        "noise": build_noise(eff["noise"]),
        "readout": build_readout(eff["readout"]),
        "wavegen_spec": build_wavegen(eff["wavegen"]),
    }
    ctx["timing"] = build_timing(eff["timing"], ctx["drive"])

    files = RUNNERS[eff["kind"]](ctx)

    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, writer in files.items():
        writer(outdir / name)
        written.append(name)
    if args.plots:
        written.extend(_make_plots(eff["kind"], ctx, outdir))

    manifest = {
        "kind": eff["kind"],
        "config_hash": hash_,
        "seed": eff["seed"],
        "backend": backend(),
        "versions": _versions(),
        "wall_time_s": round(time.time() - t_start, 3),
        "outputs": sorted(written),
    }
    _write_json(manifest, outdir / "manifest.json")
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


def _run_presets(args) -> int:
    table = presets()
    if args.write:
        outdir = Path(args.write)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, cfg in table.items():
            _write_json(cfg, outdir / f"{name}.json")
    for name, cfg in table.items():
        print(f"{name}\t{cfg['kind']}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            return _run_presets(args)
        return _run(args)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsValidationError as exc:
        print(f"physics validation: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001  - boundary of the process
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
