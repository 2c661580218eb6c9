"""Spectra, autocorrelation and peak fitting on synthetic inputs."""

import json
import math

import numpy as np
import pytest

from ccdd_sense import ConfigError, PhotonTrace, gate_and_bin
from ccdd_sense.dsp import (
    autocorrelate,
    fit_peak,
    peak_report,
    snr_scaling_fit,
    spectrum,
    write_peak_json,
    write_spectrum_csv,
)


def test_photon_trace_validation():
    tr = PhotonTrace(counts=np.array([1, 2, 3]), dt=5e-6)
    np.testing.assert_allclose(tr.times, [0.0, 5e-6, 10e-6])
    assert math.isclose(tr.duration, 15e-6)
    with pytest.raises(ConfigError):
        PhotonTrace(counts=np.array([1]), dt=5e-6)
    with pytest.raises(ConfigError):
        PhotonTrace(counts=np.array([1, -1]), dt=5e-6)
    with pytest.raises(ConfigError):
        PhotonTrace(counts=np.array([1, 2]), dt=0.0)


def test_gate_and_bin():
    period = 1.0 / 400e3
    # two photons in the gate of rep 0, one outside, one in the gate of rep 2
    tags = np.sort(np.array([0.1e-6, 0.3e-6, 1.2e-6, 2 * period + 0.2e-6]))
    tr = gate_and_bin(tags, gate=0.35e-6)
    assert tr.counts.tolist() == [2, 0, 1]
    assert math.isclose(tr.dt, period)
    with pytest.raises(ConfigError):
        gate_and_bin(tags[::-1], gate=0.35e-6)


def test_spectrum_cosine_normalization():
    # on-grid cosine of amplitude A lands A/2 in its bin
    n, dt = 4096, 5e-6
    t = dt * np.arange(n)
    f0 = 40 * (1 / (n * dt))
    x = 0.6 * np.cos(2 * np.pi * f0 * t)
    spec = spectrum(x, dt)
    k = int(round(f0 / spec.df))
    assert math.isclose(spec.freqs[k], f0, rel_tol=1e-12)
    assert math.isclose(spec.magnitude[k], 0.3, rel_tol=1e-9)
    others = np.delete(spec.magnitude, k)
    assert np.max(others) < 1e-12
    with pytest.raises(ConfigError):
        spectrum(x, 0.0)


def test_autocorrelate_matches_definition():
    rng = np.random.default_rng(31)
    x = rng.normal(size=257)
    acf = autocorrelate(x)
    xc = x - x.mean()
    manual = np.array([np.dot(xc[: x.size - k], xc[k:]) for k in range(x.size)]) / x.size
    np.testing.assert_allclose(acf, manual, atol=1e-10)
    with pytest.raises(ConfigError):
        autocorrelate([1.0])


def test_fit_peak_recovers_tone():
    rng = np.random.default_rng(32)
    n, dt = 8192, 5e-6
    t = dt * np.arange(n)
    f0 = 16e3
    x = 0.5 * np.cos(2 * np.pi * f0 * t) + rng.normal(0, 0.5, n)
    spec = fit_peak(spectrum(x, dt), (10e3, 22e3))
    assert spec.peak is not None and spec.peak.detected
    assert abs(spec.peak.f0_hz - f0) < spec.df
    assert spec.peak.snr > 10
    assert spec.baseline_std > 0
    rep = peak_report(spec, config_hash="ff")
    assert rep["config_hash"] == "ff"
    assert rep["method"].startswith("gaussian")


def test_fit_peak_flags_noise_only_band():
    # detection threshold is per-bin prominence, so the max over a wide band
    # of pure noise can legitimately cross it; keep the band to ~60 bins and
    # pin a draw whose max sits well below 3 sigma
    rng = np.random.default_rng(23)
    n, dt = 1024, 5e-6
    x = rng.normal(0, 1.0, n)
    spec = fit_peak(spectrum(x, dt), (10e3, 22e3))
    assert spec.peak is not None
    assert not spec.peak.detected
    assert spec.peak.method == "not-detected"
    assert spec.peak.snr < 3.0
    assert math.isnan(spec.peak.fwhm_hz)


def test_fit_peak_band_validation():
    spec = spectrum(np.ones(64), 1e-3)
    with pytest.raises(ConfigError):
        fit_peak(spec, (1e6, 2e6))  # outside the spectrum
    with pytest.raises(ConfigError):
        fit_peak(spec, (0.0, 2 * spec.df))  # too narrow for a baseline


def test_snr_scaling_fit_exact_power_law():
    t = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
    pts = list(zip(t, 3.7 * t**0.5))
    assert math.isclose(snr_scaling_fit(pts), 0.5, abs_tol=1e-12)
    with pytest.raises(ConfigError):
        snr_scaling_fit(pts[:3])
    with pytest.raises(ConfigError):
        snr_scaling_fit([(1.0, 1.0), (2.0, 1.4), (3.0, 1.7), (4.0, 2.0)])  # < 1 decade
    with pytest.raises(ConfigError):
        snr_scaling_fit([(0.5, -1.0), (1.0, 1.0), (2.0, 1.0), (10.0, 1.0)])


def test_spectrum_and_peak_io(tmp_path):
    n, dt = 4096, 5e-6
    t = dt * np.arange(n)
    x = np.cos(2 * np.pi * 16e3 * t)
    spec = fit_peak(spectrum(x, dt), (10e3, 22e3))
    csv_path = tmp_path / "spec.csv"
    write_spectrum_csv(spec, csv_path, config_hash="aa")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# config_hash=aa"
    assert len(lines) == spec.freqs.size + 2
    json_path = tmp_path / "peak.json"
    write_peak_json(spec, json_path, config_hash="aa")
    rep = json.loads(json_path.read_text())
    assert rep["f0_hz"] == pytest.approx(16e3, abs=spec.df)
    with pytest.raises(ConfigError):
        peak_report(spectrum(x, dt))  # no fitted peak yet
