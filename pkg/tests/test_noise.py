"""Disorder sampling, ensemble averaging and T1 decay."""

import math

import numpy as np
import pytest

from ccdd_sense import (
    CALIBRATED_BARE_RABI_HZ,
    CALIBRATED_DRIVE_FRAC_SIGMA,
    ConfigError,
    NoiseConfig,
    apply_t1_decay,
    ensemble_average,
    sample_realization,
    sample_realizations,
)


def test_calibrated_constants_frozen():
    # regression pins for the shipped calibration
    assert CALIBRATED_DRIVE_FRAC_SIGMA == 0.085
    assert CALIBRATED_BARE_RABI_HZ == 100e6


def test_config_defaults_and_validation():
    cfg = NoiseConfig()
    assert cfg.T2star == 60e-9
    assert cfg.drive_frac_sigma == CALIBRATED_DRIVE_FRAC_SIGMA
    assert cfg.T1 == 10e-6
    with pytest.raises(ConfigError):
        NoiseConfig(T2star=0.0)
    with pytest.raises(ConfigError):
        NoiseConfig(T1=-1e-6)
    with pytest.raises(ConfigError):
        NoiseConfig(drive_frac_sigma=0.1)  # upper bound is exclusive
    with pytest.raises(ConfigError):
        NoiseConfig(drive_frac_sigma=-0.01)


def test_sigma_detuning_from_t2star():
    cfg = NoiseConfig(T2star=60e-9)
    assert math.isclose(cfg.sigma_detuning_hz, math.sqrt(2) / (2 * math.pi * 60e-9), rel_tol=1e-12)
    off = NoiseConfig.off()
    assert off.sigma_detuning_hz == 0.0
    assert off.drive_frac_sigma == 0.0
    assert math.isinf(off.T1)


def test_sampling_is_deterministic_per_index():
    cfg = NoiseConfig(seed=123)
    a = sample_realization(cfg, 7)
    b = sample_realization(cfg, 7)
    c = sample_realization(cfg, 8)
    assert a == b
    assert a != c
    assert sample_realizations(cfg, 3, start=5)[2] == sample_realization(cfg, 7)


def test_realization_moments():
    cfg = NoiseConfig(seed=2024)
    reals = sample_realizations(cfg, 20000)
    det = np.array([r.detuning for r in reals])
    scale = np.array([r.drive_scale for r in reals])
    sigma = cfg.sigma_detuning_hz
    assert abs(det.mean()) < 4 * sigma / math.sqrt(det.size)
    assert abs(det.std() / sigma - 1) < 0.03
    assert abs(scale.mean() - 1) < 4 * cfg.drive_frac_sigma / math.sqrt(scale.size)
    assert abs(scale.std() / cfg.drive_frac_sigma - 1) < 0.03
    assert np.all(scale > 0)


def test_ensemble_average_matches_manual_loop():
    cfg = NoiseConfig(seed=9)

    def fn(r):
        return np.array([r.detuning, r.drive_scale])

    res = ensemble_average(fn, cfg, 50)
    manual = np.mean([fn(sample_realization(cfg, i)) for i in range(50)], axis=0)
    np.testing.assert_allclose(res.mean, manual, rtol=1e-12)
    assert res.n_realizations == 50
    assert np.all(res.stderr > 0)
    single = ensemble_average(fn, cfg, 1)
    np.testing.assert_allclose(single.stderr, 0.0)
    with pytest.raises(ConfigError):
        ensemble_average(fn, cfg, 0)


def test_apply_t1_decay():
    cfg = NoiseConfig(T1=10e-6)
    assert math.isclose(apply_t1_decay(2.0, 10e-6, cfg), 2.0 / math.e, rel_tol=1e-12)
    assert apply_t1_decay(2.0, 0.0, cfg) == 2.0
    off = NoiseConfig.off()
    assert apply_t1_decay(5.0, 1.0, off) == 5.0  # infinite T1 is a no-op
    with pytest.raises(ConfigError):
        apply_t1_decay(1.0, -1e-9, cfg)
