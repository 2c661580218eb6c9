"""Spin-to-photon mapping and the two contrast estimators.

The photoluminescence level is linear in the spin z-projection with
modulation depth kappa around the sz = 0 reference.  Longitudinal decay
multiplies the whole level (common-mode brightness loss with pulse
length), which is exactly what the delta-T referenced estimator rejects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseConfig, apply_t1_decay
from .spincore import ConfigError, EstimatorUndefined

SZ_TOL = 1e-6

# Frozen by scripts/calibrate_readout.py: the modulation depth placing the
# full-pipeline amplitude and phase sensitivities inside their benchmark
# windows at the frozen drive noise.  The default 0.02 below is the raw
# order-of-magnitude value; sensitivity-grade runs pass this one instead.
CALIBRATED_CONTRAST_KAPPA = 0.1


@dataclass(frozen=True)
class ReadoutConfig:
    """Optical readout parameters.

    mean_photons: expected photons per gated readout at sz = 0;
    contrast_kappa: PL modulation depth (calibration-grade, not measured);
    gate and laser_init: gate window and init pulse lengths.
    """

    mean_photons: float = 1.8
    contrast_kappa: float = 0.02
    gate: float = 350e-9
    laser_init: float = 2e-6

    def __post_init__(self):
        if not (self.mean_photons > 0 and math.isfinite(self.mean_photons)):
            raise ConfigError("mean_photons must be positive")
        if not 0.0 < self.contrast_kappa < 1.0:
            raise ConfigError("contrast_kappa must lie in (0, 1)")
        if not (0 < self.gate <= self.laser_init):
            raise ConfigError("need 0 < gate <= laser_init")


@dataclass(frozen=True)
class ReadoutOutcome:
    photons: int
    timestamp: float

    def __post_init__(self):
        if self.photons < 0:
            raise ConfigError("photons must be >= 0")


def pl_rate(sz, cfg: ReadoutConfig):
    """Expected photon number for a spin z-projection (scalar or array)."""
    arr = np.asarray(sz, dtype=np.float64)
    if np.any(np.abs(arr) > 1.0 + SZ_TOL):
        raise ConfigError("sz out of [-1, 1]")
    lam = np.maximum(cfg.mean_photons * (1.0 + cfg.contrast_kappa * arr), 0.0)
    return float(lam) if np.isscalar(sz) or arr.ndim == 0 else lam


def expected_photons(sz, pulse_length: float, readout: ReadoutConfig, noise: NoiseConfig):
    """PL level after a drive pulse: linear spin response times T1 loss."""
    return apply_t1_decay(pl_rate(sz, readout), pulse_length, noise)


def sample_photons(lam, rng: np.random.Generator):
    """Poisson photon count(s) for expected level(s) lam."""
    arr = np.asarray(lam, dtype=np.float64)
    if np.any(arr < 0):
        raise ConfigError("lam must be >= 0")
    out = rng.poisson(arr)
    return int(out) if arr.ndim == 0 else out


def sample_mean_photons(lam, n_shots: int, rng: np.random.Generator):
    """Mean of n_shots Poisson draws at level lam, sampled exactly.

    The sum of n i.i.d. Poisson(lam) counts is Poisson(n*lam), so one draw
    suffices regardless of n_shots.
    """
    if n_shots < 1:
        raise ConfigError("n_shots must be >= 1")
    arr = np.asarray(lam, dtype=np.float64)
    if np.any(arr < 0):
        raise ConfigError("lam must be >= 0")
    out = rng.poisson(arr * n_shots) / n_shots
    return float(out) if arr.ndim == 0 else out


def contrast_delta_t(p_t: float, p_tdt: float) -> float:
    """Referenced contrast (P_T - P_{T+dT}) / P_{T+dT}."""
    if p_tdt <= 0:
        raise EstimatorUndefined("reference level P_{T+dT} collected no photons")
    return (p_t - p_tdt) / p_tdt


def contrast_zero(p_t: float, p_0: float) -> float:
    """Drive-off referenced contrast (P_T - P_0) / P_0."""
    if p_0 <= 0:
        raise EstimatorUndefined("reference level P_0 collected no photons")
    return (p_t - p_0) / p_0


def write_photon_csv(path, times, counts, config_hash: str | None = None) -> None:
    times = np.asarray(times)
    counts = np.asarray(counts)
    if times.shape != counts.shape:
        raise ConfigError("times and counts length mismatch")
    with open(path, "w", encoding="utf-8") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("index,t_s,photons\n")
        for i, (t, c) in enumerate(zip(times, counts)):
            fh.write(f"{i},{t:.9e},{int(c)}\n")
