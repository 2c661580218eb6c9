"""Experiment runners: Rabi sweeps, fixed-point sweeps, sensitivity, heterodyne.

Every runner follows the same pattern: build one rotating-frame field
model per disorder realization, propagate the whole batch in a single
kernel call, reconstruct the measured z-projection, then push the
ensemble mean through the readout model.  The heterodyne runner replaces
per-shot dynamics with a precomputed phase-response lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dsp
from .dynamics import (
    TimeGrid,
    measured_z,
    propagate_batch,
    rotating_frame_model,
)
from .noise import NoiseConfig, sample_realizations
from .readout import ReadoutConfig, contrast_delta_t, contrast_zero, expected_photons
from .spincore import (
    ConfigError,
    DriveConfig,
    EstimatorUndefined,
    NyquistError,
    SignalConfig,
    TimingError,
    TWO_PI,
)

SIGMA0 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SequenceTiming:
    """Pulse-train timing: drive window, reference offset, repetition."""

    T_MW: float = 950e-9
    delta_T: float = 5e-9
    T_rep: float = 5e-6

    def __post_init__(self):
        if not (self.T_MW > 0 and self.delta_T > 0 and self.T_rep > 0):
            raise ConfigError("all timing fields must be positive")

    @classmethod
    def for_drive(cls, drive: DriveConfig, T_MW: float = 950e-9, T_rep: float = 5e-6):
        """Reference offset pinned to half a modulation period (T1-cancel)."""
        return cls(T_MW=T_MW, delta_T=math.pi / drive.omega_m.angular, T_rep=T_rep)

    def validate(self, readout: ReadoutConfig) -> None:
        if self.T_MW + self.delta_T + readout.laser_init > self.T_rep:
            raise TimingError(
                f"T_MW + delta_T + laser_init = "
                f"{self.T_MW + self.delta_T + readout.laser_init:.3e} s "
                f"exceeds T_rep = {self.T_rep:.3e} s"
            )

    def idle(self, readout: ReadoutConfig) -> float:
        return self.T_rep - self.T_MW - self.delta_T - readout.laser_init


@dataclass
class SweepResult:
    """One swept axis with per-point contrast statistics."""

    axis: str
    values: np.ndarray
    contrast: np.ndarray
    std: np.ndarray
    n_repeats: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.contrast = np.asarray(self.contrast, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if not (self.values.shape == self.contrast.shape == self.std.shape):
            raise ConfigError("sweep arrays must share a shape")
        if np.any(self.std < 0):
            raise ConfigError("std must be >= 0")

    def to_csv(self, path, config_hash: str | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if config_hash is not None:
                fh.write(f"# config_hash={config_hash}\n")
            fh.write(f"{self.axis},contrast,std\n")
            for v, c, s in zip(self.values, self.contrast, self.std):
                fh.write(f"{v:.9e},{c:.12e},{s:.12e}\n")


@dataclass
class SensitivityReport:
    eta: float
    eta_phi: float | None
    slope: float
    noise_level: float
    t_m: float
    fit_points: int

    def as_dict(self, config_hash: str | None = None) -> dict:
        d = {
            "eta_t_per_sqrt_hz": self.eta,
            "eta_phi_rad_per_sqrt_hz": self.eta_phi,
            "slope_per_hz": self.slope,
            "noise_level": self.noise_level,
            "t_m_s": self.t_m,
            "fit_points": self.fit_points,
        }
        if config_hash is not None:
            d["config_hash"] = config_hash
        return d


def _ensemble_zmeas(
    drive: DriveConfig,
    signal: SignalConfig | None,
    noise_cfg: NoiseConfig,
    grid: TimeGrid,
    stride: int,
    n_realizations: int,
    phases: np.ndarray | None = None,
):
    """Mean measured-z timeline over the disorder ensemble.

    With `phases`, one row per (phase, realization) pair is propagated and
    the mean is taken per phase: returns (n_phases, K).  Otherwise (K,)
    plus the standard error.
    """
    reals = sample_realizations(noise_cfg, n_realizations)
    sig = signal or SignalConfig.off()
    models = []
    if phases is None:
        for r in reals:
            models.append(
                rotating_frame_model(drive, sig, detuning_hz=r.detuning, drive_scale=r.drive_scale)
            )
    else:
        for phi in phases:
            sig_p = sig.with_phase(float(phi))
            for r in reals:
                models.append(
                    rotating_frame_model(drive, sig_p, detuning_hz=r.detuning, drive_scale=r.drive_scale)
                )
    vecs = propagate_batch(models, SIGMA0, grid, stride)
    times = grid.sample_times(stride)
    z = np.empty((len(models), times.size))
    for i in range(len(models)):
        z[i] = measured_z(times, vecs[i], drive)
    if phases is None:
        mean = z.mean(axis=0)
        stderr = z.std(axis=0, ddof=1) / math.sqrt(n_realizations) if n_realizations > 1 else np.zeros_like(mean)
        return times, mean, stderr
    z = z.reshape(len(phases), n_realizations, times.size)
    return times, z.mean(axis=1), None


def _interp(times: np.ndarray, trace: np.ndarray, t: np.ndarray) -> np.ndarray:
    if np.any(t < times[0] - 1e-15) or np.any(t > times[-1] + 1e-15):
        raise ConfigError("requested time outside the simulated record")
    return np.interp(t, times, trace)


def run_rabi(
    drive: DriveConfig,
    signal: SignalConfig | None,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    pulsewidths,
    timing: SequenceTiming | None = None,
    n_realizations: int = 128,
    sample_dt: float = 1e-9,
) -> SweepResult:
    """Referenced-contrast Rabi trace C_dT over the given pulsewidths."""
    pw = np.asarray(pulsewidths, dtype=np.float64)
    if pw.size == 0:
        return SweepResult("T_s", pw, pw.copy(), pw.copy(), n_realizations)
    if np.any(np.diff(pw) < 0) or pw[0] < 0:
        raise ConfigError("pulsewidths must be sorted and non-negative")
    timing = timing or SequenceTiming.for_drive(drive)
    timing.validate(readout)
    if pw[-1] + timing.delta_T > timing.T_rep:
        raise TimingError("longest pulse exceeds the repetition window")

    dt = 1.0 / (200.0 * float(drive.Omega))
    stride = max(1, int(round(sample_dt / dt)))
    n_steps = int(math.ceil((pw[-1] + timing.delta_T) / (dt * stride))) * stride + stride
    grid = TimeGrid(dt=dt, n_steps=n_steps)
    times, zbar, zerr = _ensemble_zmeas(drive, signal, noise_cfg, grid, stride, n_realizations)

    z_t = _interp(times, zbar, pw)
    z_tdt = _interp(times, zbar, pw + timing.delta_T)
    e_t = _interp(times, zerr, pw)
    e_tdt = _interp(times, zerr, pw + timing.delta_T)

    contrast = np.empty_like(pw)
    std = np.empty_like(pw)
    kappa = readout.contrast_kappa
    for i in range(pw.size):
        p_t = expected_photons(z_t[i], pw[i], readout, noise_cfg)
        p_tdt = expected_photons(z_tdt[i], pw[i] + timing.delta_T, readout, noise_cfg)
        contrast[i] = contrast_delta_t(p_t, p_tdt)
        # ensemble standard error propagated through the linear PL model
        std[i] = kappa * math.hypot(e_t[i], e_tdt[i])
    return SweepResult("T_s", pw, contrast, std, n_realizations)


def rabi_spectrum(result: SweepResult) -> dsp.SpectrumResult:
    """FFT of a uniformly sampled Rabi trace."""
    dts = np.diff(result.values)
    if dts.size < 2 or not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
        raise ConfigError("spectrum needs a uniform pulsewidth grid")
    x = result.contrast - result.contrast.mean()
    return dsp.spectrum(x, float(dts[0]))


def find_fixed_point(
    drive: DriveConfig,
    signal: SignalConfig | None,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    near: float = 950e-9,
    window: float = 12e-9,
    n_realizations: int = 64,
) -> float:
    """Contrast antinode of the CCDD Rabi trace nearest `near`."""
    dt = 1.0 / (200.0 * float(drive.Omega))
    n_steps = int(math.ceil((near + window) / dt))
    grid = TimeGrid(dt=dt, n_steps=n_steps)
    times, zbar, _ = _ensemble_zmeas(drive, signal, noise_cfg, grid, 1, n_realizations)
    sel = times >= near - window
    k = int(np.argmin(zbar[sel]))  # deepest contrast against the sz=+1 reference
    return float(times[sel][k])


def _contrast_zero_point(
    drive, signal, noise_cfg, readout, timing, n_realizations
) -> tuple[float, float]:
    """Expected C_0 and its ensemble stderr at T_MW."""
    dt = 1.0 / (200.0 * float(drive.Omega))
    n_steps = max(1, int(round(timing.T_MW / dt)))
    grid = TimeGrid(dt=dt, n_steps=n_steps)
    times, zbar, zerr = _ensemble_zmeas(
        drive, signal, noise_cfg, grid, n_steps, n_realizations
    )
    z_T = float(zbar[-1])
    p_t = expected_photons(z_T, timing.T_MW, readout, noise_cfg)
    p_0 = expected_photons(1.0, timing.T_MW, readout, noise_cfg)
    c = contrast_zero(p_t, p_0)
    dc = readout.contrast_kappa * float(zerr[-1]) / (1.0 + readout.contrast_kappa)
    return c, dc


def _shot_sampled_contrast(
    lam_t: float, lam_0: float, n_shots: int, rng: np.random.Generator
) -> float:
    p_t = rng.poisson(lam_t * n_shots) / n_shots
    p_0 = rng.poisson(lam_0 * n_shots) / n_shots
    return contrast_zero(p_t, p_0)


def run_fixed_point_sweep(
    drive: DriveConfig,
    signal_template: SignalConfig,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    axis: str,
    values,
    n_repeats: int = 10,
    timing: SequenceTiming | None = None,
    n_realizations: int = 128,
    shots_per_repeat: int | None = 200_000,
    seed: int = 0xC0,
) -> SweepResult:
    """C_0 vs signal amplitude or phase at a fixed pulsewidth.

    Each repeat draws shots_per_repeat Poisson readout pairs, so the
    per-point std is the shot-noise level of one t_m = shots * T_rep
    measurement, with ensemble (disorder) spread entering via the mean.
    shots_per_repeat=None skips shot sampling and returns the expected
    contrast with the ensemble standard error in the std column.
    """
    if axis not in ("amplitude", "phase"):
        raise ConfigError("axis must be 'amplitude' or 'phase'")
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        return SweepResult(_AXIS_COLUMNS[axis], vals, vals.copy(), vals.copy(), n_repeats)
    if n_repeats < 1 or (shots_per_repeat is not None and shots_per_repeat < 1):
        raise ConfigError("n_repeats and shots_per_repeat must be >= 1")
    timing = timing or SequenceTiming.for_drive(drive)
    timing.validate(readout)

    contrast = np.empty_like(vals)
    std = np.empty_like(vals)
    p_0 = expected_photons(1.0, timing.T_MW, readout, noise_cfg)
    for j, v in enumerate(vals):
        if axis == "amplitude":
            sig = signal_template.with_amplitude_x(float(v))
        else:
            sig = signal_template.with_phase(float(v))
        c_exp, c_err = _contrast_zero_point(drive, sig, noise_cfg, readout, timing, n_realizations)
        if shots_per_repeat is None:
            contrast[j] = c_exp
            std[j] = c_err
            continue
        lam_t = p_0 * (1.0 + c_exp)
        draws = np.empty(n_repeats)
        for r in range(n_repeats):
            rng = np.random.default_rng([seed, 0x5EEb, j, r])
            draws[r] = _shot_sampled_contrast(lam_t, p_0, shots_per_repeat, rng)
        contrast[j] = draws.mean()
        std[j] = draws.std(ddof=1) if n_repeats > 1 else 0.0
    return SweepResult(_AXIS_COLUMNS[axis], vals, contrast, std, n_repeats)


_AXIS_COLUMNS = {"amplitude": "g_hz", "phase": "phi_s_rad"}


def _linear_region(values: np.ndarray, contrast: np.ndarray) -> int:
    """Index one past the quasi-linear region: first extremum of the response.

    The extremum is located as the peak of the cumulative response
    |C - C[0]| after light box smoothing, which is where the discrete
    derivative first changes sign in the underlying trend; a noise
    wiggle near zero response cannot fake it.
    """
    c = contrast
    if c.size >= 5:
        c = np.convolve(c, np.ones(3) / 3.0, mode="same")
        c[0], c[-1] = contrast[0], contrast[-1]
    k = int(np.argmax(np.abs(c - c[0])))
    return max(3, k + 1)


def compute_sensitivity(sweep: SweepResult, t_m: float, gamma_hz_per_t: float = 28.025e9) -> SensitivityReport:
    """Amplitude sensitivity from the quasi-linear region of a sweep."""
    if t_m <= 0:
        raise ConfigError("t_m must be positive")
    good = np.isfinite(sweep.std) & np.isfinite(sweep.contrast)
    if good.sum() < 3:
        raise ConfigError("need >= 3 finite sweep points")
    vals, con, std = sweep.values[good], sweep.contrast[good], sweep.std[good]
    end = max(3, _linear_region(vals, con))
    vals, con, std = vals[:end], con[:end], std[:end]
    slope = float(np.polyfit(vals, con, 1)[0])
    noise = float(np.mean(std))
    if slope == 0.0 or not math.isfinite(slope):
        raise EstimatorUndefined("degenerate fit: zero contrast slope")
    eta_hz = noise / abs(slope) * math.sqrt(t_m)
    if sweep.axis == "phi_s_rad":
        return SensitivityReport(
            eta=math.inf, eta_phi=eta_hz, slope=slope, noise_level=noise,
            t_m=t_m, fit_points=int(end),
        )
    return SensitivityReport(
        eta=eta_hz / gamma_hz_per_t, eta_phi=None, slope=slope, noise_level=noise,
        t_m=t_m, fit_points=int(end),
    )


def phase_slope_sensitivity(sweep: SweepResult, t_m: float) -> SensitivityReport:
    """Phase sensitivity from the steepest point of a phase sweep."""
    if sweep.axis != "phi_s_rad":
        raise ConfigError("needs a phase sweep")
    if t_m <= 0:
        raise ConfigError("t_m must be positive")
    if sweep.values.size < 5:
        raise ConfigError("need >= 5 phase points")
    d = np.gradient(sweep.contrast, sweep.values)
    if d.size >= 3:
        d = np.convolve(d, np.ones(3) / 3.0, mode="same")
    slope = float(np.max(np.abs(d)))
    noise = float(np.mean(sweep.std))
    if slope == 0.0:
        raise EstimatorUndefined("degenerate fit: flat phase response")
    return SensitivityReport(
        eta=math.inf, eta_phi=noise / slope * math.sqrt(t_m), slope=slope,
        noise_level=noise, t_m=t_m, fit_points=int(sweep.values.size),
    )


@dataclass
class PhaseSensitivityCurve:
    amplitudes: np.ndarray
    eta_phi: np.ndarray
    best_amplitude: float
    best_eta_phi: float

    def to_csv(self, path, config_hash: str | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if config_hash is not None:
                fh.write(f"# config_hash={config_hash}\n")
            fh.write("g_hz,eta_phi_rad_per_sqrt_hz\n")
            for g, e in zip(self.amplitudes, self.eta_phi):
                fh.write(f"{g:.9e},{e:.12e}\n")


def compute_phase_sensitivity_curve(
    drive: DriveConfig,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    amplitudes,
    t_m: float,
    signal_template: SignalConfig | None = None,
    timing: SequenceTiming | None = None,
    n_phases: int = 24,
    n_repeats: int = 10,
    n_realizations: int = 128,
    seed: int = 0xC1,
) -> PhaseSensitivityCurve:
    """Phase sensitivity vs signal amplitude; reports the minimizing point."""
    amps = np.asarray(amplitudes, dtype=np.float64)
    if amps.size == 0:
        raise ConfigError("need at least one amplitude")
    template = signal_template or SignalConfig(g=(0.0, 0.0, 0.0), omega_s=2.31e9, phi_s=0.0)
    timing = timing or SequenceTiming.for_drive(drive)
    shots = max(1, int(round(t_m / timing.T_rep)))
    phases = np.linspace(0.0, math.pi, n_phases)  # response has period pi
    etas = np.empty_like(amps)
    for i, g in enumerate(amps):
        sweep = run_fixed_point_sweep(
            drive, template.with_amplitude_x(float(g)), noise_cfg, readout,
            "phase", phases, n_repeats=n_repeats, timing=timing,
            n_realizations=n_realizations, shots_per_repeat=shots,
            seed=seed + i,
        )
        try:
            etas[i] = phase_slope_sensitivity(sweep, t_m).eta_phi
        except EstimatorUndefined:
            etas[i] = math.inf
    best = int(np.argmin(etas))
    return PhaseSensitivityCurve(
        amplitudes=amps, eta_phi=etas,
        best_amplitude=float(amps[best]), best_eta_phi=float(etas[best]),
    )


# ---------------------------------------------------------------------------
# heterodyne
# ---------------------------------------------------------------------------


@dataclass
class PhaseResponse:
    """Ensemble-averaged spin response on a uniform phase grid over [0, 2pi)."""

    phis: np.ndarray
    zbar: np.ndarray
    contrast: np.ndarray

    def lookup_z(self, phi: np.ndarray) -> np.ndarray:
        """Periodic linear interpolation of zbar."""
        wrapped = np.mod(phi, TWO_PI)
        phis = np.append(self.phis, TWO_PI)
        vals = np.append(self.zbar, self.zbar[0])
        return np.interp(wrapped, phis, vals)


def clock_frequency_hz(drive: DriveConfig) -> float:
    """Sensor clock: the targeted resonance at omega0 - epsilon_m."""
    return float(drive.omega0) - float(drive.epsilon_m)


def phase_response_curve(
    drive: DriveConfig,
    signal_amp_hz: float,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    T_MW: float,
    n_phi: int = 128,
    n_realizations: int = 128,
) -> PhaseResponse:
    """Expected C_0 versus signal phase at the clock frequency."""
    if n_phi < 64:
        raise ConfigError("need >= 64 phase grid points")
    if abs(drive.theta_m - math.pi / 2) > 1e-9:
        raise ConfigError("phase response is defined for theta_m = pi/2")
    phis = np.arange(n_phi) * (TWO_PI / n_phi)
    sig = SignalConfig(g=(signal_amp_hz, 0.0, 0.0), omega_s=clock_frequency_hz(drive), phi_s=0.0)
    dt = 1.0 / (200.0 * float(drive.Omega))
    n_steps = max(1, int(round(T_MW / dt)))
    grid = TimeGrid(dt=dt, n_steps=n_steps)
    _, zgrid, _ = _ensemble_zmeas(
        drive, sig, noise_cfg, grid, n_steps, n_realizations, phases=phis
    )
    zbar = zgrid[:, -1]
    kappa = readout.contrast_kappa
    contrast = kappa * (zbar - 1.0) / (1.0 + kappa)
    return PhaseResponse(phis=phis, zbar=zbar, contrast=contrast)


class PhaseResponseCache:
    """Memo for phase-response curves keyed by every input that shapes them."""

    def __init__(self):
        self._store: dict = {}

    def get(
        self, drive, signal_amp_hz, noise_cfg, readout, T_MW, n_phi=128, n_realizations=128
    ) -> PhaseResponse:
        key = (
            float(drive.omega0), float(drive.Omega), float(drive.epsilon_m),
            drive.theta_m, drive.phase_offset,
            float(signal_amp_hz), noise_cfg.T2star, noise_cfg.drive_frac_sigma,
            noise_cfg.T1, noise_cfg.seed, readout.contrast_kappa,
            readout.mean_photons, float(T_MW), int(n_phi), int(n_realizations),
        )
        if key not in self._store:
            self._store[key] = phase_response_curve(
                drive, signal_amp_hz, noise_cfg, readout, T_MW, n_phi, n_realizations
            )
        return self._store[key]


def run_heterodyne(
    drive: DriveConfig,
    signal: SignalConfig,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    timing: SequenceTiming,
    t_m: float,
    phi0: float = 0.0,
    seed: int = 0xDE7,
    cache: PhaseResponseCache | None = None,
    n_phi: int = 128,
    n_realizations: int = 128,
    emulate_wavegen: bool = False,
    wavegen_spec=None,
) -> dsp.PhotonTrace:
    """Stroboscopic phase record of a detuned signal as a photon trace."""
    timing.validate(readout)
    delta = float(signal.omega_s) - clock_frequency_hz(drive)
    nyquist = 0.5 / timing.T_rep
    if abs(delta) >= nyquist:
        raise NyquistError(
            f"|delta| = {abs(delta):.3e} Hz is not below 1/(2 T_rep) = {nyquist:.3e} Hz"
        )
    n_shots_f = t_m / timing.T_rep
    n_shots = int(round(n_shots_f))
    if n_shots < 2 or abs(n_shots_f - n_shots) > 1e-9 * n_shots_f:
        raise TimingError("t_m must be a (>=2) integer multiple of T_rep")
    if emulate_wavegen:
        from . import wavegen

        spec = wavegen_spec or wavegen.WaveformSpec()
        wavegen.check_experiment_grid(drive, signal, timing, spec)
    cache = cache or PhaseResponseCache()
    response = cache.get(
        drive, signal.amplitude, noise_cfg, readout, timing.T_MW, n_phi, n_realizations
    )
    n = np.arange(n_shots)
    phi_n = phi0 + signal.phi_s + TWO_PI * delta * timing.T_rep * n
    zbar_n = response.lookup_z(phi_n)
    lam = expected_photons(zbar_n, timing.T_MW, readout, noise_cfg)
    rng = np.random.default_rng([seed, 0x4E7])
    counts = rng.poisson(lam)
    return dsp.PhotonTrace(counts=counts, dt=timing.T_rep)


def heterodyne_spectrum(trace: dsp.PhotonTrace, use_acf: bool = True) -> dsp.SpectrumResult:
    """Spectrum of a photon trace, via the ACF (default) or directly."""
    if use_acf:
        return dsp.spectrum(dsp.autocorrelate(trace.counts), trace.dt)
    x = trace.counts - trace.counts.mean()
    return dsp.spectrum(x, trace.dt)


def snr_vs_time(
    drive: DriveConfig,
    signal: SignalConfig,
    noise_cfg: NoiseConfig,
    readout: ReadoutConfig,
    timing: SequenceTiming,
    measurement_times,
    use_acf: bool = True,
    seed: int = 0x5CA1E,
    cache: PhaseResponseCache | None = None,
    band_halfwidth_hz: float = 2e3,
    n_repeats: int = 1,
    **het_kwargs,
) -> list[tuple[float, float]]:
    """(t_m, fitted peak SNR) points for the scaling-law study.

    Each point averages the fitted SNR over n_repeats independent photon
    records; a single record's SNR carries enough shot scatter to move the
    fitted exponent by ~0.1, so scaling studies should average a few.
    """
    cache = cache or PhaseResponseCache()
    delta = float(signal.omega_s) - clock_frequency_hz(drive)
    f_tone = 2.0 * abs(delta)
    pts = []
    for i, t_m in enumerate(measurement_times):
        snrs = []
        for r in range(n_repeats):
            trace = run_heterodyne(
                drive, signal, noise_cfg, readout, timing, float(t_m),
                seed=seed + i + 7919 * r, cache=cache, **het_kwargs,
            )
            spec = heterodyne_spectrum(trace, use_acf=use_acf)
            band = (max(spec.df, f_tone - band_halfwidth_hz), f_tone + band_halfwidth_hz)
            fitted = dsp.fit_peak(spec, band)
            if fitted.peak is not None and fitted.peak.detected:
                snrs.append(fitted.peak.snr)
        if snrs:
            pts.append((float(t_m), float(np.mean(snrs))))
    return pts


def _decay_1e(env_t: np.ndarray, env: np.ndarray) -> float:
    """Interpolated 1/e crossing of a decaying envelope; inf if none."""
    target = env[0] / math.e
    below = np.nonzero(env <= target)[0]
    if below.size == 0:
        return math.inf
    k = int(below[0])
    if k == 0:
        return float(env_t[0])
    t0, t1, e0, e1 = env_t[k - 1], env_t[k], env[k - 1], env[k]
    if e0 == e1:
        return float(t1)
    return float(t0 + (e0 - target) * (t1 - t0) / (e0 - e1))


def sideband_coherence_time(
    times: np.ndarray, trace: np.ndarray, freqs_hz, window: int
) -> float:
    """1/e time of the summed demodulated amplitude at the given tones.

    Separates the decaying precession sidebands from any persistent
    carrier: each tone is demodulated with a moving-average low-pass of
    `window` samples, so tones offset by multiples of 1/(window*dt) are
    nulled exactly.  The envelope starts half a window in.
    """
    times = np.asarray(times, dtype=np.float64)
    x = np.asarray(trace, dtype=np.float64)
    window = int(window)
    if not 2 <= window <= x.size:
        raise ConfigError("window must be in [2, len(trace)]")
    x = x - x.mean()
    kernel = np.ones(window) / window
    env = np.zeros_like(x)
    for f in np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64)):
        baseband = x * np.exp(-2j * math.pi * f * times)
        env += 2.0 * np.abs(np.convolve(baseband, kernel, mode="same"))
    half = window // 2
    env_t = times[half : x.size - half]
    env = env[half : x.size - half]
    if env.size < 2:
        raise ConfigError("window leaves no usable envelope")
    return _decay_1e(env_t, env)


def coherence_time_1e(times: np.ndarray, trace: np.ndarray, window: int | None = None) -> float:
    """1/e time of an oscillating trace's envelope.

    The envelope is the sliding-window RMS of the mean-subtracted trace,
    which stays monotone under multi-tone beating where a per-cycle peak
    tracker would dip through beat nodes.  `window` is in samples and
    should span at least one beat period; default n//8.
    """
    times = np.asarray(times, dtype=np.float64)
    x = np.asarray(trace, dtype=np.float64)
    if x.size < 16:
        raise ConfigError("trace too short to extract an envelope")
    if window is None:
        window = x.size // 8
    window = int(window)
    if not 2 <= window <= x.size:
        raise ConfigError("window must be in [2, len(trace)]")
    x = x - x.mean()
    env = np.sqrt(np.convolve(x * x, np.ones(window) / window, mode="same"))
    half = window // 2
    env_t = times[half : x.size - half]
    env = env[half : x.size - half]
    if env.size < 2:
        raise ConfigError("window leaves no usable envelope")
    return _decay_1e(env_t, env)
