"""Heterodyne analysis chain: binning, autocorrelation, spectra, peaks.

The estimator choices that matter: the autocorrelation is the biased
(1/N), mean-subtracted form, so its transform is a valid non-negative
power spectrum; spectra are unwindowed one-sided magnitudes normalized
by 1/N; the peak SNR baseline is the in-band magnitude std outside
ten FWHM of the peak.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .spincore import ConfigError

DETECTION_SIGMAS = 3.0
BASELINE_EXCLUDE_FWHM = 10.0


@dataclass(frozen=True)
class PhotonTrace:
    """Per-repetition photon counts on a uniform time base."""

    counts: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 2:
            raise ConfigError("counts must be a 1-d sequence of length >= 2")
        if np.any(counts < 0):
            raise ConfigError("counts must be non-negative")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        object.__setattr__(self, "counts", counts)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.counts.size)

    @property
    def duration(self) -> float:
        return self.counts.size * self.dt


@dataclass(frozen=True)
class PeakFit:
    f0_hz: float
    fwhm_hz: float
    height: float
    snr: float
    detected: bool
    method: str


@dataclass(frozen=True)
class SpectrumResult:
    freqs: np.ndarray
    magnitude: np.ndarray
    peak: PeakFit | None = None
    baseline_std: float | None = None

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=np.float64)
        m = np.asarray(self.magnitude, dtype=np.float64)
        if f.shape != m.shape or f.ndim != 1:
            raise ConfigError("freqs and magnitude must be matching 1-d arrays")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "magnitude", m)

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def gate_and_bin(tagged_photons, gate: float, rep_rate: float = 400e3) -> PhotonTrace:
    """Bin time tags per repetition, keeping only in-gate arrivals."""
    tags = np.asarray(tagged_photons, dtype=np.float64)
    if tags.ndim != 1 or tags.size == 0:
        raise ConfigError("need a non-empty 1-d tag sequence")
    if np.any(np.diff(tags) < 0):
        raise ConfigError("photon tags must be sorted")
    if not (gate > 0 and rep_rate > 0):
        raise ConfigError("gate and rep_rate must be positive")
    period = 1.0 / rep_rate
    kept = tags[np.mod(tags, period) <= gate]
    n_bins = int(np.floor(tags[-1] / period)) + 1
    if n_bins < 2:
        n_bins = 2
    idx = np.floor(kept / period).astype(np.int64)
    counts = np.bincount(idx, minlength=n_bins)
    return PhotonTrace(counts=counts, dt=period)


def autocorrelate(x) -> np.ndarray:
    """Biased mean-subtracted autocorrelation at lags 0 .. N-1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ConfigError("need a 1-d sequence of length >= 2")
    n = x.size
    xc = x - x.mean()
    nfft = 1 << int(math.ceil(math.log2(2 * n)))
    spec = np.fft.rfft(xc, nfft)
    acf = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    return acf / n


def spectrum(sequence, dt: float) -> SpectrumResult:
    """One-sided magnitude spectrum, |DFT|/N normalization.

    With this scale an on-grid cosine of amplitude A contributes A/2 to
    its (interior) bin.  Parseval's identity reads
    mean(x^2) = sum_k w_k |X_k|^2 with w = 2 except at DC and (for even
    N) the Nyquist bin.
    """
    x = np.asarray(sequence, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ConfigError("need a 1-d sequence of length >= 2")
    if not dt > 0:
        raise ConfigError("dt must be positive")
    mag = np.abs(np.fft.rfft(x)) / x.size
    return SpectrumResult(freqs=np.fft.rfftfreq(x.size, dt), magnitude=mag)


def _gaussian(f, a, f0, sig, c):
    return a * np.exp(-0.5 * ((f - f0) / sig) ** 2) + c


def _halfmax_width_bins(mag, k, lo, hi) -> float:
    """Crude FWHM estimate (bins) from half-maximum crossings around k."""
    floor = np.median(mag[lo:hi])
    half = floor + 0.5 * (mag[k] - floor)
    left = k
    while left > lo and mag[left - 1] > half:
        left -= 1
    right = k
    while right < hi - 1 and mag[right + 1] > half:
        right += 1
    return max(right - left, 1.0)


def fit_peak(spec: SpectrumResult, search_band) -> SpectrumResult:
    """Locate and Gaussian-fit the dominant peak inside search_band."""
    f_lo, f_hi = (float(v) for v in search_band)
    if not (0 <= f_lo < f_hi <= spec.freqs[-1] + spec.df / 2):
        raise ConfigError("search band outside the spectrum")
    lo = int(np.searchsorted(spec.freqs, f_lo, side="left"))
    hi = int(np.searchsorted(spec.freqs, f_hi, side="right"))
    if hi - lo < 8:
        raise ConfigError("search band too narrow to establish a baseline")
    mag = spec.magnitude
    k = lo + int(np.argmax(mag[lo:hi]))

    width = _halfmax_width_bins(mag, k, lo, hi)
    excl = int(math.ceil(BASELINE_EXCLUDE_FWHM * width))
    base_idx = np.r_[lo : max(lo, k - excl), min(hi, k + excl + 1) : hi]
    if base_idx.size < 4:
        raise ConfigError("search band leaves no baseline around the peak")
    baseline_mean = float(np.mean(mag[base_idx]))
    baseline_std = float(np.std(mag[base_idx]))

    height_above = mag[k] - baseline_mean
    if baseline_std > 0 and height_above < DETECTION_SIGMAS * baseline_std:
        peak = PeakFit(
            f0_hz=float(spec.freqs[k]), fwhm_hz=math.nan, height=float(height_above),
            snr=float(height_above / baseline_std), detected=False, method="not-detected",
        )
        return replace(spec, peak=peak, baseline_std=baseline_std)

    halfwin = max(6, int(math.ceil(3 * width)))
    wlo, whi = max(lo, k - halfwin), min(hi, k + halfwin + 1)
    fwin = spec.freqs[wlo:whi]
    mwin = mag[wlo:whi]
    p0 = (float(height_above), float(spec.freqs[k]), max(width, 1.0) * spec.df / 2.355, baseline_mean)
    try:
        with warnings.catch_warnings():
            # delta-like tones leave the width unconstrained; the covariance
            # is unused, only the optimum matters
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_gaussian, fwin, mwin, p0=p0, maxfev=10000)
        a, f0, sig, _c = popt
        sig = abs(float(sig))
        method = "gaussian"
    except RuntimeError:
        a, f0, sig = height_above, float(spec.freqs[k]), width * spec.df / 2.355
        method = "gaussian-fallback"
    fwhm = 2.0 * math.sqrt(2.0 * math.log(2.0)) * sig
    # raw bin prominence, not the fitted amplitude: for near-delta tones the
    # Gaussian amplitude trades off against its width, so it is noisy while
    # the prominence fluctuates by ~one baseline std regardless of linewidth
    snr = float(height_above / baseline_std) if baseline_std > 0 else math.inf
    peak = PeakFit(
        f0_hz=float(f0), fwhm_hz=float(fwhm), height=float(a),
        snr=snr, detected=True, method=method,
    )
    return replace(spec, peak=peak, baseline_std=baseline_std)


def snr_scaling_fit(points) -> float:
    """Least-squares exponent of snr vs measurement time on log axes."""
    pts = [(float(t), float(s)) for t, s in points]
    if len(pts) < 4:
        raise ConfigError("need >= 4 (t_m, snr) points")
    t = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    if np.any(t <= 0) or np.any(s <= 0):
        raise ConfigError("t_m and snr must be positive")
    if t.max() / t.min() < 10.0:
        raise ConfigError("points must span at least one decade in t_m")
    slope, _ = np.polyfit(np.log(t), np.log(s), 1)
    return float(slope)


def write_spectrum_csv(spec: SpectrumResult, path, config_hash: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("f_hz,magnitude\n")
        for f, m in zip(spec.freqs, spec.magnitude):
            fh.write(f"{f:.9e},{m:.12e}\n")


def peak_report(spec: SpectrumResult, config_hash: str | None = None) -> dict:
    if spec.peak is None:
        raise ConfigError("spectrum has no fitted peak")
    rep = {
        "f0_hz": spec.peak.f0_hz,
        "fwhm_hz": spec.peak.fwhm_hz if math.isfinite(spec.peak.fwhm_hz) else None,
        "snr": spec.peak.snr if math.isfinite(spec.peak.snr) else None,
        "baseline_std": spec.baseline_std,
        "method": spec.peak.method,
    }
    if config_hash is not None:
        rep["config_hash"] = config_hash
    return rep


def write_peak_json(spec: SpectrumResult, path, config_hash: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(peak_report(spec, config_hash), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
