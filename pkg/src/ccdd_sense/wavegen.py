"""Waveform-memory emulation: grid checks and sample-buffer compilation.

The hardware constraint being modeled: a looping arbitrary-waveform
memory of fixed length replays continuously, so every component
frequency must sit on the reciprocal-length grid for the loop to be
phase continuous.  Frequency checks are exact rational arithmetic on
the decimal value each input prints as, never float modulo.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import numpy as np

from .sequences import SequenceTiming
from .spincore import (
    ConfigError,
    DriveConfig,
    GridError,
    NyquistError,
    SignalConfig,
    TimingError,
    TWO_PI,
)


@dataclass(frozen=True)
class WaveformSpec:
    """Generator constraints: sample rate, memory length, frequency grid."""

    sample_rate: float = 25e9
    memory_length: float = 1e-3
    freq_grid: float = 1e3

    def __post_init__(self):
        if not (self.sample_rate > 0 and self.memory_length > 0 and self.freq_grid > 0):
            raise ConfigError("all WaveformSpec fields must be positive")
        n = _frac(self.sample_rate) * _frac(self.memory_length)
        if n.denominator != 1:
            raise ConfigError("memory_length * sample_rate must be an integer sample count")

    @property
    def n_samples(self) -> int:
        return int(_frac(self.sample_rate) * _frac(self.memory_length))


@dataclass(frozen=True)
class SampleBuffer:
    """Unit-peak sample sequence plus the physical scale it represents."""

    samples: np.ndarray
    channel: str
    sample_rate: float
    scale_hz: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float32)
        if s.ndim != 1:
            raise ConfigError("samples must be 1-d")
        if s.size and float(np.max(np.abs(s))) > 1.0 + 1e-6:
            raise ConfigError("samples must be normalized to |s| <= 1")
        object.__setattr__(self, "samples", s)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def _frac(value: float) -> Fraction:
    """Exact rational from the shortest decimal form of a float.

    Quantities like 1e-3 s or 5e-6 s are decimal by intent; going through
    their binary expansions would make every integer-ratio test fail.
    """
    return Fraction(Decimal(str(float(value))))


def validate_grid(frequencies, spec: WaveformSpec) -> list[float]:
    """Return the off-grid members of `frequencies` (empty means all valid)."""
    grid = _frac(spec.freq_grid)
    bad = []
    for f in frequencies:
        fv = float(f)
        if fv <= 0 or not math.isfinite(fv):
            raise ConfigError("frequencies must be positive and finite")
        if _frac(fv) % grid != 0:
            bad.append(fv)
    return bad


def check_grid(frequencies, spec: WaveformSpec) -> None:
    bad = validate_grid(frequencies, spec)
    if bad:
        raise GridError(bad)


def check_experiment_grid(
    drive: DriveConfig, signal: SignalConfig | None, timing: SequenceTiming | None, spec: WaveformSpec
) -> None:
    """Grid-check every frequency an experiment would program."""
    freqs = [float(drive.omega0), float(drive.omega_m), float(drive.epsilon_m)]
    if signal is not None and signal.amplitude > 0:
        freqs.append(float(signal.omega_s))
    check_grid(freqs, spec)
    if timing is not None:
        rep_rate = 1 / _frac(timing.T_rep)
        if rep_rate % _frac(spec.freq_grid) != 0:
            raise GridError([float(rep_rate)])


def _check_nyquist(f_max: float, spec: WaveformSpec) -> None:
    if f_max >= spec.sample_rate / 2.0:
        raise NyquistError(
            f"component at {f_max:.6g} Hz exceeds sample_rate/2 = {spec.sample_rate / 2:.6g} Hz"
        )


def compile_ccdd(
    drive: DriveConfig,
    timing: SequenceTiming | None = None,
    spec: WaveformSpec | None = None,
    channel: str = "ccdd",
) -> SampleBuffer:
    """Gated phase-modulated carrier over one memory window.

    Unit peak amplitude; the physical Rabi frequency it stands for is
    recorded as scale_hz.  Passing timing=None compiles an ungated
    (continuous) drive.
    """
    spec = spec or WaveformSpec()
    check_grid([float(drive.omega0), float(drive.omega_m), float(drive.epsilon_m)], spec)
    beta = drive.modulation_index
    # Carson bandwidth of the phase-modulated carrier
    _check_nyquist(float(drive.omega0) + (math.ceil(beta) + 1) * float(drive.omega_m), spec)
    if timing is not None:
        rep_rate = 1 / _frac(timing.T_rep)  # exact, unlike 1.0/T_rep in floats
        if rep_rate % _frac(spec.freq_grid) != 0:
            raise GridError([float(rep_rate)])
        reps = _frac(spec.memory_length) / _frac(timing.T_rep)
        if reps.denominator != 1:
            raise TimingError(
                f"memory window of {spec.memory_length:.6g} s is not an integer "
                f"number of T_rep = {timing.T_rep:.6g} s"
            )
    t = np.arange(spec.n_samples, dtype=np.float64) / spec.sample_rate
    phase = TWO_PI * float(drive.omega0) * t - beta * np.sin(
        TWO_PI * float(drive.omega_m) * t - drive.theta_effective
    )
    samples = np.cos(phase)
    if timing is not None:
        samples = samples * (np.mod(t, timing.T_rep) < timing.T_MW)
    return SampleBuffer(
        samples=samples.astype(np.float32), channel=channel,
        sample_rate=spec.sample_rate, scale_hz=float(drive.Omega),
    )


def compile_signal(
    signal: SignalConfig,
    spec: WaveformSpec | None = None,
    channel: str = "signal",
) -> SampleBuffer:
    """Continuous signal tone over one memory window."""
    spec = spec or WaveformSpec()
    if signal.amplitude == 0.0:
        return SampleBuffer(
            samples=np.zeros(spec.n_samples, dtype=np.float32), channel=channel,
            sample_rate=spec.sample_rate, scale_hz=0.0,
        )
    check_grid([float(signal.omega_s)], spec)
    _check_nyquist(float(signal.omega_s), spec)
    t = np.arange(spec.n_samples, dtype=np.float64) / spec.sample_rate
    samples = np.cos(TWO_PI * float(signal.omega_s) * t + signal.phi_s)
    return SampleBuffer(
        samples=samples.astype(np.float32), channel=channel,
        sample_rate=spec.sample_rate, scale_hz=signal.amplitude,
    )


def loop_discontinuity(buf: SampleBuffer, value_at_wrap: float) -> float:
    """|first sample - analytic continuation at the wrap|, in amplitude units."""
    return abs(float(buf.samples[0]) - float(value_at_wrap))


def ccdd_value_at(drive: DriveConfig, t: float) -> float:
    """Analytic unit-amplitude CCDD waveform value (ungated)."""
    return math.cos(
        TWO_PI * float(drive.omega0) * t
        - drive.modulation_index * math.sin(TWO_PI * float(drive.omega_m) * t - drive.theta_effective)
    )


def write_buffer(buf: SampleBuffer, path) -> None:
    """JSON header line (utf-8) followed by float32 little-endian samples."""
    header = {
        "sample_rate_hz": buf.sample_rate,
        "length": int(buf.samples.size),
        "channel": buf.channel,
        "scale_hz": buf.scale_hz,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(buf.samples.astype("<f4").tobytes())


def read_buffer(path) -> SampleBuffer:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != header["length"]:
        raise ConfigError("buffer length does not match its header")
    return SampleBuffer(
        samples=data, channel=header["channel"],
        sample_rate=float(header["sample_rate_hz"]), scale_hz=float(header.get("scale_hz", 0.0)),
    )


def write_buffer_csv(buf: SampleBuffer, path, max_rows: int = 1_000_000) -> None:
    if buf.samples.size > max_rows:
        raise ConfigError("buffer too large for CSV export; use write_buffer")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,amplitude\n")
        for i, v in enumerate(buf.samples):
            fh.write(f"{i},{float(v):.9e}\n")
