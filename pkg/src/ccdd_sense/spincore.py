"""Core types and unit handling for the driven two-level spin sensor.

All configuration values are ordinary frequencies in Hz; angular
frequencies (rad/s) are derived exactly as 2*pi*f and used internally.
Effective fields follow H = (1/2) h . sigma, so field components are
precession rates and sigma_dot = h x sigma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class PhysicsValidationError(ValueError):
    """A physically motivated precondition failed (grid, step, Nyquist, timing)."""


class StepSizeError(PhysicsValidationError):
    """Time step too coarse for the field magnitude."""


class NyquistError(PhysicsValidationError):
    """A frequency exceeds the relevant Nyquist limit."""


class TimingError(PhysicsValidationError):
    """Sequence timing does not fit its repetition window."""


class GridError(PhysicsValidationError):
    """Frequencies off the waveform-memory grid."""

    def __init__(self, violations):
        self.violations = tuple(float(v) for v in violations)
        listing = ", ".join(f"{v:.6f} Hz" for v in self.violations)
        super().__init__(f"off-grid frequencies: {listing}")


class EstimatorUndefined(ArithmeticError):
    """A contrast estimator's denominator collected no photons."""


class PeakNotDetected(RuntimeError):
    """No spectral peak above the detection threshold in the search band."""


class ConfigError(ValueError):
    """A configuration value violates its declared constraints."""


class DriveRatioError(ConfigError):
    """Second-drive amplitude must stay below the primary Rabi frequency."""


class ModulationFrequencyError(ConfigError):
    """Modulation frequency must equal the primary Rabi frequency."""


class Frequency(float):
    """Ordinary frequency in Hz with an exact angular accessor.

    Subclasses float so arithmetic behaves naturally; `angular` returns
    2*pi*value in rad/s.
    """

    def __new__(cls, hz):
        value = float(hz)
        if not math.isfinite(value):
            raise ConfigError(f"frequency must be finite, got {value!r}")
        if value < 0.0:
            raise ConfigError(f"frequency magnitude must be >= 0, got {value!r}")
        return super().__new__(cls, value)

    @property
    def hz(self) -> float:
        return float(self)

    @property
    def angular(self) -> float:
        return TWO_PI * float(self)

    @classmethod
    def from_angular(cls, rad_per_s) -> "Frequency":
        return cls(float(rad_per_s) / TWO_PI)


class Frame(enum.Enum):
    """Reference frame tag for Bloch vectors and trajectories."""

    LAB = "lab"
    SINGLE_ROTATING = "single_rotating"
    DOUBLE_ROTATING = "double_rotating"


@dataclass(frozen=True)
class BlochVector:
    """Spin expectation values (x, y, z) together with their frame."""

    x: float
    y: float
    z: float
    frame: Frame = Frame.LAB

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"Bloch component {name} must be finite")
        if self.norm() > 1.0 + 1e-9:
            raise ConfigError(f"Bloch vector norm {self.norm():.3e} exceeds 1")

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class FieldVector:
    """Instantaneous effective field (rad/s) at time t (s).

    Components are twice the Pauli coefficients of the Hamiltonian
    (H = (1/2) h . sigma), i.e. |h| is the precession rate.
    """

    hx: float
    hy: float
    hz: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.hx, self.hy, self.hz], dtype=np.float64)

    def magnitude(self) -> float:
        return math.sqrt(self.hx**2 + self.hy**2 + self.hz**2)


@dataclass(frozen=True)
class DriveConfig:
    """Phase-modulated microwave drive parameters (Hz and rad).

    omega0: carrier frequency; Omega: primary Rabi frequency; epsilon_m:
    second-drive amplitude encoded as phase modulation with index
    2*epsilon_m/Omega; omega_m: modulation frequency, pinned to Omega;
    theta_m: modulation phase selecting the protected (0) or
    phase-sensitive (pi/2) quadrature; phase_offset: constant hardware
    phase correction added to theta_m wherever the drive waveform is
    formed.
    """

    omega0: Frequency = Frequency(2.32e9)
    Omega: Frequency = Frequency(100e6)
    epsilon_m: Frequency = Frequency(10e6)
    omega_m: Frequency | None = None
    theta_m: float = 0.0
    phase_offset: float = 0.07 * math.pi

    def __post_init__(self):
        object.__setattr__(self, "omega0", Frequency(self.omega0))
        object.__setattr__(self, "Omega", Frequency(self.Omega))
        object.__setattr__(self, "epsilon_m", Frequency(self.epsilon_m))
        if self.omega0 <= 0 or self.Omega <= 0:
            raise ConfigError("omega0 and Omega must be positive")
        if self.epsilon_m >= self.Omega:
            raise DriveRatioError(
                f"epsilon_m = {float(self.epsilon_m):.6g} Hz must be below "
                f"Omega = {float(self.Omega):.6g} Hz"
            )
        omega_m = self.Omega if self.omega_m is None else Frequency(self.omega_m)
        if float(omega_m) != float(self.Omega):
            raise ModulationFrequencyError(
                f"omega_m = {float(omega_m):.6g} Hz must equal "
                f"Omega = {float(self.Omega):.6g} Hz"
            )
        object.__setattr__(self, "omega_m", omega_m)
        if not (math.isfinite(self.theta_m) and math.isfinite(self.phase_offset)):
            raise ConfigError("theta_m and phase_offset must be finite")

    @property
    def modulation_index(self) -> float:
        return 2.0 * float(self.epsilon_m) / float(self.Omega)

    @property
    def theta_effective(self) -> float:
        """Modulation phase actually applied to the hardware waveform."""
        return self.theta_m + self.phase_offset


@dataclass(frozen=True)
class SignalConfig:
    """Target signal field: coupling 3-vector (Hz), frequency and phase."""

    g: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega_s: Frequency = Frequency(2.31e9)
    phi_s: float = 0.0

    def __post_init__(self):
        g = tuple(float(v) for v in self.g)
        if len(g) != 3:
            raise ConfigError("signal coupling g must have three components")
        for v in g:
            if not math.isfinite(v) or v < 0.0:
                raise ConfigError("signal couplings must be finite and >= 0")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "omega_s", Frequency(self.omega_s))
        if not math.isfinite(self.phi_s):
            raise ConfigError("phi_s must be finite")

    @property
    def amplitude(self) -> float:
        """Euclidean magnitude of the coupling vector in Hz."""
        return math.sqrt(sum(v * v for v in self.g))

    def with_phase(self, phi_s: float) -> "SignalConfig":
        return SignalConfig(g=self.g, omega_s=self.omega_s, phi_s=phi_s)

    def with_amplitude_x(self, g_x: float) -> "SignalConfig":
        return SignalConfig(g=(g_x, 0.0, 0.0), omega_s=self.omega_s, phi_s=self.phi_s)

    @staticmethod
    def off() -> "SignalConfig":
        return SignalConfig(g=(0.0, 0.0, 0.0))


@dataclass(frozen=True)
class SpinSystemConstants:
    """Ground-state parameters of the effective two-level sensor.

    d_splitting and e_splitting are the zero-field terms (Hz), gamma_e the
    gyromagnetic ratio (Hz/T) and bz the static bias field (T).
    """

    d_splitting: Frequency = Frequency(3.5e9)
    e_splitting: Frequency = Frequency(59e6)
    gamma_e: float = 28.025e9
    bz: float = 0.207

    def __post_init__(self):
        object.__setattr__(self, "d_splitting", Frequency(self.d_splitting))
        object.__setattr__(self, "e_splitting", Frequency(self.e_splitting))
        if self.d_splitting <= self.e_splitting:
            raise ConfigError("d_splitting must exceed e_splitting")
        if not (math.isfinite(self.gamma_e) and self.gamma_e > 0):
            raise ConfigError("gamma_e must be positive and finite")
        if not (math.isfinite(self.bz) and self.bz >= 0):
            raise ConfigError("bz must be finite and >= 0")


def transition_frequency(consts: SpinSystemConstants) -> Frequency:
    """Working transition frequency |D - E - gamma_e*Bz| in Hz."""
    value = abs(
        float(consts.d_splitting) - float(consts.e_splitting) - consts.gamma_e * consts.bz
    )
    return Frequency(value)


def field_to_rabi(b_tesla: float, consts: SpinSystemConstants) -> Frequency:
    """Magnetic field amplitude (T) -> signal coupling (Hz): g = gamma_e*B."""
    b = float(b_tesla)
    if not math.isfinite(b) or b < 0.0:
        raise ConfigError("field amplitude must be finite and >= 0")
    return Frequency(consts.gamma_e * b)


def rabi_to_field(g_hz: float, consts: SpinSystemConstants) -> float:
    """Signal coupling (Hz) -> magnetic field amplitude (T): B = g/gamma_e."""
    g = float(g_hz)
    if not math.isfinite(g) or g < 0.0:
        raise ConfigError("coupling must be finite and >= 0")
    return g / consts.gamma_e
