"""Core type validation and unit conversions."""

import math

import numpy as np
import pytest

from ccdd_sense import (
    BlochVector,
    ConfigError,
    DriveConfig,
    DriveRatioError,
    FieldVector,
    Frame,
    Frequency,
    ModulationFrequencyError,
    SignalConfig,
    SpinSystemConstants,
    field_to_rabi,
    rabi_to_field,
    transition_frequency,
)


def test_frequency_angular_roundtrip():
    f = Frequency(100e6)
    assert f.hz == 100e6
    assert f.angular == 2.0 * math.pi * 100e6
    back = Frequency.from_angular(f.angular)
    assert math.isclose(float(back), 100e6, rel_tol=1e-15)


def test_frequency_arithmetic_stays_float():
    # Frequency subclasses float, so plain arithmetic must work
    assert Frequency(2.32e9) - Frequency(10e6) == 2.31e9


def test_frequency_rejects_negative_and_nonfinite():
    with pytest.raises(ConfigError):
        Frequency(-1.0)
    with pytest.raises(ConfigError):
        Frequency(math.nan)
    with pytest.raises(ConfigError):
        Frequency(math.inf)


def test_drive_defaults():
    d = DriveConfig()
    assert float(d.omega0) == 2.32e9
    assert float(d.Omega) == 100e6
    assert float(d.epsilon_m) == 10e6
    assert float(d.omega_m) == 100e6  # pinned to Omega when omitted
    assert d.theta_m == 0.0
    assert math.isclose(d.phase_offset, 0.07 * math.pi)


def test_drive_modulation_index_and_theta_effective():
    d = DriveConfig(theta_m=0.3)
    assert math.isclose(d.modulation_index, 0.2, rel_tol=1e-15)
    assert math.isclose(d.theta_effective, 0.3 + 0.07 * math.pi, rel_tol=1e-15)


def test_drive_ratio_guard():
    with pytest.raises(DriveRatioError):
        DriveConfig(epsilon_m=100e6)  # second drive must stay below Omega
    with pytest.raises(DriveRatioError):
        DriveConfig(epsilon_m=120e6)


def test_modulation_frequency_guard():
    with pytest.raises(ModulationFrequencyError):
        DriveConfig(omega_m=90e6)
    # explicitly passing the matching value is fine
    d = DriveConfig(omega_m=100e6)
    assert float(d.omega_m) == 100e6


def test_drive_rejects_nonpositive_and_nonfinite():
    with pytest.raises(ConfigError):
        DriveConfig(Omega=0.0)
    with pytest.raises(ConfigError):
        DriveConfig(theta_m=math.nan)


def test_bloch_vector_norm_guard():
    v = BlochVector(0.6, 0.0, 0.8, Frame.DOUBLE_ROTATING)
    assert math.isclose(v.norm(), 1.0, rel_tol=1e-12)
    assert v.frame is Frame.DOUBLE_ROTATING
    np.testing.assert_allclose(v.as_array(), [0.6, 0.0, 0.8])
    with pytest.raises(ConfigError):
        BlochVector(1.0, 0.0, 0.1)
    with pytest.raises(ConfigError):
        BlochVector(math.inf, 0.0, 0.0)


def test_field_vector_magnitude():
    h = FieldVector(3.0, 0.0, 4.0, t=1e-9)
    assert h.magnitude() == 5.0
    np.testing.assert_allclose(h.as_array(), [3.0, 0.0, 4.0])


def test_signal_config_amplitude_and_helpers():
    s = SignalConfig(g=(3e5, 0.0, 4e5), omega_s=2.31e9, phi_s=0.1)
    assert math.isclose(s.amplitude, 5e5)
    s2 = s.with_phase(1.3)
    assert s2.phi_s == 1.3 and s2.g == s.g
    s3 = s.with_amplitude_x(2e6)
    assert s3.g == (2e6, 0.0, 0.0) and s3.phi_s == s.phi_s
    off = SignalConfig.off()
    assert off.amplitude == 0.0


def test_signal_config_validation():
    with pytest.raises(ConfigError):
        SignalConfig(g=(1e6, 0.0))
    with pytest.raises(ConfigError):
        SignalConfig(g=(-1e6, 0.0, 0.0))
    with pytest.raises(ConfigError):
        SignalConfig(g=(0.0, 0.0, 0.0), phi_s=math.nan)


def test_spin_constants_transition_frequency():
    c = SpinSystemConstants()
    expect = abs(3.5e9 - 59e6 - 28.025e9 * 0.207)
    assert math.isclose(float(transition_frequency(c)), expect, rel_tol=1e-12)
    with pytest.raises(ConfigError):
        SpinSystemConstants(d_splitting=50e6)  # must exceed e_splitting


def test_field_rabi_conversion_roundtrip():
    c = SpinSystemConstants()
    g = field_to_rabi(35e-6, c)
    assert math.isclose(float(g), 28.025e9 * 35e-6, rel_tol=1e-12)
    assert math.isclose(rabi_to_field(float(g), c), 35e-6, rel_tol=1e-12)
    with pytest.raises(ConfigError):
        field_to_rabi(-1e-6, c)
    with pytest.raises(ConfigError):
        rabi_to_field(-1.0, c)
