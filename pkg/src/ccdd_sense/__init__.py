"""Simulator and signal-processing toolkit for continuously decoupled spin sensors."""

from ._kernels import backend
from .spincore import (
    BlochVector,
    ConfigError,
    DriveConfig,
    DriveRatioError,
    EstimatorUndefined,
    FieldVector,
    Frame,
    Frequency,
    GridError,
    ModulationFrequencyError,
    NyquistError,
    PeakNotDetected,
    PhysicsValidationError,
    SignalConfig,
    SpinSystemConstants,
    StepSizeError,
    TimingError,
    field_to_rabi,
    rabi_to_field,
    transition_frequency,
)
from .dynamics import (
    MAX_STEP_RAD,
    BlochTrajectory,
    FieldModel,
    RWAWarning,
    TimeGrid,
    bare_rabi_model,
    calibrated_amplitude_scale,
    default_lab_grid,
    default_rotating_grid,
    double_rot_field,
    lab_frame_model,
    lab_vs_rotating_check,
    measure_dressed_rate,
    measured_z,
    propagate_batch,
    propagate_rotation,
    propagate_unitary_oracle,
    resonance_map,
    rotating_frame_model,
    transform_trajectory,
)
from .noise import (
    CALIBRATED_BARE_RABI_HZ,
    CALIBRATED_DRIVE_FRAC_SIGMA,
    DisorderRealization,
    NoiseConfig,
    apply_t1_decay,
    ensemble_average,
    sample_realization,
    sample_realizations,
)
from .readout import (
    CALIBRATED_CONTRAST_KAPPA,
    ReadoutConfig,
    ReadoutOutcome,
    contrast_delta_t,
    contrast_zero,
    expected_photons,
    pl_rate,
    sample_mean_photons,
    sample_photons,
    write_photon_csv,
)
from .dsp import (
    PeakFit,
    PhotonTrace,
    SpectrumResult,
    autocorrelate,
    fit_peak,
    gate_and_bin,
    peak_report,
    snr_scaling_fit,
    spectrum,
    write_peak_json,
    write_spectrum_csv,
)
from .sequences import (
    PhaseResponse,
    PhaseResponseCache,
    PhaseSensitivityCurve,
    SensitivityReport,
    SequenceTiming,
    SweepResult,
    clock_frequency_hz,
    coherence_time_1e,
    compute_phase_sensitivity_curve,
    compute_sensitivity,
    find_fixed_point,
    heterodyne_spectrum,
    phase_response_curve,
    phase_slope_sensitivity,
    rabi_spectrum,
    run_fixed_point_sweep,
    run_heterodyne,
    run_rabi,
    sideband_coherence_time,
    snr_vs_time,
)
from .wavegen import (
    SampleBuffer,
    WaveformSpec,
    ccdd_value_at,
    check_experiment_grid,
    check_grid,
    compile_ccdd,
    compile_signal,
    loop_discontinuity,
    read_buffer,
    validate_grid,
    write_buffer,
    write_buffer_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BlochTrajectory",
    "BlochVector",
    "CALIBRATED_BARE_RABI_HZ",
    "CALIBRATED_CONTRAST_KAPPA",
    "CALIBRATED_DRIVE_FRAC_SIGMA",
    "ConfigError",
    "DisorderRealization",
    "DriveConfig",
    "DriveRatioError",
    "EstimatorUndefined",
    "FieldModel",
    "FieldVector",
    "Frame",
    "Frequency",
    "GridError",
    "MAX_STEP_RAD",
    "ModulationFrequencyError",
    "NoiseConfig",
    "NyquistError",
    "PeakFit",
    "PeakNotDetected",
    "PhaseResponse",
    "PhaseResponseCache",
    "PhaseSensitivityCurve",
    "PhotonTrace",
    "PhysicsValidationError",
    "RWAWarning",
    "ReadoutConfig",
    "ReadoutOutcome",
    "SampleBuffer",
    "SensitivityReport",
    "SequenceTiming",
    "SignalConfig",
    "SpectrumResult",
    "SpinSystemConstants",
    "StepSizeError",
    "SweepResult",
    "TimeGrid",
    "TimingError",
    "WaveformSpec",
    "__version__",
    "apply_t1_decay",
    "autocorrelate",
    "backend",
    "bare_rabi_model",
    "calibrated_amplitude_scale",
    "ccdd_value_at",
    "check_experiment_grid",
    "check_grid",
    "clock_frequency_hz",
    "coherence_time_1e",
    "compile_ccdd",
    "compile_signal",
    "compute_phase_sensitivity_curve",
    "compute_sensitivity",
    "contrast_delta_t",
    "contrast_zero",
    "default_lab_grid",
    "default_rotating_grid",
    "double_rot_field",
    "ensemble_average",
    "expected_photons",
    "field_to_rabi",
    "find_fixed_point",
    "fit_peak",
    "gate_and_bin",
    "heterodyne_spectrum",
    "lab_frame_model",
    "lab_vs_rotating_check",
    "loop_discontinuity",
    "measure_dressed_rate",
    "measured_z",
    "peak_report",
    "phase_response_curve",
    "phase_slope_sensitivity",
    "pl_rate",
    "propagate_batch",
    "propagate_rotation",
    "propagate_unitary_oracle",
    "rabi_spectrum",
    "rabi_to_field",
    "read_buffer",
    "resonance_map",
    "rotating_frame_model",
    "run_fixed_point_sweep",
    "run_heterodyne",
    "run_rabi",
    "sample_mean_photons",
    "sample_photons",
    "sample_realization",
    "sample_realizations",
    "sideband_coherence_time",
    "snr_scaling_fit",
    "snr_vs_time",
    "spectrum",
    "transform_trajectory",
    "transition_frequency",
    "validate_grid",
    "write_buffer",
    "write_buffer_csv",
    "write_peak_json",
    "write_photon_csv",
    "write_spectrum_csv",
]
