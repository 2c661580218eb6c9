"""Calibrate the drive-amplitude noise level and the bare-Rabi benchmark.

Procedure:
  1. Scan the fractional drive-amplitude sigma and measure two 1/e times
     at the shared drive rate (Omega = 100 MHz): the precession-sideband
     amplitude of the ensemble CCDD trace (theta_m = pi/2, no signal,
     tones at omega_m -+ epsilon_m; the modulation-tilt carrier at exactly
     omega_m never dephases, so the coherence observable is the
     demodulated sideband envelope), and the plain unmodulated Rabi decay.
  2. Pick the sigma maximizing the joint margin against both target
     windows: CCDD in [0.6, 1.5] us, bare in 36 ns +- 30 %.  The x-noise
     term (s-1)*Omega enters the CCDD precession rate quadratically with
     coefficient Omega^2/(2 eps^2), giving a slow power-law decay tail,
     so the CCDD 1/e time saturates near ~1.2-1.6 us over a wide sigma
     range while the bare time scales as 1/sigma: both windows admit a
     common sigma near 0.085.
  3. Verify at the frozen value: bare, CCDD, and that a resonant 2 MHz
     x signal extends the envelope >= 2x.  The extension ratio compares
     matched estimators: each trace is demodulated at its own coherent
     sideband pair (no signal: omega_m -+ epsilon_m; signal on, phi_s = 0:
     omega_m -+ g/2) with the same 2 us window, which exactly nulls
     1 MHz-offset leakage from the carrier.

Run from the repo root:  python3 scripts/calibrate_noise.py
Paste the two printed constants into src/ccdd_sense/noise.py.
"""

import math
import time

import numpy as np

from ccdd_sense.dynamics import (
    TimeGrid,
    bare_rabi_model,
    measured_z,
    propagate_batch,
    rotating_frame_model,
)
from ccdd_sense.noise import NoiseConfig, sample_realizations
from ccdd_sense.sequences import SIGMA0, coherence_time_1e, sideband_coherence_time
from ccdd_sense.spincore import DriveConfig, SignalConfig

N_REAL = 512
BARE_TARGET = 36e-9
DRIVE = DriveConfig(theta_m=math.pi / 2)


def ccdd_zbar(sigma: float, signal: SignalConfig | None, t_max: float):
    cfg = NoiseConfig(drive_frac_sigma=sigma)
    reals = sample_realizations(cfg, N_REAL)
    models = [
        rotating_frame_model(DRIVE, signal, detuning_hz=r.detuning, drive_scale=r.drive_scale)
        for r in reals
    ]
    dt = 1.0 / (200.0 * float(DRIVE.Omega))
    stride = round(1e-9 / dt)
    grid = TimeGrid(dt=dt, n_steps=int(round(t_max / dt)))
    vecs = propagate_batch(models, SIGMA0, grid, stride)
    times = grid.sample_times(stride)
    zbar = np.mean([measured_z(times, v, DRIVE) for v in vecs], axis=0)
    return times, zbar


def ccdd_t1e(sigma: float) -> float:
    f_m = float(DRIVE.omega_m)
    eps = float(DRIVE.epsilon_m)
    times, zbar = ccdd_zbar(sigma, None, 4e-6)
    return sideband_coherence_time(times, zbar, [f_m - eps, f_m + eps], window=500)


def bare_t1e(omega_hz: float, sigma: float, t_max: float = 150e-9) -> float:
    cfg = NoiseConfig(drive_frac_sigma=sigma)
    reals = sample_realizations(cfg, N_REAL)
    models = [
        bare_rabi_model(omega_hz, detuning_hz=r.detuning, drive_scale=r.drive_scale)
        for r in reals
    ]
    dt = 1.0 / (200.0 * omega_hz)
    grid = TimeGrid(dt=dt, n_steps=int(round(t_max / dt)))
    vecs = propagate_batch(models, SIGMA0, grid, 1)
    times = grid.sample_times(1)
    zbar = vecs[:, :, 2].mean(axis=0)
    # window of ~2 Rabi periods
    return coherence_time_1e(times, zbar, window=max(2, int(2.0 / (omega_hz * dt))))


def extension_ratio(sigma: float) -> tuple[float, float, float]:
    f_m = float(DRIVE.omega_m)
    eps = float(DRIVE.epsilon_m)
    sig = SignalConfig(g=(2e6, 0.0, 0.0), omega_s=2.31e9, phi_s=0.0)
    t_off, z_off = ccdd_zbar(sigma, None, 10e-6)
    t_on, z_on = ccdd_zbar(sigma, sig, 10e-6)
    t1e_off = sideband_coherence_time(t_off, z_off, [f_m - eps, f_m + eps], window=2000)
    t1e_on = sideband_coherence_time(t_on, z_on, [f_m - 1e6, f_m + 1e6], window=2000)
    return t1e_off, t1e_on, t1e_on / t1e_off


def joint_margin(t_ccdd: float, t_bare: float) -> float:
    """Smallest normalized distance to either window edge (>0 = inside both)."""
    ccdd = min(t_ccdd - 0.6e-6, 1.5e-6 - t_ccdd) / 0.45e-6
    bare = min(t_bare - 0.7 * BARE_TARGET, 1.3 * BARE_TARGET - t_bare) / (0.3 * BARE_TARGET)
    return min(ccdd, bare)


def main() -> None:
    t_start = time.time()
    omega_bare = 100e6  # shared drive rate
    sigmas = np.array([0.07, 0.075, 0.08, 0.085, 0.09, 0.095])
    best = (-math.inf, None)
    for s in sigmas:
        t_c = ccdd_t1e(s)
        t_b = bare_t1e(omega_bare, s)
        m = joint_margin(t_c, t_b)
        best = max(best, (m, s))
        print(f"sigma={s:.4f}  ccdd={t_c*1e6:.3f} us  bare={t_b*1e9:.2f} ns  margin={m:+.2f}")

    sigma_cal = float(best[1])
    print(f"\ncalibrated sigma        = {sigma_cal}")
    print(f"calibrated bare Rabi Hz = {omega_bare:.6g}")

    t_ccdd = ccdd_t1e(sigma_cal)
    t_bare = bare_t1e(omega_bare, sigma_cal)
    t_off, t_on, ratio = extension_ratio(sigma_cal)
    print("\nverification at frozen values:")
    print(f"  bare 1/e    = {t_bare*1e9:8.2f} ns   target 36 +- 30% -> "
          f"{'PASS' if 0.7*BARE_TARGET <= t_bare <= 1.3*BARE_TARGET else 'FAIL'}")
    print(f"  ccdd 1/e    = {t_ccdd*1e6:8.3f} us   window [0.6, 1.5] -> "
          f"{'PASS' if 0.6e-6 <= t_ccdd <= 1.5e-6 else 'FAIL'}")
    print(f"  matched-window 1/e: no signal {t_off*1e6:.3f} us, signal {t_on*1e6:.3f} us, "
          f"ratio {ratio:.2f} >= 2 -> {'PASS' if ratio >= 2.0 else 'FAIL'}")
    print(f"\ntotal {time.time()-t_start:.1f} s")


if __name__ == "__main__":
    main()
