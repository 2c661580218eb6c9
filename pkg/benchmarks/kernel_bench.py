"""Propagation-kernel benchmark: numba backend vs the numpy fallback.

The backend is chosen at import time from CCDD_SENSE_NO_NUMBA, so each
measurement runs in a fresh subprocess.  The workload is the shape that
dominates real runs: a disorder ensemble propagated through one
pulsewidth window, plus one long single trajectory.

Usage: python benchmarks/kernel_bench.py [--repeat N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = """
import json, time
import numpy as np
from ccdd_sense import backend
from ccdd_sense.dynamics import TimeGrid, propagate_batch, rotating_frame_model
from ccdd_sense.noise import NoiseConfig, sample_realizations
from ccdd_sense.sequences import SIGMA0
from ccdd_sense.spincore import DriveConfig, SignalConfig

drive = DriveConfig(theta_m=np.pi / 2)
signal = SignalConfig(g=(1e6, 0.0, 0.0), omega_s=2.31e9, phi_s=0.0)
reals = sample_realizations(NoiseConfig(), 64)
models = [rotating_frame_model(drive, signal, detuning_hz=r.detuning,
                               drive_scale=r.drive_scale) for r in reals]
dt = 1.0 / (200.0 * float(drive.Omega))
grid_batch = TimeGrid(dt=dt, n_steps=19_000)      # one 950 ns window
grid_long = TimeGrid(dt=dt, n_steps=800_000)      # one 4 us trajectory

# warmup compiles the kernels on the numba path; cheap on numpy
propagate_batch(models[:2], SIGMA0, TimeGrid(dt=dt, n_steps=200), stride=20)

t0 = time.perf_counter()
propagate_batch(models, SIGMA0, grid_batch, stride=19)
t_batch = time.perf_counter() - t0

t0 = time.perf_counter()
propagate_batch(models[:1], SIGMA0, grid_long, stride=200)
t_long = time.perf_counter() - t0

print(json.dumps({"backend": backend(), "ensemble_s": t_batch, "long_s": t_long}))
"""


def measure(no_numba: bool) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["CCDD_SENSE_NO_NUMBA"] = "1"
    else:
        env.pop("CCDD_SENSE_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKER], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3, help="best-of-N timing")
    args = parser.parse_args()

    results = {}
    for no_numba in (False, True):
        runs = [measure(no_numba) for _ in range(args.repeat)]
        name = runs[0]["backend"]
        results[name] = {
            "ensemble_s": min(r["ensemble_s"] for r in runs),
            "long_s": min(r["long_s"] for r in runs),
        }
    print(f"{'workload':<28}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for key, label in (("ensemble_s", "64-model ensemble, 950 ns"),
                       ("long_s", "single trajectory, 4 us")):
        tn = results.get("numba", {}).get(key)
        tp = results.get("numpy", {}).get(key)
        if tn and tp:
            print(f"{label:<28}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
