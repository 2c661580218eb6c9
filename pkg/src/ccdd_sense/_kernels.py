"""Propagation kernels for batched Bloch-vector and spinor evolution.

Two field models are hard-coded for speed; both are evaluated at the
midpoint of every step and advanced by an exact rotation (SO(3) Rodrigues
step or the equivalent SU(2) unitary).

Rotating-frame model, parameter row layout (ROT_NPAR columns):
    0  h0x     static field x (rad/s)
    1  h0y     static field y (rad/s)
    2  h0z     static field z (rad/s)
    3  delta   amplitude of the detuning term, rotates in the y-z plane (rad/s)
    4  w_rot   rotation rate of the detuning term (rad/s)
    5  s_amp   signal tone amplitude (rad/s)
    6  s_freq  signal tone frequency (rad/s)
    7  s_phase signal tone phase (rad)
    8  s_axis  axis index of the signal tone (0.0, 1.0 or 2.0)

    h(t) = (h0x, h0y + delta*sin(w_rot*t), h0z + delta*cos(w_rot*t))
           + s_amp*cos(s_freq*t + s_phase) * e_axis

Lab-frame model, parameter row layout (LAB_NPAR columns):
    0  amp2    transverse drive field amplitude (rad/s)
    1  beta    phase-modulation index (dimensionless)
    2  w0      carrier frequency (rad/s)
    3  w_m     modulation frequency (rad/s)
    4  theta   modulation phase (rad)
    5  gx2     signal field amplitude on x (rad/s)
    6  gy2     signal field amplitude on y (rad/s)
    7  gz2     signal field amplitude on z (rad/s)
    8  w_s     signal frequency (rad/s)
    9  phi_s   signal phase (rad)
    10 hz0     static z field: level splitting plus detuning (rad/s)

    c(t) = cos(w_s*t + phi_s)
    h(t) = (amp2*cos(w0*t - beta*sin(w_m*t - theta)) + gx2*c(t),
            gy2*c(t),
            hz0 + gz2*c(t))

Field components follow the convention H = (1/2) h . sigma, so |h| is the
precession rate in rad/s and sigma_dot = h x sigma.

The sequential kernels are compiled with numba when it is importable and
the environment variable CCDD_SENSE_NO_NUMBA is unset (or "0").  The
fallback path is a vectorised time-major numpy implementation that batches
across trajectories; results agree with the compiled path to floating
point reordering.
"""

from __future__ import annotations

import math
import os

import numpy as np

ROT = 0
LAB = 1
ROT_NPAR = 9
LAB_NPAR = 11

_env = os.environ.get("CCDD_SENSE_NO_NUMBA", "").strip()
_numba_disabled = _env not in ("", "0")

try:
    if _numba_disabled:
        raise ImportError("numba disabled by CCDD_SENSE_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator stand-in
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    """Name of the active propagation backend."""
    return "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# sequential kernels (numba-compiled when available)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _field_at(kind, p, t):
    if kind == ROT:
        hx = p[0]
        hy = p[1] + p[3] * math.sin(p[4] * t)
        hz = p[2] + p[3] * math.cos(p[4] * t)
        if p[5] != 0.0:
            tone = p[5] * math.cos(p[6] * t + p[7])
            ax = int(p[8])
            if ax == 0:
                hx += tone
            elif ax == 1:
                hy += tone
            else:
                hz += tone
        return hx, hy, hz
    c = math.cos(p[8] * t + p[9])
    hx = p[0] * math.cos(p[2] * t - p[1] * math.sin(p[3] * t - p[4])) + p[5] * c
    hy = p[6] * c
    hz = p[10] + p[7] * c
    return hx, hy, hz


@njit(cache=True)
def _bloch_seq(kind, params, sigma0, t0, dt, n_steps, stride, out):
    m_count = params.shape[0]
    for m in range(m_count):
        p = params[m]
        x = sigma0[m, 0]
        y = sigma0[m, 1]
        z = sigma0[m, 2]
        out[m, 0, 0] = x
        out[m, 0, 1] = y
        out[m, 0, 2] = z
        k = 1
        for i in range(n_steps):
            t_mid = t0 + (i + 0.5) * dt
            hx, hy, hz = _field_at(kind, p, t_mid)
            norm = math.sqrt(hx * hx + hy * hy + hz * hz)
            if norm > 0.0:
                ang = norm * dt
                nx = hx / norm
                ny = hy / norm
                nz = hz / norm
                c = math.cos(ang)
                s = math.sin(ang)
                dot = (1.0 - c) * (nx * x + ny * y + nz * z)
                cx = ny * z - nz * y
                cy = nz * x - nx * z
                cz = nx * y - ny * x
                x = x * c + cx * s + nx * dot
                y = y * c + cy * s + ny * dot
                z = z * c + cz * s + nz * dot
            if (i + 1) % stride == 0:
                out[m, k, 0] = x
                out[m, k, 1] = y
                out[m, k, 2] = z
                k += 1


@njit(cache=True)
def _spinor_seq(kind, params, psi0, t0, dt, n_steps, stride, out):
    m_count = params.shape[0]
    for m in range(m_count):
        p = params[m]
        a = psi0[m, 0]
        b = psi0[m, 1]
        out[m, 0, 0] = 2.0 * (a.conjugate() * b).real
        out[m, 0, 1] = 2.0 * (a.conjugate() * b).imag
        out[m, 0, 2] = (a * a.conjugate()).real - (b * b.conjugate()).real
        k = 1
        for i in range(n_steps):
            t_mid = t0 + (i + 0.5) * dt
            hx, hy, hz = _field_at(kind, p, t_mid)
            norm = math.sqrt(hx * hx + hy * hy + hz * hz)
            if norm > 0.0:
                half = 0.5 * norm * dt
                c = math.cos(half)
                s = math.sin(half)
                nx = hx / norm
                ny = hy / norm
                nz = hz / norm
                u00 = complex(c, -s * nz)
                u01 = complex(-s * ny, -s * nx)
                u10 = complex(s * ny, -s * nx)
                u11 = complex(c, s * nz)
                a2 = u00 * a + u01 * b
                b2 = u10 * a + u11 * b
                a = a2
                b = b2
            if (i + 1) % stride == 0:
                out[m, k, 0] = 2.0 * (a.conjugate() * b).real
                out[m, k, 1] = 2.0 * (a.conjugate() * b).imag
                out[m, k, 2] = (a * a.conjugate()).real - (b * b.conjugate()).real
                k += 1


# ---------------------------------------------------------------------------
# vectorised time-major fallback (pure numpy)
# ---------------------------------------------------------------------------


def _field_batch(kind, params, t):
    """Field for every trajectory at one instant; returns (M,), (M,), (M,)."""
    p = params
    if kind == ROT:
        hx = p[:, 0].copy()
        hy = p[:, 1] + p[:, 3] * np.sin(p[:, 4] * t)
        hz = p[:, 2] + p[:, 3] * np.cos(p[:, 4] * t)
        tone = p[:, 5] * np.cos(p[:, 6] * t + p[:, 7])
        ax = p[:, 8]
        hx = hx + np.where(ax == 0.0, tone, 0.0)
        hy = hy + np.where(ax == 1.0, tone, 0.0)
        hz = hz + np.where(ax == 2.0, tone, 0.0)
        return hx, hy, hz
    c = np.cos(p[:, 8] * t + p[:, 9])
    hx = p[:, 0] * np.cos(p[:, 2] * t - p[:, 1] * np.sin(p[:, 3] * t - p[:, 4])) + p[:, 5] * c
    hy = p[:, 6] * c
    hz = p[:, 10] + p[:, 7] * c
    return hx, hy, hz


def _bloch_vec(kind, params, sigma0, t0, dt, n_steps, stride, out):
    x = sigma0[:, 0].astype(np.float64).copy()
    y = sigma0[:, 1].astype(np.float64).copy()
    z = sigma0[:, 2].astype(np.float64).copy()
    out[:, 0, 0] = x
    out[:, 0, 1] = y
    out[:, 0, 2] = z
    k = 1
    for i in range(n_steps):
        t_mid = t0 + (i + 0.5) * dt
        hx, hy, hz = _field_batch(kind, params, t_mid)
        norm = np.sqrt(hx * hx + hy * hy + hz * hz)
        safe = np.where(norm > 0.0, norm, 1.0)
        ang = norm * dt
        nx = hx / safe
        ny = hy / safe
        nz = hz / safe
        c = np.cos(ang)
        s = np.sin(ang)
        dot = (1.0 - c) * (nx * x + ny * y + nz * z)
        cx = ny * z - nz * y
        cy = nz * x - nx * z
        cz = nx * y - ny * x
        x = x * c + cx * s + nx * dot
        y = y * c + cy * s + ny * dot
        z = z * c + cz * s + nz * dot
        if (i + 1) % stride == 0:
            out[:, k, 0] = x
            out[:, k, 1] = y
            out[:, k, 2] = z
            k += 1


def _spinor_vec(kind, params, psi0, t0, dt, n_steps, stride, out):
    a = psi0[:, 0].astype(np.complex128).copy()
    b = psi0[:, 1].astype(np.complex128).copy()

    def record(col):
        ab = np.conj(a) * b
        out[:, col, 0] = 2.0 * ab.real
        out[:, col, 1] = 2.0 * ab.imag
        out[:, col, 2] = np.abs(a) ** 2 - np.abs(b) ** 2

    record(0)
    k = 1
    for i in range(n_steps):
        t_mid = t0 + (i + 0.5) * dt
        hx, hy, hz = _field_batch(kind, params, t_mid)
        norm = np.sqrt(hx * hx + hy * hy + hz * hz)
        safe = np.where(norm > 0.0, norm, 1.0)
        half = 0.5 * norm * dt
        c = np.cos(half)
        s = np.sin(half)
        nx = hx / safe
        ny = hy / safe
        nz = hz / safe
        u00 = c - 1j * s * nz
        u01 = -s * ny - 1j * s * nx
        u10 = s * ny - 1j * s * nx
        u11 = c + 1j * s * nz
        a2 = u00 * a + u01 * b
        b2 = u10 * a + u11 * b
        a = a2
        b = b2
        if (i + 1) % stride == 0:
            record(k)
            k += 1


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------


def _check_args(kind, params, n_steps, stride):
    npar = ROT_NPAR if kind == ROT else LAB_NPAR
    if params.ndim != 2 or params.shape[1] != npar:
        raise ValueError(f"params must be (M, {npar}) for kind={kind}")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if stride < 1 or (n_steps % stride) != 0:
        raise ValueError("stride must be >= 1 and divide n_steps")


def propagate_bloch(kind, params, sigma0, t0, dt, n_steps, stride=1):
    """Advance Bloch vectors under the chosen field model.

    Returns an (M, n_steps//stride + 1, 3) array of states; row 0 is the
    initial state and subsequent rows are recorded every `stride` steps.
    """
    params = np.ascontiguousarray(params, dtype=np.float64)
    sigma0 = np.ascontiguousarray(sigma0, dtype=np.float64)
    _check_args(kind, params, n_steps, stride)
    m_count = params.shape[0]
    out = np.empty((m_count, n_steps // stride + 1, 3), dtype=np.float64)
    if HAS_NUMBA:
        _bloch_seq(kind, params, sigma0, float(t0), float(dt), n_steps, stride, out)
    else:
        _bloch_vec(kind, params, sigma0, float(t0), float(dt), n_steps, stride, out)
    return out


def spinor_from_bloch(sigma):
    """Unit Bloch vectors (M, 3) -> spinors (M, 2), global phase fixed."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    z = np.clip(sigma[:, 2], -1.0, 1.0)
    theta = np.arccos(z)
    r = np.hypot(sigma[:, 0], sigma[:, 1])
    phase = np.where(r > 0.0, np.arctan2(sigma[:, 1], sigma[:, 0]), 0.0)
    psi = np.empty((sigma.shape[0], 2), dtype=np.complex128)
    psi[:, 0] = np.cos(0.5 * theta)
    psi[:, 1] = np.exp(1j * phase) * np.sin(0.5 * theta)
    return psi


def propagate_spinor(kind, params, sigma0, t0, dt, n_steps, stride=1):
    """Same contract as propagate_bloch but integrates the SU(2) unitary.

    Serves as an independent cross-check of the Rodrigues path: the state
    is a two-component spinor and the output rows are the Bloch components
    reconstructed from it.
    """
    params = np.ascontiguousarray(params, dtype=np.float64)
    sigma0 = np.ascontiguousarray(sigma0, dtype=np.float64)
    _check_args(kind, params, n_steps, stride)
    psi0 = spinor_from_bloch(sigma0)
    m_count = params.shape[0]
    out = np.empty((m_count, n_steps // stride + 1, 3), dtype=np.float64)
    if HAS_NUMBA:
        _spinor_seq(kind, params, psi0, float(t0), float(dt), n_steps, stride, out)
    else:
        _spinor_vec(kind, params, psi0, float(t0), float(dt), n_steps, stride, out)
    return out


def propagate_bloch_with(impl, kind, params, sigma0, t0, dt, n_steps, stride=1):
    """Run a specific implementation ('seq' or 'vec'); used by benchmarks."""
    params = np.ascontiguousarray(params, dtype=np.float64)
    sigma0 = np.ascontiguousarray(sigma0, dtype=np.float64)
    _check_args(kind, params, n_steps, stride)
    out = np.empty((params.shape[0], n_steps // stride + 1, 3), dtype=np.float64)
    fn = _bloch_seq if impl == "seq" else _bloch_vec
    fn(kind, params, sigma0, float(t0), float(dt), n_steps, stride, out)
    return out
