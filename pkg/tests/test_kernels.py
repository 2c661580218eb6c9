"""Propagation kernels: backend selection, path agreement, closed forms."""

import os

import numpy as np
import pytest

from ccdd_sense import backend
from ccdd_sense import _kernels as K


def _random_rot_params(rng, m):
    p = np.zeros((m, K.ROT_NPAR))
    p[:, 0] = rng.uniform(-1e8, 1e8, m)
    p[:, 1] = rng.uniform(-1e8, 1e8, m)
    p[:, 2] = rng.uniform(-1e8, 1e8, m)
    p[:, 3] = rng.uniform(0, 5e7, m)
    p[:, 4] = rng.uniform(1e8, 1e9, m)
    p[:, 5] = rng.uniform(0, 2e7, m)
    p[:, 6] = rng.uniform(1e6, 5e8, m)
    p[:, 7] = rng.uniform(0, 2 * np.pi, m)
    p[:, 8] = rng.integers(0, 3, m).astype(float)
    return p


def _random_sigma0(rng, m):
    v = rng.normal(size=(m, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_backend_matches_env():
    env = os.environ.get("CCDD_SENSE_NO_NUMBA", "").strip()
    expected = "numpy" if env not in ("", "0") else "numba"
    assert backend() == expected


def test_seq_and_vec_implementations_agree():
    # same rotations applied in a different evaluation order
    rng = np.random.default_rng(11)
    params = _random_rot_params(rng, 6)
    sigma0 = _random_sigma0(rng, 6)
    a = K.propagate_bloch_with("seq", K.ROT, params, sigma0, 0.0, 1e-9, 400, stride=40)
    b = K.propagate_bloch_with("vec", K.ROT, params, sigma0, 0.0, 1e-9, 400, stride=40)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_bloch_and_spinor_paths_agree():
    rng = np.random.default_rng(12)
    params = _random_rot_params(rng, 5)
    sigma0 = _random_sigma0(rng, 5)
    a = K.propagate_bloch(K.ROT, params, sigma0, 0.0, 5e-10, 800, stride=80)
    b = K.propagate_spinor(K.ROT, params, sigma0, 0.0, 5e-10, 800, stride=80)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-8)


def test_constant_field_closed_form():
    # static x field: sigma = (0, 0, 1) precesses as y = -sin, z = cos
    h = 2 * np.pi * 25e6
    params = np.zeros((1, K.ROT_NPAR))
    params[0, 0] = h
    dt, n = 1e-10, 2000
    out = K.propagate_bloch(K.ROT, params, np.array([[0.0, 0.0, 1.0]]), 0.0, dt, n, stride=100)
    t = dt * 100 * np.arange(n // 100 + 1)
    np.testing.assert_allclose(out[0, :, 1], -np.sin(h * t), atol=1e-9)
    np.testing.assert_allclose(out[0, :, 2], np.cos(h * t), atol=1e-9)
    np.testing.assert_allclose(out[0, :, 0], 0.0, atol=1e-12)


def test_norm_is_conserved():
    rng = np.random.default_rng(13)
    params = _random_rot_params(rng, 4)
    out = K.propagate_bloch(K.ROT, params, _random_sigma0(rng, 4), 0.0, 1e-10, 3000, stride=300)
    norms = np.linalg.norm(out, axis=2)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_lab_kind_field_is_used():
    # lab params with zero drive reduce to a static z field: z is frozen,
    # x-y precess at hz0
    params = np.zeros((1, K.LAB_NPAR))
    params[0, 10] = 2 * np.pi * 50e6
    out = K.propagate_bloch(K.LAB, params, np.array([[1.0, 0.0, 0.0]]), 0.0, 1e-10, 1000, stride=100)
    t = 1e-10 * 100 * np.arange(11)
    np.testing.assert_allclose(out[0, :, 0], np.cos(params[0, 10] * t), atol=1e-9)
    np.testing.assert_allclose(out[0, :, 2], 0.0, atol=1e-12)


def test_spinor_from_bloch_roundtrip():
    rng = np.random.default_rng(14)
    sigma = _random_sigma0(rng, 32)
    psi = K.spinor_from_bloch(sigma)
    ab = np.conj(psi[:, 0]) * psi[:, 1]
    x = 2 * ab.real
    y = 2 * ab.imag
    z = np.abs(psi[:, 0]) ** 2 - np.abs(psi[:, 1]) ** 2
    np.testing.assert_allclose(np.stack([x, y, z], axis=1), sigma, atol=1e-12)


def test_argument_validation():
    good = np.zeros((1, K.ROT_NPAR))
    s0 = np.array([[0.0, 0.0, 1.0]])
    with pytest.raises(ValueError):
        K.propagate_bloch(K.ROT, np.zeros((1, 4)), s0, 0.0, 1e-9, 10)
    with pytest.raises(ValueError):
        K.propagate_bloch(K.ROT, good, s0, 0.0, 1e-9, 10, stride=3)  # 3 does not divide 10
    with pytest.raises(ValueError):
        K.propagate_bloch(K.ROT, good, s0, 0.0, 1e-9, -1)
