import numpy as np
import pytest

from stokes_mac import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def reference_neg_laplacian(full, inv_h2):
    m, n = full.shape
    out = np.empty((m - 2, n - 2))
    for a in range(1, m - 1):
        for b in range(1, n - 1):
            out[a - 1, b - 1] = (
                4 * full[a, b] - full[a - 1, b] - full[a + 1, b] - full[a, b - 1] - full[a, b + 1]
            ) * inv_h2
    return out


def test_numpy_laplacian_matches_loop():
    rng = np.random.default_rng(0)
    full = rng.standard_normal((7, 9))
    np.testing.assert_allclose(_kernels.neg_laplacian_np(full, 2.5), reference_neg_laplacian(full, 2.5), rtol=1e-14)


def test_numpy_divergence_and_gradient_are_adjoint():
    rng = np.random.default_rng(1)
    n = 6
    p = rng.standard_normal((n, n))
    w1, w2 = rng.standard_normal((n - 1, n)), rng.standard_normal((n, n - 1))
    u1 = np.zeros((n + 1, n))
    u1[1:-1] = w1
    u2 = np.zeros((n, n + 1))
    u2[:, 1:-1] = w2
    gx, gy = _kernels.gradient_np(p, 3.0)
    d = _kernels.divergence_np(u1, u2, 3.0)
    assert np.vdot(gx, w1) + np.vdot(gy, w2) == pytest.approx(-np.vdot(p, d), rel=1e-13)


@needs_numba
def test_numba_kernels_match_numpy():
    rng = np.random.default_rng(2)
    n = 12
    full = rng.standard_normal((n + 1, n + 2))
    np.testing.assert_array_equal(_kernels.neg_laplacian_nb(full, 4.0), _kernels.neg_laplacian_np(full, 4.0))
    u1, u2 = rng.standard_normal((n + 1, n)), rng.standard_normal((n, n + 1))
    np.testing.assert_allclose(_kernels.divergence_nb(u1, u2, 2.0), _kernels.divergence_np(u1, u2, 2.0), rtol=1e-15)
    p = rng.standard_normal((n, n))
    for a, b in zip(_kernels.gradient_nb(p, 2.0), _kernels.gradient_np(p, 2.0)):
        np.testing.assert_allclose(a, b, rtol=1e-15)


def test_env_flag_disables_numba(monkeypatch):
    monkeypatch.setenv("STOKES_MAC_NUMBA", "0")
    assert not _kernels.numba_enabled()
    monkeypatch.setenv("STOKES_MAC_NUMBA", "1")
    assert _kernels.numba_enabled() == _kernels.HAVE_NUMBA


def test_dispatch_gives_same_values_either_way(monkeypatch):
    rng = np.random.default_rng(3)
    full = rng.standard_normal((9, 10))
    monkeypatch.setenv("STOKES_MAC_NUMBA", "0")
    a = _kernels.neg_laplacian(full, 1.0)
    monkeypatch.setenv("STOKES_MAC_NUMBA", "1")
    b = _kernels.neg_laplacian(full, 1.0)
    np.testing.assert_array_equal(a, b)
