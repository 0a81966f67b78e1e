import math

import numpy as np
import pytest

from fdbeam import doa
from fdbeam.doa import SnapshotBlock
from fdbeam.numerics import ContractError, DimensionError, steering_vector

GRID = doa.default_grid()
STEP = GRID[1] - GRID[0]


def source_block(theta, m=2, L=400, noise=0.0, rng=None, amp=1.0):
    rng = rng or np.random.default_rng(0)
    s = np.exp(1j * rng.uniform(0, 2 * np.pi, L))
    y = amp * np.outer(steering_vector(theta, m), s)
    if noise:
        y = y + math.sqrt(noise / 2) * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return SnapshotBlock(y, noise)


def test_grid_resolution():
    assert GRID.size == 3143 and STEP < 1e-3
    assert GRID[0] == -math.pi / 2 and GRID[-1] == math.pi / 2


def test_sample_covariance_cases():
    np.testing.assert_array_equal(doa.sample_covariance(SnapshotBlock(np.zeros((2, 5)))), np.zeros((2, 2)))
    y = np.array([[1 + 1j], [2 - 1j]])
    np.testing.assert_allclose(doa.sample_covariance(SnapshotBlock(y)), y @ y.conj().T)
    y2 = np.array([[1, 1j], [2, -1]])
    manual = np.array([[1 + 1, 2 - 1j], [2 + 1j, 4 + 1]]) / 2  # sum of y_l y_l^H over columns
    np.testing.assert_allclose(doa.sample_covariance(SnapshotBlock(y2)), manual)
    with pytest.raises(DimensionError):
        doa.sample_covariance(SnapshotBlock(np.zeros((2, 0))))


def test_sample_covariance_psd():
    rng = np.random.default_rng(1)
    for _ in range(50):
        y = rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7))
        r = doa.sample_covariance(SnapshotBlock(y))
        np.testing.assert_allclose(r, r.conj().T)
        assert np.linalg.eigvalsh(r).min() >= -1e-12 * np.trace(r).real


def test_noise_subspace_orthogonal_to_source():
    a = steering_vector(0.4, 4)
    r = np.outer(a, a.conj()) + 0.1 * np.eye(4)
    un = doa.noise_subspace(r, 1)
    assert un.shape == (4, 3)
    assert np.linalg.norm(un.conj().T @ a) < 1e-8

    un_i = doa.noise_subspace(np.eye(3), 1)
    np.testing.assert_allclose(un_i.conj().T @ un_i, np.eye(2), atol=1e-12)

    r_hat = doa.sample_covariance(source_block(-0.7, m=3, L=4000, noise=1e-3, rng=np.random.default_rng(2)))
    assert np.linalg.norm(doa.noise_subspace(r_hat).conj().T @ steering_vector(-0.7, 3)) < 0.03
    with pytest.raises(ContractError):
        doa.noise_subspace(np.eye(2), 2)


def test_spectrum_peak_and_flat_cases():
    a = steering_vector(0.25, 2)
    un = np.array([[-a[1].conj()], [a[0].conj()]])  # orthogonal complement of a
    vals = doa.music_spectrum(un, GRID, 2)
    assert abs(GRID[np.argmax(vals)] - 0.25) <= STEP / 2
    flat = doa.music_spectrum(np.eye(2), GRID, 2)
    np.testing.assert_allclose(flat, 1.0)
    with pytest.raises(ContractError):
        doa.music_spectrum(np.eye(2), [], 2)


def test_spectrum_two_element_hand_value():
    # u_n = e_2 gives a^H u u^H a = |a_1|^2 = 1/2 for every angle
    vals = doa.music_spectrum(np.array([[0.0], [1.0]]), [-0.3, 0.0, 1.1], 2)
    np.testing.assert_allclose(vals, 2.0)
    u = np.array([[1.0], [-1.0]]) / math.sqrt(2)
    theta = 0.3
    phase = math.pi * math.sin(theta)
    den = abs(1 - complex(math.cos(phase), math.sin(phase))) ** 2 / 4
    assert doa.music_spectrum(u, [theta], 2)[0] == pytest.approx(1 / den)


def test_spectrum_cap():
    a = steering_vector(0.0, 2)
    un = np.array([[-a[1].conj()], [a[0].conj()]])
    vals = doa.music_spectrum(un, [0.0], 2, cap=1e6)
    assert vals[0] == 1e6


def test_noiseless_estimate():
    res = doa.estimate_los_doa(source_block(0.3))
    assert abs(res.theta_hat - 0.3) <= STEP
    assert not res.low_confidence
    assert len(res.spectrum) == GRID.size


def test_source_on_grid_point():
    theta = float(GRID[2000])
    assert doa.estimate_los_doa(source_block(theta), GRID).theta_hat == theta


def test_noiseless_error_bounded_by_half_step():
    rng = np.random.default_rng(4)
    for theta in rng.uniform(-1.2, 1.2, 30):
        assert abs(doa.estimate_los_doa(source_block(theta, rng=rng)).theta_hat - theta) <= STEP / 2 + 1e-12


def test_pure_noise_low_confidence():
    rng = np.random.default_rng(5)
    flagged = 0
    for _ in range(50):
        y = rng.standard_normal((2, 400)) + 1j * rng.standard_normal((2, 400))
        flagged += doa.estimate_los_doa(SnapshotBlock(y, 2.0)).low_confidence
    assert flagged == 50


def test_scale_invariance():
    rng = np.random.default_rng(6)
    block = source_block(-0.45, m=3, noise=0.05, rng=rng)
    base = doa.estimate_los_doa(block).theta_hat
    for c in (1e-6, 3 - 4j, 1e5j):
        assert doa.estimate_los_doa(SnapshotBlock(c * block.samples)).theta_hat == base


def test_mse_falls_with_snr():
    rng = np.random.default_rng(7)
    mse = []
    for noise in (1.0, 0.1, 0.01):
        err = [doa.estimate_los_doa(source_block(t, L=40, noise=noise, rng=rng)).theta_hat - t
               for t in rng.uniform(-1.0, 1.0, 60)]
        mse.append(np.mean(np.square(err)))
    assert mse[0] > mse[1] > mse[2]
