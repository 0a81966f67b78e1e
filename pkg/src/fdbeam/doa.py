"""MUSIC estimation of the dominant (LoS) direction of arrival."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import CMat, ContractError, DimensionError, as_cmat, hermitian_eig, steering_matrix

GRID_POINTS = 3143
DENOMINATOR_FLOOR = 1e-18
SPECTRUM_CAP = 1e18
LOW_CONFIDENCE_RATIO = 2.0


@dataclass(frozen=True)
class SnapshotBlock:
    samples: CMat  # M_b x L, one column per channel use
    noise_power: float = 0.0  # mW


@dataclass(frozen=True)
class MusicResult:
    theta_hat: float
    grid: np.ndarray
    values: np.ndarray
    signal_eigenvalue: float
    noise_eigenvalues: np.ndarray
    low_confidence: bool

    @property
    def spectrum(self) -> list[tuple[float, float]]:
        return list(zip(self.grid.tolist(), self.values.tolist()))


def default_grid(points: int = GRID_POINTS) -> np.ndarray:
    """Uniform search grid over [-pi/2, pi/2]; 3143 points gives a step just under 1 mrad."""
    return np.linspace(-np.pi / 2, np.pi / 2, points)


@lru_cache(maxsize=16)
def _cached_steering(grid_key: tuple, m: int, spacing_ratio: float) -> np.ndarray:
    lo, hi, n = grid_key
    return steering_matrix(np.linspace(lo, hi, n), m, spacing_ratio)


def _grid_steering(grid: np.ndarray, m: int, spacing_ratio: float) -> np.ndarray:
    # Uniform grids (the common case) reuse one cached steering matrix.
    n = grid.size
    if n > 1 and np.array_equal(grid, np.linspace(grid[0], grid[-1], n)):
        return _cached_steering((float(grid[0]), float(grid[-1]), n), m, spacing_ratio)
    return steering_matrix(grid, m, spacing_ratio)


def sample_covariance(y: SnapshotBlock) -> CMat:
    samples = np.asarray(y.samples, dtype=np.complex128)
    if samples.ndim != 2 or samples.shape[1] == 0:
        raise DimensionError("snapshot block must hold at least one column")
    r = samples @ samples.conj().T / samples.shape[1]
    return 0.5 * (r + r.conj().T)


def noise_subspace(r: CMat, num_sources: int = 1) -> CMat:
    r = as_cmat(r)
    m = r.shape[0]
    if not 0 <= num_sources < m:
        raise ContractError(f"num_sources must be in [0, {m - 1}], got {num_sources}")
    return hermitian_eig(r).eigenvectors[:, num_sources:]


def music_spectrum(u_n: CMat, grid, m_b: int, spacing_ratio: float = 0.5,
                   cap: float = SPECTRUM_CAP) -> np.ndarray:
    """Pseudo-spectrum ``1 / (a^H U_n U_n^H a)`` evaluated on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ContractError("search grid is empty")
    u_n = np.asarray(u_n, dtype=np.complex128)
    if u_n.shape[0] != m_b:
        raise DimensionError(f"noise subspace has {u_n.shape[0]} rows, expected {m_b}")
    a = _grid_steering(grid, m_b, spacing_ratio)
    proj = u_n.conj().T @ a
    den = np.sum(np.abs(proj) ** 2, axis=0)
    out = np.full(grid.size, cap)
    ok = den >= DENOMINATOR_FLOOR
    out[ok] = np.minimum(1.0 / den[ok], cap)
    return out


def estimate_los_doa(y: SnapshotBlock, grid=None, spacing_ratio: float = 0.5,
                     low_confidence_ratio: float = LOW_CONFIDENCE_RATIO) -> MusicResult:
    """Single-source MUSIC estimate.

    The result is flagged low-confidence when the ratio of the two largest
    covariance eigenvalues falls below ``low_confidence_ratio``; callers
    decide whether to trust it.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    r = sample_covariance(y)
    m_b = r.shape[0]
    if m_b < 2:
        raise ContractError("MUSIC needs at least two receive elements")
    eig = hermitian_eig(r)
    values = music_spectrum(eig.eigenvectors[:, 1:], grid, m_b, spacing_ratio)
    k = int(np.argmax(values))  # first maximum = smallest angle on an ascending grid
    eta = eig.eigenvalues
    low = eta[0] <= 0.0 or eta[0] < low_confidence_ratio * eta[1]
    return MusicResult(
        theta_hat=float(grid[k]),
        grid=grid,
        values=values,
        signal_eigenvalue=float(eta[0]),
        noise_eigenvalues=eta[1:].copy(),
        low_confidence=bool(low),
    )
