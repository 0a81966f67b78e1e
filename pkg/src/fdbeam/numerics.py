"""Complex linear algebra helpers: ULA steering vectors and a Jacobi Hermitian eigensolver.

Vectors and matrices are plain ``numpy`` complex128 arrays; the helpers
below only add the dimension checks the rest of the package relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CVec = np.ndarray
CMat = np.ndarray

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-8


class DimensionError(ValueError):
    """Raised when array shapes are incompatible with an operation."""


class ContractError(ValueError):
    """Raised when an input violates an operation's precondition."""


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: CMat  # column k pairs with eigenvalues[k]

    def reconstruct(self) -> CMat:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_cvec(x) -> CVec:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty vector, got shape {v.shape}")
    return v


def as_cmat(x) -> CMat:
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or 0 in a.shape:
        raise DimensionError(f"expected a non-empty matrix, got shape {a.shape}")
    return a


def steering_vector(theta: float, m: int, spacing_ratio: float = 0.5) -> CVec:
    """Unit-norm ULA response ``a_m(theta)``.

    Element ``k`` is ``exp(j*2*pi*spacing_ratio*k*sin(theta)) / sqrt(m)``.
    """
    if m < 1:
        raise DimensionError(f"element count must be >= 1, got {m}")
    if spacing_ratio <= 0:
        raise ContractError(f"spacing_ratio must be positive, got {spacing_ratio}")
    k = np.arange(m)
    return np.exp(2j * np.pi * spacing_ratio * k * np.sin(theta)) / np.sqrt(m)


def steering_matrix(thetas, m: int, spacing_ratio: float = 0.5) -> CMat:
    """Stack of steering vectors, one column per angle (m x len(thetas))."""
    if m < 1:
        raise DimensionError(f"element count must be >= 1, got {m}")
    if spacing_ratio <= 0:
        raise ContractError(f"spacing_ratio must be positive, got {spacing_ratio}")
    thetas = np.asarray(thetas, dtype=float)
    k = np.arange(m)[:, None]
    return np.exp(2j * np.pi * spacing_ratio * k * np.sin(thetas)[None, :]) / np.sqrt(m)


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise DimensionError("matmul expects vectors or matrices")
    inner_a = a.shape[-1]
    inner_b = b.shape[0]
    if inner_a != inner_b:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def hermitian_transpose(a) -> CMat:
    return as_cmat(a).conj().T


def scale(a, alpha: complex) -> np.ndarray:
    return complex(alpha) * np.asarray(a, dtype=np.complex128)


def add(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def _off_diagonal_norm(a: CMat) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: CMat, v: CMat, p: int, q: int) -> None:
    # Zero a[p, q] with G = diag(1, e^{-j phi}) @ [[c, s], [-s, c]], in place.
    apq = a[p, q]
    mag = abs(apq)
    if mag < np.finfo(float).tiny:
        return
    phase = apq / mag
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * mag)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = g.conj().T @ a[idx, :]
    v[:, idx] = v[:, idx] @ g
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def hermitian_eig(a) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in descending order (ties keep the original
    diagonal position) and each eigenvector is phase-normalized so that its
    first nonzero component is real and non-negative.
    """
    a = as_cmat(a)
    n, m = a.shape
    if n != m:
        raise ContractError(f"hermitian_eig needs a square matrix, got {a.shape}")
    norm = float(np.linalg.norm(a))
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_TOL * norm:
        raise ContractError("matrix is not Hermitian within tolerance")

    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=np.complex128)
    if norm > 0.0:
        for _ in range(JACOBI_MAX_SWEEPS):
            if _off_diagonal_norm(work) <= JACOBI_TOL * norm:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    _rotate(work, vecs, p, q)

    values = np.real(np.diag(work)).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vecs = vecs[:, order]
    for k in range(n):
        col = vecs[:, k]
        cutoff = 1e-12 * np.max(np.abs(col))
        first = int(np.argmax(np.abs(col) > cutoff))
        x = col[first]
        vecs[:, k] = col * (abs(x) / x)
    return EigenDecomposition(eigenvalues=values, eigenvectors=vecs)
