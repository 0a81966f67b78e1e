"""DFT analog codebook, DoA-based DL channel approximation, and beam selection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numerics import CMat, CVec, steering_vector

DEGENERATE_DENOMINATOR = 1e-30


class CodebookError(ValueError):
    pass


@dataclass(frozen=True)
class Codebook:
    beams: np.ndarray  # (2**bits, N_b); row k is beam k
    bits: int

    def __len__(self) -> int:
        return self.beams.shape[0]

    def __getitem__(self, k: int) -> CVec:
        return self.beams[k]

    @property
    def n_b(self) -> int:
        return self.beams.shape[1]


class BeamChoice(NamedTuple):
    index: int
    beam: CVec
    numerator_only: bool  # True when the SI denominator was degenerate or absent


def dft_codebook(n_b: int, bits: int) -> Codebook:
    """``2**bits`` DFT beams; beam k, element n is ``exp(-j*2*pi*k*n/n_b)/sqrt(n_b)``."""
    if n_b < 1 or bits < 0:
        raise CodebookError("n_b must be >= 1 and bits >= 0")
    size = 2 ** bits
    if size > n_b:
        raise CodebookError(f"a {bits}-bit DFT codebook needs at least {size} elements, got {n_b}")
    k = np.arange(size)[:, None]
    n = np.arange(n_b)[None, :]
    return Codebook(beams=np.exp(-2j * np.pi * k * n / n_b) / math.sqrt(n_b), bits=bits)


def beam_angle(k: int, n_b: int, spacing_ratio: float = 0.5) -> float:
    """Boresight of DFT beam ``k`` under the ``h.T @ v`` DL convention.

    Beam k peaks where ``sin(theta) = -k' / (n_b * spacing_ratio)`` with
    ``k'`` the index wrapped into [-n_b/2, n_b/2). Returns NaN when that
    spatial frequency falls outside visible space.
    """
    kw = ((k + n_b // 2) % n_b) - n_b // 2
    s = -kw / (n_b * spacing_ratio)
    if abs(s) > 1.0:
        return float("nan")
    return math.asin(s)


def approx_dl_channel(theta_hat: float, n_b: int, spacing_ratio: float = 0.5) -> CVec:
    """Steering vector ``a(theta_hat)``; its conjugate transpose approximates the DL row.

    The equivalent DL column in :func:`build_dl_channel` convention is the
    complex conjugate of the returned vector.
    """
    return steering_vector(theta_hat, n_b, spacing_ratio)


def beam_scores(h_hat: CVec, si_hat: CMat | None, cb: Codebook):
    num = np.abs(cb.beams @ h_hat) ** 2
    if si_hat is None:
        return num, None
    den = np.sum(np.abs(si_hat @ cb.beams.T) ** 2, axis=0)
    return num, den


def select_beam(h_hat: CVec, si_hat: CMat | None, cb: Codebook) -> BeamChoice:
    """Exhaustive search for the beam maximizing ``|h^T v|^2 / ||H_si v||^2``.

    ``h_hat`` follows the DL column convention (``h_hat.T @ v``). With
    ``si_hat=None`` there is no SI to trade against and only the numerator
    counts; the same fallback applies when every denominator is below 1e-30.
    Ties resolve to the lowest index.
    """
    num, den = beam_scores(np.asarray(h_hat, dtype=np.complex128), si_hat, cb)
    if den is None or np.all(den < DEGENERATE_DENOMINATOR):
        k = int(np.argmax(num))
        return BeamChoice(k, cb.beams[k], True)
    # A beam with no measurable SI leakage beats any finite ratio.
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den >= DEGENERATE_DENOMINATOR, num / den, np.where(num > 0, np.inf, 0.0))
    k = int(np.argmax(ratio))
    return BeamChoice(k, cb.beams[k], False)
