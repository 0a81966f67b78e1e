"""Joint analog/digital SI canceller design and RF saturation checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import CMat, CVec


@dataclass(frozen=True)
class SaturationSpec:
    lambda_b: float  # mW, per BS RX chain
    lambda_u: float  # mW, UE RX chain

    def __post_init__(self):
        if self.lambda_b <= 0 or self.lambda_u <= 0:
            raise ValueError("saturation thresholds must be positive")


@dataclass(frozen=True)
class CancellerState:
    c_b: CVec  # analog taps, zero beyond active_taps
    d_b: CVec  # digital
    c_u: complex
    d_u: complex
    active_taps: int
    feasible: bool


def estimate_with_error(true_value, nmse_db: float, rng: np.random.Generator):
    """Noisy estimate: adds CN noise at ``nmse_db`` relative to the mean entry power.

    ``nmse_db = -inf`` returns an exact copy without touching ``rng``.
    """
    scalar = np.isscalar(true_value)
    x = np.asarray(true_value, dtype=np.complex128)
    if math.isinf(nmse_db) and nmse_db < 0:
        return complex(x) if scalar else x.copy()
    var = 10.0 ** (nmse_db / 10.0) * float(np.mean(np.abs(x) ** 2))
    err = math.sqrt(var / 2.0) * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))
    out = x + err
    return complex(out) if scalar else out


def _leak(h_si, v) -> np.ndarray:
    h_si = np.asarray(h_si, dtype=np.complex128)
    if h_si.ndim == 0:
        return np.atleast_1d(h_si * v)
    return h_si @ np.asarray(v, dtype=np.complex128)


def post_analog_power(h_si, v, c, p_tx: float) -> np.ndarray:
    """Per-chain SI power at the RX RF inputs, ``p_tx * |[H v + c]_j|^2``."""
    return p_tx * np.abs(_leak(h_si, v) + np.atleast_1d(c)) ** 2


def verify_saturation(h_si, v, c, p_tx: float, lam: float) -> np.ndarray:
    """Per-chain flags, True when the chain stays at or below ``lam``."""
    return post_analog_power(h_si, v, c, p_tx) <= lam


def _ue_passes(si_ue_hat: complex, c_u: complex, p_u: float, lam_u: float) -> bool:
    return p_u * abs(si_ue_hat + c_u) ** 2 <= lam_u


def design_cancellers(
    si_bs_hat: CMat,
    si_ue_hat: complex,
    v: CVec,
    p_b: float,
    p_u: float,
    sat: SaturationSpec,
    max_taps: int | None = None,
) -> CancellerState:
    """Smallest analog tap count meeting both saturation constraints.

    Tries partial cancellation of the first ``n`` chains for
    ``n = 1 .. min(max_taps, M_b - 1)``, then full cancellation of all M_b
    chains if ``max_taps`` allows it. Digital cancellers take whatever
    residual the analog stage leaves. ``max_taps=None`` means no cap.
    """
    leak = np.asarray(si_bs_hat, dtype=np.complex128) @ np.asarray(v, dtype=np.complex128)
    m_b = leak.size
    cap = m_b if max_taps is None else max_taps
    c_u = -si_ue_hat
    d_u = -(si_ue_hat + c_u)
    ue_ok = _ue_passes(si_ue_hat, c_u, p_u, sat.lambda_u)

    for n in range(1, min(cap, m_b - 1) + 1):
        c_b = np.zeros(m_b, dtype=np.complex128)
        c_b[:n] = -leak[:n]
        if ue_ok and np.all(p_b * np.abs(leak + c_b) ** 2 <= sat.lambda_b):
            return CancellerState(c_b, -(leak + c_b), c_u, d_u, n, True)

    if cap >= m_b:
        c_b = -leak
        feasible = ue_ok and bool(np.all(p_b * np.abs(leak + c_b) ** 2 <= sat.lambda_b))
        return CancellerState(c_b, -(leak + c_b), c_u, d_u, m_b, feasible)

    # Tap budget exhausted below M_b: report the largest attempt as infeasible.
    n = min(cap, m_b - 1)
    c_b = np.zeros(m_b, dtype=np.complex128)
    c_b[:n] = -leak[:n]
    return CancellerState(c_b, -(leak + c_b), c_u, d_u, n, False)


def residual_si_power_ue(si_ue_true: complex, c_u: complex, d_u: complex, p_u: float) -> float:
    return p_u * abs(si_ue_true + c_u + d_u) ** 2


def residual_si_power_bs(si_bs_true: CMat, v: CVec, canc: CancellerState, p_b: float) -> np.ndarray:
    """Per-chain residual after analog and digital cancellation on the true channel."""
    return p_b * np.abs(si_bs_true @ v + canc.c_b + canc.d_b) ** 2
