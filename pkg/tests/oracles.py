"""Independent reference implementations used as test oracles.

Written with explicit loops and no calls into the package so a shared bug
cannot cancel out.
"""
from __future__ import annotations

import cmath
import math


def steering(theta: float, m: int, spacing: float = 0.5) -> list[complex]:
    return [cmath.exp(2j * math.pi * spacing * k * math.sin(theta)) / math.sqrt(m) for k in range(m)]


def dft_beams(n_b: int, bits: int) -> list[list[complex]]:
    return [[cmath.exp(-2j * math.pi * k * n / n_b) / math.sqrt(n_b) for n in range(n_b)]
            for k in range(2 ** bits)]


def _dot(row, v) -> complex:
    acc = 0j
    for a, b in zip(row, v):
        acc += a * b
    return acc


def rescan_beams(h_hat, si_hat, beams, degenerate: float = 1e-30):
    """Exhaustive ratio scan; returns (index, numerator_only)."""
    nums = [abs(_dot(h_hat, v)) ** 2 for v in beams]
    if si_hat is None:
        dens = None
    else:
        dens = [sum(abs(_dot(row, v)) ** 2 for row in si_hat) for v in beams]
    if dens is None or all(d < degenerate for d in dens):
        scores, numerator_only = nums, True
    else:
        scores = []
        for n, d in zip(nums, dens):
            if d >= degenerate:
                scores.append(n / d)
            else:
                scores.append(math.inf if n > 0 else 0.0)
        numerator_only = False
    best = 0
    for k in range(1, len(scores)):
        if scores[k] > scores[best]:
            best = k
    return best, numerator_only


def brute_force_cancellers(si_bs_hat, si_ue_hat, v, p_b, p_u, lam_b, lam_u, max_taps=None):
    """Tap search as a plain loop over n = 1..min(cap, M_b).

    Returns ``(active_taps, c_b, d_b, c_u, d_u, feasible)``. Full
    cancellation (n = M_b) is the last resort; when nothing passes the
    largest attempted n is reported as infeasible.
    """
    leak = [_dot(row, v) for row in si_bs_hat]
    m_b = len(leak)
    cap = m_b if max_taps is None else max_taps
    c_u = -si_ue_hat
    d_u = -(si_ue_hat + c_u)
    ue_ok = p_u * abs(si_ue_hat + c_u) ** 2 <= lam_u
    last = None
    for n in range(1, min(cap, m_b) + 1):
        c_b = [-leak[j] if j < n else 0j for j in range(m_b)]
        resid = [leak[j] + c_b[j] for j in range(m_b)]
        ok = ue_ok and all(p_b * abs(r) ** 2 <= lam_b for r in resid)
        last = (n, c_b, [-r for r in resid], c_u, d_u, ok)
        if ok:
            return last
    return last
