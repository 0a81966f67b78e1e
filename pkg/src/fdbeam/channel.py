"""Geometric UL/DL channels, their slot-to-slot evolution, and Rician SI channels.

All powers are linear (mW or dimensionless gains); dB conversion happens at
the configuration boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import CMat, CVec, DimensionError, steering_matrix, steering_vector


@dataclass(frozen=True)
class MobilityModel:
    velocity: float  # m/s
    slot_duration: float  # s
    bs_distance: float  # m
    gain_correlation: float = 0.995

    def __post_init__(self):
        if self.bs_distance <= 0 or self.slot_duration <= 0 or self.velocity < 0:
            raise ValueError("mobility parameters must be positive")
        if not 0.0 <= self.gain_correlation <= 1.0:
            raise ValueError("gain_correlation must lie in [0, 1]")


@dataclass(frozen=True)
class PathSet:
    """Generative state shared by the reciprocal UL and DL channels.

    ``los_doa`` is kept unwrapped so the per-slot drift stays exactly linear;
    use :func:`fold_doa` to get the angle a ULA actually observes.
    ``los_power`` is the LoS power at generation time and ``nlos_power`` the
    power of each individual nLoS path; both survive evolution because they
    scale the Gauss-Markov innovation and the nLoS redraw.
    """

    los_gain: complex
    los_doa: float
    nlos_gains: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    nlos_doas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    los_power: float = 1.0
    nlos_power: float = 0.0

    @property
    def nlos_paths(self) -> list[tuple[complex, float]]:
        return list(zip(self.nlos_gains.tolist(), self.nlos_doas.tolist()))


@dataclass(frozen=True)
class ChannelRealization:
    ul: CVec  # M_b
    dl: CVec  # N_b, the column whose transpose is the DL row channel
    si_bs: CMat  # M_b x N_b
    si_ue: complex


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def fold_doa(theta: float) -> float:
    """Reflect an angle into [-pi/2, pi/2] keeping sin(theta) unchanged."""
    t = (theta + math.pi / 2) % (2 * math.pi)
    if t > math.pi:
        t = 2 * math.pi - t
    return t - math.pi / 2


def wrap_angle(x: float) -> float:
    """Wrap an angle difference into (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def delta_theta(m: MobilityModel) -> float:
    return math.atan(m.velocity * m.slot_duration / m.bs_distance)


def _cn(rng: np.random.Generator, size=None, variance: float = 1.0):
    """Circularly-symmetric complex Gaussian samples."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _draw_nlos(n_nlos: int, power: float, rng: np.random.Generator):
    phases = rng.uniform(0.0, 2 * np.pi, n_nlos)
    doas = rng.uniform(-np.pi / 2, np.pi / 2, n_nlos)
    return math.sqrt(power) * np.exp(1j * phases), doas


def draw_initial_paths(
    pathloss_db: float,
    rician_db: float,
    n_nlos: int,
    rng: np.random.Generator,
    los_range: tuple[float, float] = (-math.pi / 2, math.pi / 2),
) -> PathSet:
    """Draw a fresh LoS + nLoS path set.

    LoS power is ``10**(-pathloss_db/10)``; the nLoS paths share
    ``los_power * 10**(-rician_db/10)`` equally. Phases are uniform on
    [0, 2*pi); the LoS DoA is uniform on ``los_range`` and nLoS DoAs
    uniform on [-pi/2, pi/2].
    """
    if n_nlos < 0:
        raise ValueError("n_nlos must be >= 0")
    los_power = db_to_lin(-pathloss_db)
    total_nlos = los_power * db_to_lin(-rician_db) if n_nlos else 0.0
    per_path = total_nlos / n_nlos if n_nlos else 0.0
    los_gain = math.sqrt(los_power) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    los_doa = float(rng.uniform(*los_range))
    gains, doas = _draw_nlos(n_nlos, per_path, rng)
    return PathSet(
        los_gain=complex(los_gain),
        los_doa=los_doa,
        nlos_gains=gains,
        nlos_doas=doas,
        los_power=los_power,
        nlos_power=per_path,
    )


def evolve_paths(p: PathSet, m: MobilityModel, rng: np.random.Generator) -> PathSet:
    """Advance one slot: linear LoS drift, Gauss-Markov LoS gain, fresh nLoS paths.

    The innovation variance is ``(1 - rho**2) * los_power`` so the LoS gain
    keeps its generation-time average power.
    """
    rho = m.gain_correlation
    eps = _cn(rng, variance=(1.0 - rho * rho) * p.los_power)
    gains, doas = _draw_nlos(p.nlos_gains.size, p.nlos_power, rng)
    return replace(
        p,
        los_gain=complex(rho * p.los_gain + eps),
        los_doa=p.los_doa + delta_theta(m),
        nlos_gains=gains,
        nlos_doas=doas,
    )


def _path_sum(p: PathSet, m: int, spacing_ratio: float, conj: bool) -> CVec:
    if m < 1:
        raise DimensionError(f"element count must be >= 1, got {m}")
    a_los = steering_vector(p.los_doa, m, spacing_ratio)
    h = p.los_gain * (a_los.conj() if conj else a_los)
    if p.nlos_gains.size:
        a = steering_matrix(p.nlos_doas, m, spacing_ratio)
        if conj:
            a = a.conj()
        h = h + a @ p.nlos_gains
    return h


def build_ul_channel(p: PathSet, m_b: int, spacing_ratio: float = 0.5) -> CVec:
    return _path_sum(p, m_b, spacing_ratio, conj=False)


def build_dl_channel(p: PathSet, n_b: int, spacing_ratio: float = 0.5) -> CVec:
    """DL channel stored as a column ``h`` with ``h.T @ v`` the received amplitude.

    Uses the same gains and angles as the UL channel with conjugated
    steering vectors.
    """
    return _path_sum(p, n_b, spacing_ratio, conj=True)


def si_los_matrix(m_b: int, n_b: int) -> CMat:
    """Fixed unit-modulus LoS part of the BS SI channel, a bilinear phase ramp."""
    r = np.arange(m_b)[:, None]
    c = np.arange(n_b)[None, :]
    return np.exp(1j * np.pi * r * c / max(m_b, n_b))


def _rician_weights(kappa_db: float) -> tuple[float, float]:
    if math.isinf(kappa_db):
        return (1.0, 0.0) if kappa_db > 0 else (0.0, 1.0)
    kappa = db_to_lin(kappa_db)
    return math.sqrt(kappa / (kappa + 1.0)), math.sqrt(1.0 / (kappa + 1.0))


def draw_si_channel_bs(
    kappa_db: float,
    pathloss_db: float,
    m_b: int,
    n_b: int,
    rng: np.random.Generator,
) -> CMat:
    if m_b < 1 or n_b < 1:
        raise DimensionError("SI channel dimensions must be >= 1")
    w_los, w_nlos = _rician_weights(kappa_db)
    g = 10.0 ** (-pathloss_db / 20.0)
    scattered = _cn(rng, (m_b, n_b))
    return g * (w_los * si_los_matrix(m_b, n_b) + w_nlos * scattered)


def draw_si_channel_ue(kappa_db: float, pathloss_db: float, rng: np.random.Generator) -> complex:
    w_los, w_nlos = _rician_weights(kappa_db)
    g = 10.0 ** (-pathloss_db / 20.0)
    return complex(g * (w_los + w_nlos * _cn(rng)))
