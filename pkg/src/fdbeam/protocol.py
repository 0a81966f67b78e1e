"""Per-slot link simulation for the FD SDDT protocol and the three HD baselines.

Each run owns four independent RNG streams (channel, noise, data,
estimation) so that every mode sees the same channel trajectory for a
given ``(master_seed, run_index)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import beamforming, cancellation, channel, doa
from .numerics import CMat, CVec

MODES = ("fd_sddt", "hd_initial", "hd_each_slot", "hd_update")


class ConfigError(ValueError):
    """Invalid scenario or sweep parameter; ``key`` names the offender."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    n_b: int = 64
    m_b: int = 2
    carrier_ghz: float = 28.0
    n_paths: int = 5
    pathloss_db: float = 100.0
    rician_db: float = 25.0
    si_kappa_db: float = 35.0
    si_pathloss_db: float = 40.0
    noise_dbm: float = -100.0
    lambda_b_dbm: float = -40.0
    lambda_u_dbm: float = -40.0
    p_b_dbm: float = 40.0
    p_u_dbm: float = 10.0
    velocity_kmh: float = 120.0
    slot_duration_s: float = 0.01
    bs_distance_m: float = 100.0
    gain_correlation: float = 0.995
    slots: int = 100
    symbols_per_slot: int = 400
    hd_training_fraction: float = 0.1
    hd_update_snr_loss_db: float = 3.0
    codebook_bits: int = 6
    analog_taps: int = 2
    bs_si_nmse_db: float = -math.inf
    ue_si_nmse_db: float = -80.0
    spacing_ratio: float = 0.5
    grid_points: int = 3143
    low_confidence_ratio: float = 2.0
    los_doa_span_rad: float = math.pi / 3
    mode: str = "fd_sddt"

    def __post_init__(self):
        def need(key, ok, msg):
            if not ok:
                raise ConfigError(key, msg)

        for f in fields(self):
            val = getattr(self, f.name)
            if f.type == "float":
                need(f.name, isinstance(val, (int, float)) and not math.isnan(val), "must be a number")
            elif f.type == "int":
                need(f.name, isinstance(val, int) and not isinstance(val, bool), "must be an integer")

        need("n_b", self.n_b >= 1, "must be >= 1")
        need("m_b", self.m_b >= 2, "MUSIC needs at least 2 receive elements")
        need("n_paths", self.n_paths >= 1, "must be >= 1 (one LoS path)")
        need("slots", self.slots >= 1, "must be >= 1")
        need("symbols_per_slot", self.symbols_per_slot >= 2, "must be >= 2")
        need("hd_training_fraction", 0.0 < self.hd_training_fraction < 1.0, "must lie in (0, 1)")
        need("hd_training_fraction", 1 <= self.hd_training_symbols < self.symbols_per_slot,
             "leaves no training or no data symbols")
        need("hd_update_snr_loss_db", self.hd_update_snr_loss_db >= 0, "must be >= 0")
        need("codebook_bits", self.codebook_bits >= 0, "must be >= 0")
        need("codebook_bits", 2 ** self.codebook_bits <= self.n_b,
             f"2**codebook_bits exceeds n_b = {self.n_b}")
        need("analog_taps", self.analog_taps >= 1, "must be >= 1")
        need("velocity_kmh", math.isfinite(self.velocity_kmh) and self.velocity_kmh >= 0, "must be >= 0")
        need("slot_duration_s", math.isfinite(self.slot_duration_s) and self.slot_duration_s > 0, "must be > 0")
        need("bs_distance_m", math.isfinite(self.bs_distance_m) and self.bs_distance_m > 0, "must be > 0")
        need("gain_correlation", 0.0 <= self.gain_correlation <= 1.0, "must lie in [0, 1]")
        need("spacing_ratio", math.isfinite(self.spacing_ratio) and self.spacing_ratio > 0, "must be > 0")
        need("grid_points", self.grid_points >= 2, "must be >= 2")
        need("low_confidence_ratio", self.low_confidence_ratio >= 1.0, "must be >= 1")
        need("los_doa_span_rad", 0.0 <= self.los_doa_span_rad <= math.pi / 2, "must lie in [0, pi/2]")
        need("mode", self.mode in MODES, f"must be one of {MODES}")
        for key in ("p_b_dbm", "p_u_dbm", "noise_dbm", "lambda_b_dbm", "lambda_u_dbm", "pathloss_db",
                    "si_pathloss_db", "carrier_ghz"):
            need(key, math.isfinite(getattr(self, key)), "must be finite")
        need("rician_db", self.rician_db > -math.inf, "must be > -inf")
        need("bs_si_nmse_db", self.bs_si_nmse_db < math.inf, "must be < inf")
        need("ue_si_nmse_db", self.ue_si_nmse_db < math.inf, "must be < inf")

    @property
    def hd_training_symbols(self) -> int:
        return int(round(self.hd_training_fraction * self.symbols_per_slot))

    @property
    def mobility(self) -> channel.MobilityModel:
        return channel.MobilityModel(
            velocity=self.velocity_kmh / 3.6,
            slot_duration=self.slot_duration_s,
            bs_distance=self.bs_distance_m,
            gain_correlation=self.gain_correlation,
        )

    @property
    def saturation(self) -> cancellation.SaturationSpec:
        return cancellation.SaturationSpec(
            lambda_b=channel.dbm_to_mw(self.lambda_b_dbm),
            lambda_u=channel.dbm_to_mw(self.lambda_u_dbm),
        )

    @property
    def p_b_mw(self) -> float:
        return channel.dbm_to_mw(self.p_b_dbm)

    @property
    def p_u_mw(self) -> float:
        return channel.dbm_to_mw(self.p_u_dbm)

    @property
    def noise_mw(self) -> float:
        return channel.dbm_to_mw(self.noise_dbm)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SlotOutcome:
    slot_index: int
    theta_true: float
    theta_hat: float
    doa_error: float
    beam_index: int
    rate_estimated: float
    rate_realized: float
    effective_rate: float
    residual_si_ue: float
    saturated: bool
    doa_updated: bool
    sinr_realized: float = 0.0
    feasible: bool = True
    post_analog_bs_mw: float = 0.0  # worst BS chain, true SI channel
    post_analog_ue_mw: float = 0.0
    data_symbols: int = 0
    training_symbols: int = 0
    low_confidence: bool = False


class Streams(NamedTuple):
    channel: np.random.Generator
    noise: np.random.Generator
    data: np.random.Generator
    estimation: np.random.Generator


STREAM_IDS = {"channel": 0, "noise": 1, "data": 2, "estimation": 3}


def make_streams(master_seed: int, run_index: int) -> Streams:
    gens = {
        name: np.random.default_rng(np.random.SeedSequence([master_seed, run_index, sid]))
        for name, sid in STREAM_IDS.items()
    }
    return Streams(**gens)


@dataclass(frozen=True)
class SlotChannel:
    paths: channel.PathSet
    theta_true: float  # folded into [-pi/2, pi/2]
    realization: channel.ChannelRealization


def realize(cfg: ScenarioConfig, paths: channel.PathSet, rng: np.random.Generator) -> channel.ChannelRealization:
    return channel.ChannelRealization(
        ul=channel.build_ul_channel(paths, cfg.m_b, cfg.spacing_ratio),
        dl=channel.build_dl_channel(paths, cfg.n_b, cfg.spacing_ratio),
        si_bs=channel.draw_si_channel_bs(cfg.si_kappa_db, cfg.si_pathloss_db, cfg.m_b, cfg.n_b, rng),
        si_ue=channel.draw_si_channel_ue(cfg.si_kappa_db, cfg.si_pathloss_db, rng),
    )


def initial_los_range(cfg: ScenarioConfig) -> tuple[float, float]:
    """Start-angle interval keeping the whole LoS drift inside +-los_doa_span_rad.

    Two half-wavelength elements alias near endfire, so trajectories are
    kept off it. If the drift is longer than the window, the start is pinned
    at the lower edge.
    """
    span = cfg.los_doa_span_rad
    drift = (cfg.slots - 1) * channel.delta_theta(cfg.mobility)
    return -span, max(span - drift, -span)


def channel_trajectory(cfg: ScenarioConfig, rng: np.random.Generator) -> list[SlotChannel]:
    mob = cfg.mobility
    paths = channel.draw_initial_paths(cfg.pathloss_db, cfg.rician_db, cfg.n_paths - 1, rng,
                                       los_range=initial_los_range(cfg))
    out = []
    for i in range(cfg.slots):
        if i:
            paths = channel.evolve_paths(paths, mob, rng)
        out.append(SlotChannel(paths, channel.fold_doa(paths.los_doa), realize(cfg, paths, rng)))
    return out


def _qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, n)))


def synthesize_bs_rx(
    h_ul: CVec,
    si_bs_true: CMat | None,
    v: CVec | None,
    canc: cancellation.CancellerState | None,
    p_u: float,
    p_b: float,
    noise_mw: float,
    n_symbols: int,
    rng_noise: np.random.Generator,
    rng_data: np.random.Generator | None = None,
) -> doa.SnapshotBlock:
    """BS baseband snapshots over ``n_symbols`` channel uses.

    Training symbols are the constant 1. Passing ``si_bs_true=None`` models
    an HD training interval (no simultaneous DL data, hence no SI).
    """
    m_b = h_ul.size
    y = np.outer(h_ul * math.sqrt(p_u), np.ones(n_symbols))
    if si_bs_true is not None:
        residual = si_bs_true @ v + canc.c_b + canc.d_b
        s_b = _qpsk(rng_data, n_symbols)
        y = y + np.outer(residual * math.sqrt(p_b), s_b)
    if noise_mw > 0:
        scale = math.sqrt(noise_mw / 2.0)
        y = y + scale * (rng_noise.standard_normal((m_b, n_symbols)) + 1j * rng_noise.standard_normal((m_b, n_symbols)))
    return doa.SnapshotBlock(samples=y, noise_power=noise_mw)


def dl_sinr(h_eff: CVec, v: CVec, p_b: float, noise_mw: float, residual_mw: float) -> float:
    if noise_mw <= 0:
        raise ValueError("noise power must be positive")
    return p_b * abs(np.dot(h_eff, v)) ** 2 / (noise_mw + residual_mw)


def dl_rate(h_eff: CVec, v: CVec, p_b: float, noise_mw: float, residual_mw: float) -> float:
    """``log2(1 + p_b |h^T v|^2 / (noise + residual))`` in bits per channel use."""
    return math.log2(1.0 + dl_sinr(h_eff, v, p_b, noise_mw, residual_mw))


class _Estimator:
    """Shared MUSIC plumbing for one run."""

    def __init__(self, cfg: ScenarioConfig, streams: Streams):
        self.cfg = cfg
        self.streams = streams
        self.grid = doa.default_grid(cfg.grid_points)
        self.theta: float | None = None

    def update(self, block: doa.SnapshotBlock) -> tuple[bool, bool]:
        """Run MUSIC; returns (adopted, low_confidence)."""
        res = doa.estimate_los_doa(block, self.grid, self.cfg.spacing_ratio, self.cfg.low_confidence_ratio)
        if res.low_confidence and self.theta is not None:
            return False, True
        self.theta = res.theta_hat
        return True, res.low_confidence

    def hd_training(self, sc: SlotChannel, n_symbols: int) -> tuple[bool, bool]:
        cfg = self.cfg
        block = synthesize_bs_rx(sc.realization.ul, None, None, None, cfg.p_u_mw, cfg.p_b_mw,
                                 cfg.noise_mw, n_symbols, self.streams.noise)
        return self.update(block)


def _doa_error(theta_hat: float, theta_true: float) -> float:
    return abs(channel.wrap_angle(theta_hat - theta_true))


def _dl_column(theta: float, cfg: ScenarioConfig) -> CVec:
    return beamforming.approx_dl_channel(theta, cfg.n_b, cfg.spacing_ratio).conj()


def run_fd_sddt(cfg: ScenarioConfig, streams: Streams,
                trajectory: Sequence[SlotChannel] | None = None) -> list[SlotOutcome]:
    """Simultaneous UL DoA estimation and DL data over every slot.

    Slot 0 is a cold-start UL training slot without DL data. In slot i >= 1
    the beam comes from the estimate of slot i-1, the cancellers from the
    SI-channel estimates, and the slot's own snapshots (UL training plus
    residual SI) refresh the estimate. A slot whose cancellers cannot keep
    every RX chain below its saturation threshold is an outage: rate 0 and
    no DoA update.
    """
    traj = trajectory if trajectory is not None else channel_trajectory(cfg, streams.channel)
    cb = beamforming.dft_codebook(cfg.n_b, cfg.codebook_bits)
    sat = cfg.saturation
    p_b, p_u, noise = cfg.p_b_mw, cfg.p_u_mw, cfg.noise_mw
    L = cfg.symbols_per_slot
    est = _Estimator(cfg, streams)
    out: list[SlotOutcome] = []

    for i, sc in enumerate(traj):
        ch = sc.realization
        if i == 0:
            _, low = est.hd_training(sc, L)
            out.append(SlotOutcome(
                slot_index=0, theta_true=sc.theta_true, theta_hat=est.theta,
                doa_error=_doa_error(est.theta, sc.theta_true), beam_index=-1,
                rate_estimated=0.0, rate_realized=0.0, effective_rate=0.0, residual_si_ue=0.0,
                saturated=False, doa_updated=True, training_symbols=L, low_confidence=low,
            ))
            continue

        h_hat = _dl_column(est.theta, cfg)
        si_bs_hat = cancellation.estimate_with_error(ch.si_bs, cfg.bs_si_nmse_db, streams.estimation)
        si_ue_hat = cancellation.estimate_with_error(ch.si_ue, cfg.ue_si_nmse_db, streams.estimation)
        choice = beamforming.select_beam(h_hat, si_bs_hat, cb)
        v = choice.beam
        canc = cancellation.design_cancellers(si_bs_hat, si_ue_hat, v, p_b, p_u, sat, cfg.analog_taps)

        bs_power = cancellation.post_analog_power(ch.si_bs, v, canc.c_b, p_b)
        ue_power = float(cancellation.post_analog_power(ch.si_ue, 1.0, canc.c_u, p_u)[0])
        physically_ok = bool(np.all(bs_power <= sat.lambda_b)) and ue_power <= sat.lambda_u
        saturated = not (canc.feasible and physically_ok)

        rec = SlotOutcome(
            slot_index=i, theta_true=sc.theta_true, theta_hat=est.theta, doa_error=0.0,
            beam_index=choice.index, rate_estimated=0.0, rate_realized=0.0, effective_rate=0.0,
            residual_si_ue=0.0, saturated=saturated, doa_updated=False, feasible=canc.feasible,
            post_analog_bs_mw=float(np.max(bs_power)), post_analog_ue_mw=ue_power,
        )
        if not saturated:
            residual_ue = cancellation.residual_si_power_ue(ch.si_ue, canc.c_u, canc.d_u, p_u)
            block = synthesize_bs_rx(ch.ul, ch.si_bs, v, canc, p_u, p_b, noise, L,
                                     streams.noise, streams.data)
            rec.doa_updated, rec.low_confidence = est.update(block)
            rec.residual_si_ue = residual_ue
            rec.rate_estimated = dl_rate(h_hat, v, p_b, noise, residual_ue)
            rec.sinr_realized = dl_sinr(ch.dl, v, p_b, noise, residual_ue)
            rec.rate_realized = math.log2(1.0 + rec.sinr_realized)
            rec.effective_rate = rec.rate_realized
            rec.data_symbols = L
            rec.training_symbols = L
        rec.theta_hat = est.theta
        rec.doa_error = _doa_error(est.theta, sc.theta_true)
        out.append(rec)
    return out


def _hd_data(cfg: ScenarioConfig, cb: beamforming.Codebook, sc: SlotChannel, theta_beam: float,
             data_symbols: int) -> dict:
    h_hat = _dl_column(theta_beam, cfg)
    choice = beamforming.select_beam(h_hat, None, cb)
    v = choice.beam
    sinr = dl_sinr(sc.realization.dl, v, cfg.p_b_mw, cfg.noise_mw, 0.0)
    rate = math.log2(1.0 + sinr)
    return dict(
        beam_index=choice.index,
        rate_estimated=dl_rate(h_hat, v, cfg.p_b_mw, cfg.noise_mw, 0.0),
        rate_realized=rate,
        effective_rate=rate if data_symbols == cfg.symbols_per_slot else rate * data_symbols / cfg.symbols_per_slot,
        sinr_realized=sinr,
        data_symbols=data_symbols,
    )


def _run_hd(cfg: ScenarioConfig, streams: Streams, trajectory, policy: str) -> list[SlotOutcome]:
    traj = trajectory if trajectory is not None else channel_trajectory(cfg, streams.channel)
    cb = beamforming.dft_codebook(cfg.n_b, cfg.codebook_bits)
    L = cfg.symbols_per_slot
    n_train = cfg.hd_training_symbols
    loss = 10.0 ** (-cfg.hd_update_snr_loss_db / 10.0)
    est = _Estimator(cfg, streams)
    reference_sinr = None
    pending = False
    out: list[SlotOutcome] = []

    for i, sc in enumerate(traj):
        if policy == "initial":
            train = i == 0
        elif policy == "each_slot":
            train = True
        else:
            train = i == 0 or pending
        previous = est.theta
        updated = low = False
        if train:
            updated, low = est.hd_training(sc, n_train)
        # each_slot transmits with the previous slot's estimate; the other
        # policies train first and transmit with the fresh estimate.
        theta_beam = previous if policy == "each_slot" and previous is not None else est.theta
        data = _hd_data(cfg, cb, sc, theta_beam, L - n_train if train else L)

        if policy == "update":
            if train:
                reference_sinr = data["sinr_realized"]
                pending = False
            else:
                pending = data["sinr_realized"] < reference_sinr * loss
        out.append(SlotOutcome(
            slot_index=i, theta_true=sc.theta_true, theta_hat=est.theta,
            doa_error=_doa_error(est.theta, sc.theta_true), residual_si_ue=0.0,
            saturated=False, doa_updated=updated, training_symbols=n_train if train else 0,
            low_confidence=low, **data,
        ))
    return out


def run_hd_initial(cfg: ScenarioConfig, streams: Streams, trajectory=None) -> list[SlotOutcome]:
    """DoA estimated in slot 0 only; every later slot reuses that beam."""
    return _run_hd(cfg, streams, trajectory, "initial")


def run_hd_each_slot(cfg: ScenarioConfig, streams: Streams, trajectory=None) -> list[SlotOutcome]:
    """A training fraction in every slot; data uses the previous slot's estimate."""
    return _run_hd(cfg, streams, trajectory, "each_slot")


def run_hd_update(cfg: ScenarioConfig, streams: Streams, trajectory=None) -> list[SlotOutcome]:
    """Re-estimate only after the realized DL SINR drops more than the loss threshold.

    The reference SINR is the one realized in the most recent training
    slot. A slot that falls below ``reference - hd_update_snr_loss_db``
    schedules training at the start of the next slot.
    """
    return _run_hd(cfg, streams, trajectory, "update")


RUNNERS: dict[str, Callable[..., list[SlotOutcome]]] = {
    "fd_sddt": run_fd_sddt,
    "hd_initial": run_hd_initial,
    "hd_each_slot": run_hd_each_slot,
    "hd_update": run_hd_update,
}


def run_mode(cfg: ScenarioConfig, mode: str, streams: Streams, trajectory=None) -> list[SlotOutcome]:
    if mode not in RUNNERS:
        raise ConfigError("mode", f"unknown mode {mode!r}")
    return RUNNERS[mode](cfg, streams, trajectory)
