"""Snapshot simulator for the cell-free downlink and the nearest-satellite baseline.

Only SAPs above the typical UT's horizon matter, so a snapshot samples the
SAP process restricted to the visible cap (distance <= r_max): the count is
Poisson with mean ``lambda_S |A_{r_max}|`` and, because the cap area is
linear in r^2, distances have r^2 uniform on [r_min^2, r_max^2].  This is
the same law as sampling the whole shell and discarding hidden points.

Powers are normalized by ``rho_d G_ml`` throughout, so the noise term is
``sigma^2 / (rho_d G_ml)`` and the side-lobe ISI carries ``G_sl / G_ml``.

Vectorized engine: links of many trials are held in flat arrays with a
``trial`` index and reduced per trial with ``np.bincount``.  Trials are
grouped into fixed-size blocks, each with its own counter-based random
substream, so results are independent of the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import MONTE_CARLO, CoverageCurve
from .channel import path_loss
from .config import NetworkConfig
from .errors import ParameterError
from .geometry import (SphericalPoint, avg_users_per_sap, cap_area, sample_service_distance,
                       service_bounds)

BLOCK_TRIALS = 512

PERFECT = "perfect"
TRAINED = "trained"
NO_BEAMFORMING = "no-beamforming"
CSI_MODES = (PERFECT, TRAINED, NO_BEAMFORMING)

# stream ids keep different estimators on unrelated substreams of one seed
_STREAM_CF = 1
_STREAM_NEAREST = 2


# -- random streams -----------------------------------------------------------

def master_seed(rng) -> int:
    """Integer seed from an int or a Generator (consumes one draw)."""
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2 ** 63))
    raise ParameterError("rng must be an int seed or numpy Generator")


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, block))))


def _blocks(trials: int):
    starts = range(0, trials, BLOCK_TRIALS)
    return [(i, min(BLOCK_TRIALS, trials - s)) for i, s in enumerate(starts)]


def run_blocks(fn, trials: int, seed: int, stream: int, threads: int = 1):
    """Apply ``fn(n, rng)`` to each block; results come back in block order."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    jobs = _blocks(trials)

    def one(job):
        idx, n = job
        return fn(n, block_rng(seed, stream, idx))

    if threads <= 1 or len(jobs) == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, jobs))


# -- records -----------------------------------------------------------------

@dataclass
class Links:
    """Visible SAP links of ``n_trials`` snapshots, flattened."""
    n_trials: int
    trial: np.ndarray
    distance_km: np.ndarray
    serving: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    users: np.ndarray  # |Phi_l^U| for serving links, 1 otherwise

    def select(self, mask) -> "Links":
        return Links(self.n_trials, self.trial[mask], self.distance_km[mask], self.serving[mask],
                     self.amplitude[mask], self.phase[mask], self.users[mask])


@dataclass
class Snapshot:
    service_saps: list
    interfering_saps: list
    users_per_sap: list
    links: Links = field(repr=False)


@dataclass(frozen=True)
class SinrSample:
    ds_power: float
    mui_power: float
    isi_power: float
    noise_power: float
    sinr: float


@dataclass
class TrainingResult:
    """Per serving link: LMMSE estimate and the unit phasor used for beamforming."""
    estimate: np.ndarray
    estimated_phase: np.ndarray
    pilot_assignment: dict
    pool_size: int


@dataclass(frozen=True)
class EmpiricalCurve:
    x: tuple
    ccdf: tuple
    samples: int


# -- sampling ----------------------------------------------------------------

def visible_mean_count(cfg: NetworkConfig) -> float:
    b = service_bounds(cfg.geometry)
    return cfg.sap_density * cap_area(b.r_max_km, cfg.geometry)


def co_served_mean(cfg: NetworkConfig) -> float:
    """Mean number of other UTs sharing a serving SAP with the typical UT."""
    return avg_users_per_sap(cfg.geometry, cfg.ut_density)


def draw_links(cfg: NetworkConfig, n_trials: int, rng: np.random.Generator) -> Links:
    g = cfg.geometry
    b = service_bounds(g)
    counts = rng.poisson(visible_mean_count(cfg), n_trials)
    total = int(counts.sum())
    trial = np.repeat(np.arange(n_trials), counts)
    lo2, hi2 = b.r_s_min_km ** 2, b.r_max_km ** 2
    r = np.sqrt(lo2 + rng.random(total) * (hi2 - lo2))
    serving = r <= b.r_s_max_km
    ch = cfg.channel
    amp = np.sqrt(rng.gamma(ch.nakagami_m, ch.omega / ch.nakagami_m, total))
    phase = rng.random(total) * (2.0 * math.pi)
    others = rng.poisson(co_served_mean(cfg), total)
    users = np.where(serving, 1 + others, 1)
    return Links(n_trials, trial, r, serving, amp, phase, users)


def _point_at_distance(r_km: float, azimuth: float, cfg: NetworkConfig) -> SphericalPoint:
    re, rs = cfg.geometry.earth_radius_km, cfg.geometry.shell_radius_km
    z = (rs * rs + re * re - r_km * r_km) / (2.0 * rs * re)
    z = min(1.0, max(-1.0, z))
    rho = math.sqrt(max(0.0, 1.0 - z * z))
    d = np.array([rho * math.cos(azimuth), rho * math.sin(azimuth), z])
    d /= np.linalg.norm(d)
    return SphericalPoint(tuple(map(float, d)), rs)


def draw_snapshot(cfg: NetworkConfig, rng: np.random.Generator) -> Snapshot:
    links = draw_links(cfg, 1, rng)
    az = rng.random(links.trial.size) * (2.0 * math.pi)
    pts = [_point_at_distance(r, a, cfg) for r, a in zip(links.distance_km, az)]
    ser = [p for p, s in zip(pts, links.serving) if s]
    inter = [p for p, s in zip(pts, links.serving) if not s]
    return Snapshot(ser, inter, [int(u) for u in links.users[links.serving]], links)


# -- uplink training ---------------------------------------------------------

def lmmse_estimate(own, copilot, noise, beta_own, omega, noise_var):
    """LMMSE estimate of ``own`` from ``own + sum(copilot) + noise``.

    ``own`` and each row of ``copilot`` are complex channels ``beta^{1/2} h``;
    the denominator uses the realized co-pilot powers plus ``noise_var``.
    """
    copilot = np.asarray(copilot, dtype=complex)
    y = own + copilot.sum(axis=0) + noise
    power = np.abs(own) ** 2 + (np.abs(copilot) ** 2).sum(axis=0) + noise_var
    return beta_own * omega * y / power


def pilot_noise_variance(cfg: NetworkConfig) -> float:
    """Projected uplink noise in channel units: sigma^2 / (tau_p rho_p G_ml)."""
    return cfg.noise_power / (cfg.pilot_len * cfg.tx_power_pilot * cfg.gain_main)


def _train_links(links: Links, cfg: NetworkConfig, pool_size: int, rng: np.random.Generator,
                 noiseless: bool = False):
    """Estimated phasors for every serving link of ``links``."""
    if pool_size < 1:
        raise ParameterError("pool_size must be >= 1")
    if pool_size > cfg.pilot_len:
        raise ParameterError("pool_size cannot exceed pilot_len")
    ch = cfg.channel
    sel = np.flatnonzero(links.serving)
    beta = path_loss(links.distance_km[sel], ch)
    own = np.sqrt(beta) * links.amplitude[sel] * np.exp(1j * links.phase[sel])
    # other co-served users that drew the typical UT's pilot
    n_co = rng.binomial(links.users[sel] - 1, 1.0 / pool_size)
    owner = np.repeat(np.arange(sel.size), n_co)
    d_co = sample_service_distance(cfg.geometry, owner.size, rng)
    amp_co = np.sqrt(rng.gamma(ch.nakagami_m, ch.omega / ch.nakagami_m, owner.size))
    ph_co = rng.random(owner.size) * (2.0 * math.pi)
    g_co = np.sqrt(path_loss(d_co, ch)) * amp_co * np.exp(1j * ph_co)
    co_sum = (np.bincount(owner, g_co.real, sel.size) + 1j * np.bincount(owner, g_co.imag, sel.size))
    co_pow = np.bincount(owner, np.abs(g_co) ** 2, sel.size)
    nvar = 0.0 if noiseless else pilot_noise_variance(cfg)
    noise = math.sqrt(nvar / 2.0) * (rng.standard_normal(sel.size) + 1j * rng.standard_normal(sel.size))
    y = own + co_sum + noise
    est = beta * ch.omega * y / (np.abs(own) ** 2 + co_pow + nvar)
    return sel, est, n_co


def uplink_train(snapshot: Snapshot, cfg: NetworkConfig, pool_size: int,
                 rng: np.random.Generator, noiseless: bool = False) -> TrainingResult:
    sel, est, n_co = _train_links(snapshot.links, cfg, pool_size, rng, noiseless)
    # pilots: typical UT takes pilot 0; co-pilot users share it, the rest
    # are spread over the remaining pool
    assignment = {}
    for j, (l, u) in enumerate(zip(sel, snapshot.links.users[sel])):
        assignment[(int(l), 0)] = 0
        for k in range(1, int(u)):
            if k <= n_co[j]:
                assignment[(int(l), k)] = 0
            else:
                assignment[(int(l), k)] = int(rng.integers(1, pool_size)) if pool_size > 1 else 0
    phase = np.exp(1j * np.angle(est))
    return TrainingResult(est, phase, assignment, pool_size)


# -- SINR ---------------------------------------------------------------------

def _per_trial(links: Links, values, n: int):
    return np.bincount(links.trial, values, n) if values.size else np.zeros(n)


def link_powers(links: Links, cfg: NetworkConfig, csi: str = PERFECT, pool_size: int | None = None,
                rng: np.random.Generator | None = None, beam_phase=None):
    """Per-trial (DS amplitude, MUI, ISI) for a batch of snapshots.

    ``beam_phase`` optionally supplies the unit phasors of an earlier
    training run for the serving links (in link order).
    """
    if csi not in CSI_MODES:
        raise ParameterError(f"unknown csi mode {csi!r}")
    n = links.n_trials
    ch = cfg.channel
    sqrt_beta = np.sqrt(path_loss(links.distance_km, ch)) if links.trial.size else np.zeros(0)
    s = links.serving
    srv = links.select(s)
    itf = links.select(~s)
    a = sqrt_beta[s] * srv.amplitude / np.sqrt(srv.users)

    if csi == PERFECT:
        ds = _per_trial(srv, a, n)
    else:
        h = np.exp(1j * srv.phase)
        if csi == TRAINED:
            if beam_phase is None:
                if pool_size is None:
                    pool_size = cfg.pilot_len
                _, est, _ = _train_links(links, cfg, pool_size, rng)
                beam_phase = np.exp(1j * np.angle(est))
            z = a * h * np.conj(beam_phase)
        else:
            z = a * h
        ds = np.abs(_per_trial(srv, z.real, n) + 1j * _per_trial(srv, z.imag, n))

    beta_h2_srv = (sqrt_beta[s] * srv.amplitude) ** 2
    mui = _per_trial(srv, beta_h2_srv * (srv.users - 1) / srv.users, n)
    isi = ch.gain_ratio * _per_trial(itf, (sqrt_beta[~s] * itf.amplitude) ** 2, n)
    has_service = np.bincount(srv.trial, minlength=n) > 0
    return ds, mui, isi, has_service


def sinr_from_parts(ds, mui, isi, noise, has_service):
    ds2 = ds * ds
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = ds2 / (mui + isi + noise)
    return np.where(has_service, sinr, 0.0)


def sinr_of(snapshot: Snapshot, cfg: NetworkConfig, csi: str = PERFECT,
            training: TrainingResult | None = None, rng: np.random.Generator | None = None) -> SinrSample:
    beam = training.estimated_phase if training is not None else None
    if csi == TRAINED and beam is None and rng is None:
        raise ParameterError("trained csi needs a TrainingResult or an rng")
    ds, mui, isi, ok = link_powers(snapshot.links, cfg, csi, None, rng, beam)
    noise = cfg.noise_to_signal
    sinr = float(sinr_from_parts(ds, mui, isi, noise, ok)[0])
    return SinrSample(float(ds[0] ** 2), float(mui[0]), float(isi[0]), noise, sinr)


# -- estimators ----------------------------------------------------------------

def wilson_interval(hits, n, z: float = 1.959963984540054):
    p = np.asarray(hits, dtype=float) / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z / denom * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


@dataclass(frozen=True)
class SinrBatch:
    sinr: np.ndarray
    ds: np.ndarray
    mui: np.ndarray
    isi: np.ndarray
    has_service: np.ndarray


def simulate_cell_free(cfg: NetworkConfig, trials: int, csi: str = PERFECT, rng=0,
                       pool_size: int | None = None, threads: int = 1) -> SinrBatch:
    seed = master_seed(rng)

    def block(n, r):
        links = draw_links(cfg, n, r)
        ds, mui, isi, ok = link_powers(links, cfg, csi, pool_size, r)
        return ds, mui, isi, ok

    parts = run_blocks(block, trials, seed, _STREAM_CF, threads)
    ds, mui, isi, ok = (np.concatenate(x) for x in zip(*parts))
    return SinrBatch(sinr_from_parts(ds, mui, isi, cfg.noise_to_signal, ok), ds, mui, isi, ok)


def nearest_sinr(links: Links, cfg: NetworkConfig) -> np.ndarray:
    """Per-trial SINR when only the nearest visible SAP serves, at full power."""
    n = links.n_trials
    ch = cfg.channel
    power = path_loss(links.distance_km, ch) * links.amplitude ** 2 if links.trial.size \
        else np.zeros(0)
    order = np.lexsort((links.distance_km, links.trial))
    first = np.ones(order.size, dtype=bool)
    first[1:] = links.trial[order][1:] != links.trial[order][:-1]
    nearest = np.zeros(links.trial.size, dtype=bool)
    nearest[order[first]] = True
    sig = np.bincount(links.trial[nearest], power[nearest], n)
    intf = ch.gain_ratio * np.bincount(links.trial[~nearest], power[~nearest], n)
    has = np.bincount(links.trial, minlength=n) > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(has, sig / (intf + cfg.noise_to_signal), 0.0)


def simulate_nearest(cfg: NetworkConfig, trials: int, rng=0, threads: int = 1) -> np.ndarray:
    """SINR samples of the nearest-satellite baseline."""
    seed = master_seed(rng)
    parts = run_blocks(lambda n, r: nearest_sinr(draw_links(cfg, n, r), cfg), trials, seed,
                       _STREAM_NEAREST, threads)
    return np.concatenate(parts)


def curve_from_sinr(sinr: np.ndarray, thresholds_db, source: str = MONTE_CARLO) -> CoverageCurve:
    th = np.asarray(thresholds_db, dtype=float)
    n = sinr.size
    s = np.sort(sinr)
    gam = 10.0 ** (th / 10.0)
    hits = n - np.searchsorted(s, gam, side="right")
    lo, hi = wilson_interval(hits, n)
    return CoverageCurve(tuple(th.tolist()), tuple((hits / n).tolist()),
                         tuple(((hi - lo) / 2).tolist()), source)


def estimate_coverage(cfg: NetworkConfig, thresholds_db, trials: int, csi: str = PERFECT,
                      rng=0, threads: int = 1, pool_size: int | None = None) -> CoverageCurve:
    batch = simulate_cell_free(cfg, trials, csi, rng, pool_size, threads)
    return curve_from_sinr(batch.sinr, thresholds_db)


def nearest_satellite_coverage(cfg: NetworkConfig, thresholds_db, trials: int, rng=0,
                               threads: int = 1) -> CoverageCurve:
    return curve_from_sinr(simulate_nearest(cfg, trials, rng, threads), thresholds_db)


def coverage_bounds(curve: CoverageCurve, trials: int):
    """Wilson 95% interval (low, high) for each point of an empirical curve."""
    cov = np.asarray(curve.coverage)
    return wilson_interval(np.round(cov * trials), trials)


def ccdf_from_samples(samples: np.ndarray, x) -> np.ndarray:
    s = np.sort(np.asarray(samples, dtype=float))
    return 1.0 - np.searchsorted(s, np.asarray(x, dtype=float), side="right") / s.size


def empirical_dss_ccdf(cfg: NetworkConfig, trials: int, csi: str = PERFECT, rng=0,
                       pool_size: int | None = None, threads: int = 1,
                       grid_points: int = 201) -> EmpiricalCurve:
    """Empirical CCDF of the desired amplitude S on a grid spanning the samples."""
    ds = simulate_cell_free(cfg, trials, csi, rng, pool_size, threads).ds
    x = np.linspace(0.0, float(ds.max()) if ds.size else 1.0, grid_points)
    return EmpiricalCurve(tuple(x.tolist()), tuple(ccdf_from_samples(ds, x).tolist()), ds.size)


def mean_interference(cfg: NetworkConfig, trials: int, rng=0, threads: int = 1):
    """Sample means of the normalized MUI and ISI powers."""
    batch = simulate_cell_free(cfg, trials, PERFECT, rng, None, threads)
    return float(batch.mui.mean()), float(batch.isi.mean())
