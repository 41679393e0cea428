"""Walker-style shells of circular orbits, fixed or randomly phased.

A plane with right ascension ``raan`` and inclination ``i`` places a
satellite with argument of latitude ``u`` at

    R (cos raan cos u - sin raan sin u cos i,
       sin raan cos u + cos raan sin u cos i,
       sin u sin i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import MONTE_CARLO, CoverageCurve
from .config import NetworkConfig
from .errors import ParameterError
from .geometry import EARTH_RADIUS_KM, SphericalPoint, min_vertical_height
from .montecarlo import (Links, co_served_mean, curve_from_sinr, link_powers, master_seed,
                         run_blocks, sinr_from_parts, PERFECT)

FIXED = "fixed"
RANDOM = "random"
_STREAM_WALKER = 3


@dataclass(frozen=True)
class ShellSpec:
    inclination_deg: float
    num_planes: int
    sats_per_plane: int
    altitude_km: float

    def __post_init__(self):
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ParameterError("plane and satellite counts must be >= 1")
        if not 0.0 <= self.inclination_deg <= 90.0:
            raise ParameterError("inclination_deg must lie in [0, 90]")
        if not self.altitude_km > 0:
            raise ParameterError("altitude_km must be positive")

    @property
    def count(self) -> int:
        return self.num_planes * self.sats_per_plane


@dataclass(frozen=True)
class WalkerSpec:
    shells: tuple
    phase_mode: str = FIXED
    phasing_factor: int = 1
    earth_radius_km: float = EARTH_RADIUS_KM

    def __post_init__(self):
        if not self.shells:
            raise ParameterError("at least one shell is required")
        if self.phase_mode not in (FIXED, RANDOM):
            raise ParameterError(f"phase_mode must be {FIXED!r} or {RANDOM!r}")

    @property
    def count(self) -> int:
        return sum(s.count for s in self.shells)


def starlink_like(altitude_km: float = 500.0, sap_density: float = 1e-5,
                  phase_mode: str = RANDOM, inclinations=(33.0, 43.0, 53.0), planes: int = 28,
                  earth_radius_km: float = EARTH_RADIUS_KM) -> WalkerSpec:
    """Equal shells whose total count matches a shell PPP of ``sap_density``."""
    rs = earth_radius_km + altitude_km
    target = 4.0 * math.pi * rs * rs * sap_density
    per_plane = max(1, round(target / (len(inclinations) * planes)))
    shells = tuple(ShellSpec(i, planes, per_plane, altitude_km) for i in inclinations)
    return WalkerSpec(shells, phase_mode, earth_radius_km=earth_radius_km)


def _shell_positions(shell: ShellSpec, raan: np.ndarray, u: np.ndarray, radius: float):
    inc = math.radians(shell.inclination_deg)
    cr, sr = np.cos(raan), np.sin(raan)
    cu, su = np.cos(u), np.sin(u)
    ci, si = math.cos(inc), math.sin(inc)
    return radius * np.stack((cr * cu - sr * su * ci, sr * cu + cr * su * ci, su * si), axis=-1)


def _shell_angles(shell: ShellSpec, mode: str, f: int, rng, n_draws: int):
    """RAAN and argument of latitude arrays of shape (n_draws, planes, sats)."""
    p, s = shell.num_planes, shell.sats_per_plane
    j = np.arange(p)[:, None]
    k = np.arange(s)[None, :]
    raan = np.broadcast_to(2.0 * math.pi * j / p, (p, s))
    u = 2.0 * math.pi * k / s + 2.0 * math.pi * f * j / (p * s)
    if mode == FIXED:
        return np.broadcast_to(raan, (n_draws, p, s)), np.broadcast_to(u, (n_draws, p, s))
    d_raan = rng.random((n_draws, p, 1)) * (2.0 * math.pi / p)
    d_u = rng.random((n_draws, p, 1)) * (2.0 * math.pi)
    return raan[None] + d_raan, 2.0 * math.pi * k[None] / s + d_u


def generate_array(spec: WalkerSpec, rng: np.random.Generator | None = None,
                   n_draws: int = 1) -> np.ndarray:
    """Positions (km) of shape (n_draws, count, 3)."""
    if spec.phase_mode == RANDOM and rng is None:
        raise ParameterError("random phase mode needs an rng")
    out = []
    for sh in spec.shells:
        raan, u = _shell_angles(sh, spec.phase_mode, spec.phasing_factor, rng, n_draws)
        pos = _shell_positions(sh, raan, u, spec.earth_radius_km + sh.altitude_km)
        out.append(pos.reshape(n_draws, -1, 3))
    return np.concatenate(out, axis=1)


def generate(spec: WalkerSpec, rng: np.random.Generator | None = None) -> list:
    pos = generate_array(spec, rng)[0]
    radii = np.linalg.norm(pos, axis=1)
    dirs = pos / radii[:, None]
    out = []
    start = 0
    for sh in spec.shells:
        r = spec.earth_radius_km + sh.altitude_km
        for d in dirs[start:start + sh.count]:
            out.append(SphericalPoint(tuple(map(float, d)), r))
        start += sh.count
    return out


def observer_position(lat_deg: float, earth_radius_km: float) -> np.ndarray:
    lat = math.radians(lat_deg)
    return earth_radius_km * np.array([math.cos(lat), 0.0, math.sin(lat)])


def _links_from_positions(pos: np.ndarray, observer: np.ndarray, cfg: NetworkConfig,
                          rng: np.random.Generator) -> Links:
    """Visible links for a stack of constellations ``pos`` (n, count, 3)."""
    n = pos.shape[0]
    up = observer / np.linalg.norm(observer)
    rel = pos - observer
    height = rel @ up
    visible = height > 0
    trial, idx = np.nonzero(visible)
    rel = rel[trial, idx]
    h = height[trial, idx]
    dist = np.linalg.norm(rel, axis=1)
    serving = h >= min_vertical_height(cfg.geometry)
    ch = cfg.channel
    m = trial.size
    amp = np.sqrt(rng.gamma(ch.nakagami_m, ch.omega / ch.nakagami_m, m))
    phase = rng.random(m) * (2.0 * math.pi)
    users = np.where(serving, 1 + rng.poisson(co_served_mean(cfg), m), 1)
    return Links(n, trial, dist, serving, amp, phase, users)


def _points_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 3)
    if not points:
        return np.zeros((0, 3))
    return np.array([p.position_km for p in points])


def coverage_at_latitude(points, observer_lat_deg: float, cfg: NetworkConfig, thresholds_db,
                         trials: int, rng=0, csi: str = PERFECT, threads: int = 1) -> CoverageCurve:
    """Coverage seen from ``observer_lat_deg`` (longitude 0).

    ``points`` is either a fixed constellation (SphericalPoint list or
    (n, 3) array) or a WalkerSpec; a random-mode spec is redrawn per trial.
    """
    seed = master_seed(rng)
    observer = observer_position(observer_lat_deg, cfg.geometry.earth_radius_km)
    spec = points if isinstance(points, WalkerSpec) else None
    fixed = None
    if spec is None:
        fixed = _points_array(points)
    elif spec.phase_mode == FIXED:
        fixed = generate_array(spec)[0]

    def block(n, r):
        if fixed is not None:
            pos = np.broadcast_to(fixed, (n,) + fixed.shape)
        else:
            pos = generate_array(spec, r, n)
        links = _links_from_positions(pos, observer, cfg, r)
        ds, mui, isi, ok = link_powers(links, cfg, csi, None, r)
        return sinr_from_parts(ds, mui, isi, cfg.noise_to_signal, ok)

    sinr = np.concatenate(run_blocks(block, trials, seed, _STREAM_WALKER, threads))
    return curve_from_sinr(sinr, thresholds_db, MONTE_CARLO)
