"""Spherical Poisson geometry for an LEO shell above the Earth.

All lengths are in km, areas in km^2 and densities in 1/km^2.  The typical
user terminal (UT) sits at the north pole of the Earth sphere, so a satellite
access point (SAP) at direction ``u`` on the shell is at height
``R_S * u_z - R_E`` above the UT's tangent plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

EARTH_RADIUS_KM = 6371.393

_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class GeometryConfig:
    earth_radius_km: float = EARTH_RADIUS_KM
    shell_radius_km: float = EARTH_RADIUS_KM + 500.0
    dome_angle_rad: float = math.radians(75.0)

    def __post_init__(self):
        if not self.earth_radius_km > 0:
            raise ParameterError("earth_radius_km must be positive")
        if not self.shell_radius_km > self.earth_radius_km:
            raise ParameterError("shell_radius_km must exceed earth_radius_km")
        if not 0.0 <= self.dome_angle_rad <= math.pi / 2 + 1e-15:
            raise ParameterError("dome_angle_rad must lie in [0, pi/2]")

    @property
    def altitude_km(self) -> float:
        return self.shell_radius_km - self.earth_radius_km

    @classmethod
    def from_altitude(cls, altitude_km, dome_angle_deg=75.0, earth_radius_km=EARTH_RADIUS_KM):
        return cls(earth_radius_km, earth_radius_km + altitude_km, math.radians(dome_angle_deg))


@dataclass(frozen=True)
class SphericalPoint:
    direction: tuple[float, float, float]
    radius_km: float

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > 1e-12:
            raise ParameterError(f"direction must be a unit vector (norm={norm!r})")
        if not self.radius_km > 0:
            raise ParameterError("radius_km must be positive")

    @property
    def position_km(self) -> np.ndarray:
        return self.radius_km * np.asarray(self.direction)


@dataclass(frozen=True)
class DistanceBounds:
    r_s_min_km: float
    r_s_max_km: float
    r_max_km: float


def _cos_sin(g: GeometryConfig):
    eta = g.dome_angle_rad
    # cos(pi/2) is 6e-17 in floating point; snap it so the eta = 90 deg
    # branches coincide exactly.
    if abs(eta - math.pi / 2) < 1e-15:
        return 0.0, 1.0
    return math.cos(eta), math.sin(eta)


def service_bounds(g: GeometryConfig) -> DistanceBounds:
    re, rs = g.earth_radius_km, g.shell_radius_km
    cos_eta, sin_eta = _cos_sin(g)
    r_s_min = rs - re
    r_s_max = math.sqrt(rs * rs - (re * sin_eta) ** 2) - re * cos_eta
    r_max = math.sqrt((rs - re) * (rs + re))
    # r_s_max can exceed r_max by an ulp at eta = 90 deg
    return DistanceBounds(r_s_min, min(r_s_max, r_max), r_max)


def min_vertical_height(g: GeometryConfig) -> float:
    """Smallest height above the UT's tangent plane of any serving SAP."""
    re, rs = g.earth_radius_km, g.shell_radius_km
    cos_eta, _ = _cos_sin(g)
    if cos_eta == 0.0:
        return 0.0
    c2 = cos_eta * cos_eta
    return c2 * (math.sqrt(re * re + (rs * rs - re * re) / c2) - re)


def _cdf_denominator(g: GeometryConfig) -> float:
    # r_s_max^2 - r_s_min^2, written the way it appears in the closed form
    re, rs = g.earth_radius_km, g.shell_radius_km
    cos_eta, sin_eta = _cos_sin(g)
    return 2.0 * re * (rs - re * sin_eta ** 2 - math.sqrt(rs * rs - (re * sin_eta) ** 2) * cos_eta)


def distance_cdf(d_km, g: GeometryConfig):
    """CDF of the distance from the typical UT to a uniformly placed serving SAP."""
    d = np.asarray(d_km, dtype=float)
    b = service_bounds(g)
    val = (d * d - b.r_s_min_km ** 2) / _cdf_denominator(g)
    out = np.where(d < b.r_s_min_km, 0.0, np.where(d > b.r_s_max_km, 1.0, np.clip(val, 0.0, 1.0)))
    return out if out.ndim else float(out)


def distance_pdf(d_km, g: GeometryConfig):
    d = np.asarray(d_km, dtype=float)
    b = service_bounds(g)
    inside = (d >= b.r_s_min_km) & (d <= b.r_s_max_km)
    out = np.where(inside, d / (0.5 * _cdf_denominator(g)), 0.0)
    return out if out.ndim else float(out)


def sample_service_distance(g: GeometryConfig, size, rng: np.random.Generator):
    """Inverse-CDF draws from :func:`distance_cdf`."""
    b = service_bounds(g)
    u = rng.random(size)
    return np.sqrt(b.r_s_min_km ** 2 + u * (b.r_s_max_km ** 2 - b.r_s_min_km ** 2))


def _check_r(r, g: GeometryConfig):
    b = service_bounds(g)
    r = np.asarray(r, dtype=float)
    lo = b.r_s_min_km * (1 - _RANGE_SLACK)
    hi = b.r_max_km * (1 + _RANGE_SLACK)
    if np.any((r < lo) | (r > hi)):
        raise ParameterError(
            f"distance outside [{b.r_s_min_km:.6g}, {b.r_max_km:.6g}] km")
    return r


def vertical_height_of(r_km, g: GeometryConfig):
    """Height above the UT's tangent plane of a shell point at distance ``r_km``."""
    r = _check_r(r_km, g)
    re, rs = g.earth_radius_km, g.shell_radius_km
    out = ((rs - re) * (rs + re) - r * r) / (2.0 * re)
    return out if out.ndim else float(out)


def cap_area(r_km, g: GeometryConfig):
    """Area of the shell cap lying within distance ``r_km`` of the typical UT."""
    r = _check_r(r_km, g)
    re, rs = g.earth_radius_km, g.shell_radius_km
    h_r = ((rs - re) * (rs + re) - r * r) / (2.0 * re)
    out = 2.0 * math.pi * (rs - re - h_r) * rs
    return out if out.ndim else float(out)


def cap_area_derivative(r_km, g: GeometryConfig):
    r = _check_r(r_km, g)
    out = 2.0 * math.pi * g.shell_radius_km / g.earth_radius_km * r
    return out if out.ndim else float(out)


def avg_users_per_sap(g: GeometryConfig, ut_density: float) -> float:
    """Mean number of UTs inside one SAP's service area (not clamped)."""
    if ut_density < 0:
        raise ParameterError("ut_density must be non-negative")
    re, rs = g.earth_radius_km, g.shell_radius_km
    cos_eta, sin_eta = _cos_sin(g)
    bracket = (re - re * re / rs * sin_eta ** 2
               - re * math.sqrt(rs * rs - (re * sin_eta) ** 2) * cos_eta / rs)
    return 2.0 * math.pi * re * ut_density * bracket


def users_for_power_split(g: GeometryConfig, ut_density: float) -> float:
    """Average user count used as a power-splitting denominator (at least 1)."""
    return max(avg_users_per_sap(g, ut_density), 1.0)


def mean_service_count(g: GeometryConfig, sap_density: float) -> float:
    return sap_density * cap_area(service_bounds(g).r_s_max_km, g)


def mean_interferer_count(g: GeometryConfig, sap_density: float) -> float:
    b = service_bounds(g)
    return sap_density * (cap_area(b.r_max_km, g) - cap_area(b.r_s_max_km, g))


# -- sampling ---------------------------------------------------------------

def uniform_directions(n: int, rng: np.random.Generator, z_min: float = -1.0) -> np.ndarray:
    """``n`` unit vectors uniform on the sphere (or on the cap ``z >= z_min``).

    Inverse CDF on cos(colatitude), uniform longitude.
    """
    z = z_min + (1.0 - z_min) * rng.random(n)
    phi = 2.0 * math.pi * rng.random(n)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack((rho * np.cos(phi), rho * np.sin(phi), z))


def sample_sphere_ppp_array(density_per_km2: float, radius_km: float,
                            rng: np.random.Generator) -> np.ndarray:
    if density_per_km2 < 0:
        raise ParameterError("density must be non-negative")
    if not radius_km > 0:
        raise ParameterError("radius must be positive")
    n = rng.poisson(4.0 * math.pi * radius_km ** 2 * density_per_km2)
    return uniform_directions(n, rng)


def sample_sphere_ppp(density_per_km2: float, radius_km: float,
                      rng: np.random.Generator) -> list[SphericalPoint]:
    dirs = sample_sphere_ppp_array(density_per_km2, radius_km, rng)
    # renormalise so each tuple passes the 1e-12 unit-norm check
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    return [SphericalPoint(tuple(map(float, d)), radius_km) for d in dirs]


def distances_from_pole(directions: np.ndarray, g: GeometryConfig) -> np.ndarray:
    """Distance from the typical UT (north pole of the Earth) to shell points."""
    re, rs = g.earth_radius_km, g.shell_radius_km
    z = np.asarray(directions)[..., 2]
    # |rs*u - re*e_z|^2 = rs^2 + re^2 - 2 rs re u_z
    return np.sqrt(np.clip(rs * rs + re * re - 2.0 * rs * re * z, 0.0, None))
