"""Closed-form coverage and capacity.

Pipeline: Laplace transform of the aggregate desired amplitude
``S_hat = sum_l beta_l^{1/2} |h_l|`` over serving SAPs (PGFL of the SAP
process), Euler-summed Bromwich inversion to its CDF, average MUI/ISI by
Campbell's theorem, and coverage as the CCDF of the normalized amplitude at
the interference-plus-noise level.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import comb

from .config import CapacityConfig, IltControl, NetworkConfig
from .errors import NumericalError, NumericalWarning, ParameterError
from .geometry import service_bounds, users_for_power_split
from .quadrature import QuadControl, gauss_kronrod
from .specfun import nakagami_laplace

ANALYTIC = "analytic"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class CoverageCurve:
    thresholds_db: tuple
    coverage: tuple
    half_width: tuple
    source: str

    def __post_init__(self):
        n = len(self.thresholds_db)
        if len(self.coverage) != n or len(self.half_width) != n:
            raise ParameterError("curve fields must have equal lengths")
        cov = np.asarray(self.coverage, dtype=float)
        if np.any((cov < 0) | (cov > 1)):
            raise ParameterError("coverage values must lie in [0, 1]")

    def as_arrays(self):
        return (np.asarray(self.thresholds_db, float), np.asarray(self.coverage, float),
                np.asarray(self.half_width, float))


@dataclass(frozen=True)
class CapacityResult:
    num_users: int
    scheme: str
    spectral_efficiency: float
    system_capacity_bps: float
    per_user_bps: float


@dataclass
class IltStats:
    """Counts of inverted CDF values that had to be clamped into [0, 1]."""
    evaluations: int = 0
    clamped: int = 0
    worst_overshoot: float = 0.0


# -- Laplace transform of the desired-signal amplitude ----------------------

def _theta(s: np.ndarray, cfg: NetworkConfig, quad: QuadControl, rate: float) -> np.ndarray:
    b = service_bounds(cfg.geometry)
    if b.r_s_max_km <= b.r_s_min_km:
        return np.zeros_like(s)
    ch = cfg.channel
    half_alpha = 0.5 * ch.path_loss_exponent
    amp = math.sqrt(ch.reference_loss)

    def integrand(r):
        t = s[None, :] * (amp * r[:, None] ** (-half_alpha))
        return r[:, None] * (1.0 - nakagami_laplace(t, ch.nakagami_m, ch.omega))

    # only rate * theta matters downstream, so bound its absolute error there
    quad = replace(quad, abs_tol=max(quad.abs_tol, 1e-13 / rate))
    return gauss_kronrod(integrand, b.r_s_min_km, b.r_s_max_km, quad).value


def laplace_dss(s, cfg: NetworkConfig, quad: QuadControl = QuadControl()):
    """``E[exp(-s S_hat)]`` for complex s with Re s >= 0."""
    scalar = np.ndim(s) == 0
    ss = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(ss.real < 0):
        raise ParameterError("laplace_dss needs Re(s) >= 0")
    if cfg.sap_density == 0:
        out = np.ones_like(ss)
    else:
        g = cfg.geometry
        rate = 2.0 * math.pi * cfg.sap_density * g.shell_radius_km / g.earth_radius_km
        out = np.exp(-rate * _theta(ss, cfg, quad, rate))
    return out[0] if scalar else out


# -- Euler-summed Bromwich inversion ----------------------------------------

def ilt_weights(ctl: IltControl) -> np.ndarray:
    """Signed weights for terms c = 0..B+C, including 1/D_c and the binomial average."""
    n = ctl.ilt_b + ctl.ilt_c
    c = np.arange(n + 1)
    binom = comb(ctl.ilt_b, np.arange(ctl.ilt_b + 1)) * 2.0 ** (-ctl.ilt_b)
    # term c enters every partial sum s_{C+b} with C+b >= c
    avg = np.array([binom[max(ci - ctl.ilt_c, 0):].sum() for ci in c])
    d = np.where(c == 0, 2.0, 1.0)
    return (-1.0) ** c / d * avg


def ilt_nodes(x, ctl: IltControl) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    c = np.arange(ctl.ilt_b + ctl.ilt_c + 1)
    return (ctl.ilt_a + 2j * math.pi * c) / (2.0 * x[..., None])


def invert_laplace_cdf(x, transform, ctl: IltControl = IltControl(),
                       stats: IltStats | None = None):
    """CDF at ``x`` of a non-negative variable from its Laplace transform.

    ``transform`` maps a 1-D complex array of s values to the transform
    values.  Results are clamped into [0, 1]; overshoot above 0.05 warns.
    """
    scalar = np.ndim(x) == 0
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xx <= 0):
        raise ParameterError("x must be positive")
    s = ilt_nodes(xx, ctl)
    vals = np.asarray(transform(s.ravel())).reshape(s.shape)
    w = ilt_weights(ctl)
    raw = math.exp(0.5 * ctl.ilt_a) / xx * np.sum(w * (vals / s).real, axis=-1)
    over = np.maximum(raw - 1.0, -raw)
    if stats is not None:
        stats.evaluations += raw.size
        stats.clamped += int(np.sum(over > 0))
        stats.worst_overshoot = max(stats.worst_overshoot, float(np.max(over, initial=0.0)))
    if np.any(over > 0.05):
        warnings.warn(f"inverse Laplace overshoot {float(over.max()):.3g}", NumericalWarning)
    out = np.clip(raw, 0.0, 1.0)
    return float(out[0]) if scalar else out


def dss_ccdf(x, cfg: NetworkConfig, ctl: IltControl = IltControl(),
             quad: QuadControl = QuadControl(), stats: IltStats | None = None):
    """CCDF of the normalized desired amplitude ``S = S_hat / sqrt(|Phi|_avg)``."""
    scalar = np.ndim(x) == 0
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.ones_like(xx)
    pos = xx > 0
    if pos.any() and cfg.sap_density > 0:
        scale = math.sqrt(users_for_power_split(cfg.geometry, cfg.ut_density))
        cdf = invert_laplace_cdf(scale * xx[pos], lambda s: laplace_dss(s, cfg, quad), ctl, stats)
        out[pos] = 1.0 - cdf
    elif pos.any():
        out[pos] = 0.0
    return float(out[0]) if scalar else out


# -- average interference ---------------------------------------------------

def _radial_moment(r0: float, r1: float, alpha: float) -> float:
    """``int_{r0}^{r1} r^{1-alpha} dr`` with the log limit at alpha = 2."""
    if r1 <= r0:
        return 0.0
    if alpha == 2.0:
        return math.log(r1 / r0)
    return (r1 ** (2.0 - alpha) - r0 ** (2.0 - alpha)) / (2.0 - alpha)


def _campbell_prefactor(cfg: NetworkConfig) -> float:
    g, ch = cfg.geometry, cfg.channel
    return (2.0 * math.pi * cfg.sap_density * g.shell_radius_km * ch.omega * ch.reference_loss
            / g.earth_radius_km)


def mui_coefficient(cfg: NetworkConfig) -> float:
    phi = users_for_power_split(cfg.geometry, cfg.ut_density)
    return (phi - 1.0) / phi


def avg_mui(cfg: NetworkConfig) -> float:
    """Mean MUI power normalized by ``rho_d G_ml``."""
    if cfg.channel.path_loss_exponent < 0:
        raise ParameterError("path_loss_exponent must be >= 0")
    b = service_bounds(cfg.geometry)
    return (_campbell_prefactor(cfg) * mui_coefficient(cfg)
            * _radial_moment(b.r_s_min_km, b.r_s_max_km, cfg.channel.path_loss_exponent))


def avg_isi(cfg: NetworkConfig) -> float:
    """Mean inter-satellite interference normalized by ``rho_d G_ml``."""
    b = service_bounds(cfg.geometry)
    return (cfg.channel.gain_ratio * _campbell_prefactor(cfg)
            * _radial_moment(b.r_s_max_km, b.r_max_km, cfg.channel.path_loss_exponent))


def coverage_level(gamma, cfg: NetworkConfig):
    """Amplitude level x* at which the DSS CCDF gives the coverage at SINR ``gamma``."""
    gamma = np.asarray(gamma, dtype=float)
    return np.sqrt(gamma * (avg_mui(cfg) + avg_isi(cfg) + cfg.noise_to_signal))


def coverage_probability(gamma_th, cfg: NetworkConfig, ctl: IltControl = IltControl(),
                         quad: QuadControl = QuadControl(), stats: IltStats | None = None):
    """``P(SINR > gamma_th)`` with linear ``gamma_th``."""
    g = np.asarray(gamma_th, dtype=float)
    if np.any(g < 0):
        raise ParameterError("gamma_th must be non-negative")
    return dss_ccdf(coverage_level(g, cfg), cfg, ctl, quad, stats)


def coverage_curve(thresholds_db, cfg: NetworkConfig, ctl: IltControl = IltControl(),
                   quad: QuadControl = QuadControl()) -> CoverageCurve:
    th = np.asarray(thresholds_db, dtype=float)
    cov = np.atleast_1d(coverage_probability(10.0 ** (th / 10.0), cfg, ctl, quad))
    return CoverageCurve(tuple(th.tolist()), tuple(cov.tolist()), (0.0,) * th.size, ANALYTIC)


# -- capacity -----------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class SpectralControl:
    panel_width: float = 0.5
    floor: float = 1e-6
    quiet_panels: int = 3
    max_t: float = 64.0


def spectral_efficiency_from(pcov, ctl: SpectralControl = SpectralControl()) -> float:
    """``int_0^inf pcov(2^t - 1) dt`` with panel-wise Gauss-Legendre.

    ``pcov`` maps an array of linear thresholds to coverage values.  The
    integration stops once the integrand stays below ``floor`` at every node
    of ``quiet_panels`` consecutive panels.
    """
    total = 0.0
    quiet = 0
    a = 0.0
    while a < ctl.max_t:
        t = a + 0.5 * ctl.panel_width * (_GL_X + 1.0)
        vals = np.asarray(pcov(np.expm1(t * math.log(2.0))), dtype=float)
        total += 0.5 * ctl.panel_width * float(np.dot(_GL_W, vals))
        quiet = quiet + 1 if np.all(np.abs(vals) < ctl.floor) else 0
        if quiet >= ctl.quiet_panels:
            return total
        a += ctl.panel_width
    raise NumericalError(f"coverage tail did not vanish before t = {ctl.max_t}", partial=total)


def spectral_efficiency(cfg: NetworkConfig, ctl: IltControl = IltControl(),
                        quad: QuadControl = QuadControl(),
                        spec: SpectralControl = SpectralControl()) -> float:
    return spectral_efficiency_from(lambda g: coverage_probability(g, cfg, ctl, quad), spec)


def spectral_efficiency_from_curve(curve: CoverageCurve,
                                   spec: SpectralControl = SpectralControl()) -> float:
    """Spectral efficiency from a tabulated coverage curve.

    Coverage is interpolated linearly in dB; below the grid it is held at the
    first value, above the grid it is zero.  Each grid interval is integrated
    separately in t = log2(1 + gamma), so the kinks and the final cut-off fall
    on panel edges.  ``spec`` is unused and kept for signature symmetry.
    """
    th, cov, _ = curve.as_arrays()
    order = np.argsort(th)
    th, cov = th[order], cov[order]
    t_nodes = np.log2(1.0 + 10.0 ** (th / 10.0))
    total = t_nodes[0] * cov[0]
    for t0, t1, d0, d1, c0, c1 in zip(t_nodes[:-1], t_nodes[1:], th[:-1], th[1:],
                                      cov[:-1], cov[1:]):
        t = t0 + 0.5 * (t1 - t0) * (_GL_X + 1.0)
        db = 10.0 * np.log10(np.expm1(t * math.log(2.0)))
        vals = c0 + (c1 - c0) * (db - d0) / (d1 - d0)
        total += 0.5 * (t1 - t0) * float(np.dot(_GL_W, vals))
    return float(total)


def ut_density_for(num_users: int, cfg: NetworkConfig) -> float:
    """Uniform UT density for ``num_users`` terminals spread over the Earth."""
    re = cfg.geometry.earth_radius_km
    return num_users / (4.0 * math.pi * re * re)


def system_capacity(cfg: NetworkConfig, cap: CapacityConfig, ctl: IltControl = IltControl(),
                    quad: QuadControl = QuadControl(),
                    nearest_curve: CoverageCurve | None = None,
                    spectral_eff: float | None = None) -> CapacityResult:
    """System and per-user capacity in bit/s.

    The cell-free value is analytic; the caller chooses the UT density (see
    :func:`ut_density_for`).  The nearest-satellite value integrates the
    supplied empirical coverage curve, or uses ``spectral_eff`` directly.
    """
    if cap.scheme == "cell-free":
        se = spectral_eff if spectral_eff is not None else spectral_efficiency(cfg, ctl, quad)
        overhead = (cfg.coherence_len - cfg.pilot_len) / cfg.coherence_len
        total = cap.num_users * cap.bandwidth_hz * overhead * se
    else:
        if spectral_eff is not None:
            se = spectral_eff
        elif nearest_curve is not None:
            se = spectral_efficiency_from_curve(nearest_curve)
        else:
            raise ParameterError("nearest-satellite capacity needs a coverage curve")
        total = cap.num_users * cap.bandwidth_hz * se
    return CapacityResult(cap.num_users, cap.scheme, se, total, total / cap.num_users)
