"""Path loss, two-level antenna gains and Nakagami-m small-scale fading."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SPEED_OF_LIGHT_M_S = 299_792_458.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def dbm_to_watt(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelConfig:
    """Link parameters.  Gains are given in dB and converted on access.

    ``length_unit_m`` is the length unit of every distance fed to the
    channel (km by default), so the free-space factor ``(c / 4 pi f_c)^2``
    is expressed in that unit too.
    """
    path_loss_exponent: float = 2.0
    reference_loss: float = 1.0
    carrier_hz: float = 2e9
    tx_gain_mainlobe_db: float = 30.0
    tx_gain_sidelobe_db: float = 20.0
    rx_gain_db: float = 0.0
    nakagami_m: float = 2.0
    omega: float = 1.0
    length_unit_m: float = 1000.0

    def __post_init__(self):
        if self.path_loss_exponent < 0:
            raise ParameterError("path_loss_exponent must be >= 0")
        if self.nakagami_m < 0.5:
            raise ParameterError("nakagami_m must be >= 0.5")
        if not self.omega > 0:
            raise ParameterError("omega must be positive")
        if not self.reference_loss > 0:
            raise ParameterError("reference_loss must be positive")
        if not self.length_unit_m > 0:
            raise ParameterError("length_unit_m must be positive")

    @property
    def gain_ratio(self) -> float:
        """G_sl / G_ml; the free-space factor cancels."""
        return 10.0 ** ((self.tx_gain_sidelobe_db - self.tx_gain_mainlobe_db) / 10.0)


def path_loss(d, c: ChannelConfig):
    """Large-scale gain ``beta_0 * d^-alpha``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ParameterError("distance must be positive")
    out = c.reference_loss * d ** (-c.path_loss_exponent)
    return out if out.ndim else float(out)


def effective_gain(lobe: str, c: ChannelConfig) -> float:
    """Total linear gain ``G_t * G_r * (c / (4 pi f_c))^2`` for ``lobe`` in {'main', 'side'}."""
    if not c.carrier_hz > 0:
        raise ParameterError("carrier_hz must be positive")
    if lobe in ("main", "ml"):
        gt_db = c.tx_gain_mainlobe_db
    elif lobe in ("side", "sl"):
        gt_db = c.tx_gain_sidelobe_db
    else:
        raise ParameterError(f"unknown lobe {lobe!r}")
    c_light = SPEED_OF_LIGHT_M_S / c.length_unit_m
    return 10.0 ** ((gt_db + c.rx_gain_db) / 10.0) * (c_light / (4.0 * math.pi * c.carrier_hz)) ** 2


def nakagami_pdf(x, m: float, omega: float = 1.0):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = (math.log(2.0) + m * math.log(m / omega) - math.lgamma(m)
                + (2 * m - 1) * np.log(x) - m * x * x / omega)
    return np.where(x > 0, np.exp(logp), 0.0 if m > 0.5 else math.sqrt(2 / (math.pi * omega)))


def sample_nakagami_amplitude(c: ChannelConfig, rng: np.random.Generator, size=None):
    """|h| drawn as the square root of a Gamma(m, Omega/m) variate."""
    m = c.nakagami_m
    return np.sqrt(rng.gamma(m, c.omega / m, size))


def sample_fading(c: ChannelConfig, rng: np.random.Generator, size):
    """Complex small-scale coefficients: Nakagami magnitude, uniform phase."""
    amp = sample_nakagami_amplitude(c, rng, size)
    phase = rng.random(size) * (2.0 * math.pi)
    return amp * np.exp(1j * phase)


def rician_k_to_m(k: float) -> float:
    if k < 0:
        raise ParameterError("Rician K must be non-negative")
    return (k + 1.0) ** 2 / (2.0 * k + 1.0)
