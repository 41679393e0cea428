"""Parameter records shared by the analytic and simulation engines.

Powers are stored linear in watts.  ``NetworkConfig.reference()`` returns the
reference system: 500 km shell, 75 deg dome angle, 1e-5 SAPs/km^2,
3e-6 UTs/km^2, 2 GHz carrier, 33/30 dBm data/pilot power, -100 dBm noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .channel import ChannelConfig, dbm_to_watt, effective_gain
from .errors import ParameterError
from .geometry import GeometryConfig


@dataclass(frozen=True)
class IltControl:
    ilt_a: float = 18.4
    ilt_b: int = 11
    ilt_c: int = 15

    def __post_init__(self):
        if not self.ilt_a > 0:
            raise ParameterError("ilt_a must be positive")
        if self.ilt_b < 1 or self.ilt_c < 1:
            raise ParameterError("ilt_b and ilt_c must be >= 1")

    @staticmethod
    def d_weight(c: int) -> float:
        return 2.0 if c == 0 else 1.0


@dataclass(frozen=True)
class NetworkConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    sap_density: float = 1e-5
    ut_density: float = 3e-6
    tx_power_data: float = float(dbm_to_watt(33.0))
    tx_power_pilot: float = float(dbm_to_watt(30.0))
    noise_power: float = float(dbm_to_watt(-100.0))
    pilot_len: int = 200
    coherence_len: int = 500

    def __post_init__(self):
        if self.sap_density < 0 or self.ut_density < 0:
            raise ParameterError("densities must be non-negative")
        for name in ("tx_power_data", "tx_power_pilot", "noise_power"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if not 0 <= self.pilot_len < self.coherence_len:
            raise ParameterError("need 0 <= pilot_len < coherence_len")

    @classmethod
    def reference(cls, **overrides) -> "NetworkConfig":
        return replace(cls(), **overrides)

    def with_geometry(self, **kw) -> "NetworkConfig":
        return replace(self, geometry=replace(self.geometry, **kw))

    def with_channel(self, **kw) -> "NetworkConfig":
        return replace(self, channel=replace(self.channel, **kw))

    @property
    def gain_main(self) -> float:
        return effective_gain("main", self.channel)

    @property
    def noise_to_signal(self) -> float:
        """sigma^2 / (rho_d G_ml): the noise floor after normalizing by the link budget."""
        return self.noise_power / (self.tx_power_data * self.gain_main)


@dataclass(frozen=True)
class CapacityConfig:
    bandwidth_hz: float = 30e6
    num_users: int = 1000
    scheme: str = "cell-free"

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ParameterError("bandwidth_hz must be positive")
        if self.num_users < 1:
            raise ParameterError("num_users must be >= 1")
        if self.scheme not in ("cell-free", "nearest-satellite"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")


def db_to_gamma(threshold_db):
    return 10.0 ** (threshold_db / 10.0)


def dome_angle_deg(cfg: NetworkConfig) -> float:
    return math.degrees(cfg.geometry.dome_angle_rad)
