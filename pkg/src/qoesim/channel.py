"""Downlink channel abstraction: path loss + Rayleigh fading -> CQI -> bits/PRB."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

# 4-bit CQI table efficiencies (bits per resource element), CQI 1..15.
CQI_EFFICIENCY = (
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
    2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
)

CQI_THRESHOLDS_DB = tuple(float(x) for x in np.round(np.linspace(-6.7, 19.5, 15), 4))


@dataclass(frozen=True)
class ChannelConfig:
    tx_power: float = 46.0
    noise_floor: float = -101.0
    pathloss_a: float = 128.1
    pathloss_b: float = 37.6
    cqi_thresholds: tuple[float, ...] = CQI_THRESHOLDS_DB
    cqi_efficiency: tuple[float, ...] = CQI_EFFICIENCY
    res_per_prb: int = 168  # 12 subcarriers x 14 symbols
    fading: bool = True

    def __post_init__(self):
        if len(self.cqi_thresholds) != 15 or len(self.cqi_efficiency) != 15:
            raise ConfigError("need exactly 15 CQI thresholds and 15 efficiencies")
        if any(b <= a for a, b in zip(self.cqi_thresholds, self.cqi_thresholds[1:])):
            raise ConfigError("CQI thresholds must be strictly ascending")
        if any(b <= a for a, b in zip(self.cqi_efficiency, self.cqi_efficiency[1:])):
            raise ConfigError("CQI efficiencies must be strictly ascending")
        if self.res_per_prb <= 0:
            raise ConfigError("res_per_prb must be positive")
        # rounding can flatten neighbouring efficiencies into equal bit counts
        bits = [round(e * self.res_per_prb) for e in self.cqi_efficiency]
        if any(b <= a for a, b in zip(bits, bits[1:])) or bits[0] <= 0:
            raise ConfigError("bits per PRB must be positive and strictly increasing over CQI")

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown channel keys: {sorted(unknown)}")
        kw = dict(d)
        for k in ("cqi_thresholds", "cqi_efficiency"):
            if k in kw:
                kw[k] = tuple(float(x) for x in kw[k])
        return cls(**kw)


@dataclass(frozen=True)
class UeChannelState:
    distance: float
    snr_db: float
    cqi: int
    bits_per_prb: int


def pathloss_db(cfg: ChannelConfig, distance_km: float) -> float:
    return cfg.pathloss_a + cfg.pathloss_b * math.log10(distance_km)


def sample_snr(cfg: ChannelConfig, distance_km: float, rng: np.random.Generator) -> float:
    """One SNR draw in dB; the fading power is unit-mean exponential."""
    if distance_km <= 0:
        raise DomainError(f"distance must be positive, got {distance_km}")
    mean_snr = cfg.tx_power - pathloss_db(cfg, distance_km) - cfg.noise_floor
    if not cfg.fading:
        return mean_snr
    x = rng.exponential(1.0)
    if x <= 0.0:
        return -math.inf
    return mean_snr + 10.0 * math.log10(x)


def snr_to_cqi(cfg: ChannelConfig, snr_db: float) -> int:
    # thresholds are inclusive lower bounds
    return int(np.searchsorted(cfg.cqi_thresholds, snr_db, side="right"))


def bits_per_prb(cfg: ChannelConfig, cqi: int) -> int:
    if not 0 <= cqi <= 15:
        raise DomainError(f"cqi must be in [0, 15], got {cqi}")
    if cqi == 0:
        return 0
    return int(round(cfg.cqi_efficiency[cqi - 1] * cfg.res_per_prb))


def channel_state(cfg: ChannelConfig, distance_km: float, rng: np.random.Generator) -> UeChannelState:
    snr = sample_snr(cfg, distance_km, rng)
    cqi = snr_to_cqi(cfg, snr)
    return UeChannelState(distance_km, snr, cqi, bits_per_prb(cfg, cqi))


TRACE_CSV_COLUMNS = ("tti", "ue_id", "snr_db", "cqi", "bits_per_prb")
