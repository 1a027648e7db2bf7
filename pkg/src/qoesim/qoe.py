"""Empirical video QoE model: MoS, video/send rates, profile tables, SLA types.

Rates are carried in Mbps everywhere except the MoS formula, which takes
the video rate in kbps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError, InfeasibleSlaError

QUANTIZATION = 2.0
FEC = 0.4
MAX_MOS = 4.7
ZERO_DROP_MOS = 4.5


@dataclass(frozen=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DomainError(f"resolution must be positive, got {self.width}x{self.height}")

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def __str__(self):
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class G1070Params:
    """Fitted coefficients of the G.1070-style video quality curve."""

    a: float = 1.43
    b: float = 0.02
    c: float = 3.75
    d: float = 184.1
    e: float = 1.16
    h: float = 1.44
    g: float = 0.0388


DEFAULT_G1070 = G1070Params()


def mos_g1070(video_rate_kbps: float, fps: float, params: Optional[G1070Params] = None) -> float:
    """MoS of a video stream at ``video_rate_kbps`` and ``fps`` frames/s.

    The first factor grows with rate and saturates at ``1 + c``; the Gaussian
    factor (in log-fps) penalises frame rates far from the optimum
    ``a + b * rate`` for that rate.
    """
    if video_rate_kbps <= 0 or fps <= 0:
        raise DomainError(f"rate and fps must be positive, got {video_rate_kbps}, {fps}")
    p = params if params is not None else DEFAULT_G1070
    rate_term = p.c - p.c / (1.0 + video_rate_kbps / p.d) ** p.e
    log_gap = math.log(fps) - math.log(p.a + p.b * video_rate_kbps)
    width = 2.0 * p.h + p.g * video_rate_kbps
    return 1.0 + rate_term * math.exp(-(log_gap ** 2) / width ** 2)


def video_rate(resolution: Resolution, fps: float, q: float = QUANTIZATION) -> float:
    """Raw video rate in Mbps: pixels x fps x quantization / 1e6."""
    if fps < 0 or q <= 0:
        raise DomainError(f"need fps >= 0 and q > 0, got fps={fps}, q={q}")
    return resolution.pixels * fps * q / 1e6


def send_rate(video_rate_mbps: float, fec: float = FEC) -> float:
    """On-the-wire rate once a fraction ``fec`` of it is FEC redundancy."""
    if not 0.0 <= fec < 1.0:
        raise DomainError(f"fec must be in [0, 1), got {fec}")
    return video_rate_mbps / (1.0 - fec)


# (mos, call-drop probability) measured per Skype profile
MEASURED_CALL_DROP = (
    (4.62, 0.000), (4.69, 0.000), (4.72, 0.000), (4.74, 0.000),
    (4.15, 0.070), (4.46, 0.008), (4.57, 0.000), (4.66, 0.000),
    (2.92, 0.532), (3.63, 0.248), (3.96, 0.116), (4.32, 0.036),
)


class CallDropCurve:
    """Piecewise-linear, non-increasing map from MoS to call-drop probability."""

    def __init__(self, anchors: Iterable[tuple[float, float]], zero_from: float = ZERO_DROP_MOS):
        pts = sorted(set(anchors))
        if not any(abs(m - zero_from) < 1e-12 for m, _ in pts):
            pts.append((zero_from, 0.0))
            pts.sort()
        mos = np.array([m for m, _ in pts], dtype=float)
        prob = np.array([p for _, p in pts], dtype=float)
        if np.any(np.diff(mos) <= 0):
            raise ConfigError("call-drop anchors must have distinct MoS values")
        if np.any(np.diff(prob) > 0):
            raise ConfigError("call-drop anchors must be non-increasing in MoS")
        if np.any((prob < 0) | (prob > 1)):
            raise ConfigError("call-drop probabilities must lie in [0, 1]")
        self.mos = mos
        self.prob = prob
        self.zero_from = zero_from

    def __call__(self, mos: float) -> float:
        if not 1.0 <= mos <= 5.0:
            raise DomainError(f"mos must be in [1, 5], got {mos}")
        if mos >= self.zero_from:
            return 0.0
        return float(np.interp(mos, self.mos, self.prob))


DEFAULT_CALL_DROP = CallDropCurve(MEASURED_CALL_DROP)


def call_drop_of_mos(mos: float, curve: Optional[CallDropCurve] = None) -> float:
    return (curve or DEFAULT_CALL_DROP)(mos)


@dataclass(frozen=True)
class ClientType:
    level: int
    min_mos: float
    max_mos: float = MAX_MOS


CLIENT_TYPES = {
    1: ClientType(1, 2.9),
    2: ClientType(2, 3.5),
    3: ClientType(3, 4.1),
}


def client_type(level: int) -> ClientType:
    try:
        return CLIENT_TYPES[level]
    except KeyError:
        raise ConfigError(f"unknown client type {level!r}; expected 1, 2 or 3") from None


@dataclass(frozen=True)
class VideoProfile:
    app: str
    resolution: Resolution
    fps: float
    video_rate: float
    send_rate: float
    mos: float
    call_drop: float

    @property
    def label(self) -> str:
        return f"{self.resolution}@{self.fps:g}"


@dataclass(frozen=True)
class ApplicationSpec:
    """Resolution/FPS grid of one video-call application.

    ``rate_bounds`` (kbps) filters generated profiles when ``enforce_bounds``
    is set. A ``pinned_resolution`` replaces the resolution list and is
    never rate-filtered.
    """

    name: str
    resolutions: tuple[Resolution, ...]
    fps_grid: tuple[float, ...] = (5, 10, 15, 28)
    rate_bounds: Optional[tuple[float, float]] = None
    enforce_bounds: bool = True
    pinned_resolution: Optional[Resolution] = None


SKYPE = ApplicationSpec(
    "skype",
    (Resolution(640, 480), Resolution(320, 240), Resolution(160, 120)),
    rate_bounds=(5.0, 1200.0),
    # the measured Skype ladder runs well past the nominal 1.2 Mbps ceiling
    enforce_bounds=False,
)

GOOGLEPLUS = ApplicationSpec(
    "googleplus",
    (Resolution(640, 360), Resolution(480, 270), Resolution(320, 180),
     Resolution(240, 135), Resolution(160, 90), Resolution(80, 44)),
    rate_bounds=(28.0, 890.0),
)


def ichat_spec(parties: int = 2) -> ApplicationSpec:
    """iChat fixes 640x480 for two-party calls whatever the bandwidth."""
    if parties < 2:
        raise ConfigError("a call needs at least two parties")
    return ApplicationSpec(
        "ichat",
        (Resolution(640, 480), Resolution(320, 240), Resolution(160, 120)),
        rate_bounds=(49.0, 753.0),
        pinned_resolution=Resolution(640, 480) if parties == 2 else None,
    )


ICHAT = ichat_spec(2)

APPLICATIONS = {app.name: app for app in (SKYPE, GOOGLEPLUS, ICHAT)}


def get_application(name: str) -> ApplicationSpec:
    try:
        return APPLICATIONS[name]
    except KeyError:
        raise ConfigError(f"unknown application {name!r}; expected one of {sorted(APPLICATIONS)}") from None


def build_profile_table(
    app: ApplicationSpec,
    fec: float = FEC,
    q: float = QUANTIZATION,
    params: Optional[G1070Params] = None,
    curve: Optional[CallDropCurve] = None,
) -> list[VideoProfile]:
    """One profile per (resolution, fps) of ``app``, ascending by send rate."""
    resolutions = (app.pinned_resolution,) if app.pinned_resolution else app.resolutions
    if not resolutions or not app.fps_grid:
        raise ConfigError(f"{app.name}: empty resolution or fps grid")
    filter_rates = app.enforce_bounds and app.rate_bounds is not None and app.pinned_resolution is None

    table = []
    for res in resolutions:
        for fps in app.fps_grid:
            rv = video_rate(res, fps, q)
            if rv <= 0:
                continue
            if filter_rates:
                lo, hi = app.rate_bounds
                if not lo <= rv * 1000.0 <= hi:
                    continue
            mos = mos_g1070(rv * 1000.0, fps, params)
            table.append(VideoProfile(
                app=app.name,
                resolution=res,
                fps=fps,
                video_rate=rv,
                send_rate=send_rate(rv, fec),
                mos=mos,
                call_drop=call_drop_of_mos(mos, curve),
            ))
    if not table:
        raise ConfigError(f"{app.name}: no profile survives the rate bounds")
    table.sort(key=lambda p: (p.send_rate, p.mos))
    return table


def min_profile_for_type(table: Sequence[VideoProfile], ctype: ClientType) -> VideoProfile:
    """Cheapest profile (by send rate) meeting the client's MoS floor."""
    if not table:
        raise ConfigError("empty profile table")
    ok = [p for p in table if p.mos >= ctype.min_mos]
    if not ok:
        raise InfeasibleSlaError(
            f"no {table[0].app} profile reaches MoS {ctype.min_mos} (type {ctype.level})")
    return min(ok, key=lambda p: (p.send_rate, -p.mos))


def best_profile_within(
    table: Sequence[VideoProfile], bandwidth: float, ctype: ClientType
) -> Optional[VideoProfile]:
    """Highest-MoS profile fitting ``bandwidth`` Mbps and the floor, or None."""
    if bandwidth < 0:
        raise DomainError(f"bandwidth must be non-negative, got {bandwidth}")
    ok = [p for p in table if p.send_rate <= bandwidth and p.mos >= ctype.min_mos]
    if not ok:
        return None
    return max(ok, key=lambda p: (p.mos, -p.send_rate))


def max_mos_profile(table: Sequence[VideoProfile]) -> VideoProfile:
    return max(table, key=lambda p: (p.mos, -p.send_rate))


PROFILE_CSV_COLUMNS = ("app", "width", "height", "fps", "video_rate_mbps",
                       "send_rate_mbps", "mos", "call_drop")


def write_profiles_csv(table: Sequence[VideoProfile], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PROFILE_CSV_COLUMNS)
    for p in table:
        w.writerow([p.app, p.resolution.width, p.resolution.height, f"{p.fps:g}",
                    f"{p.video_rate:.6f}", f"{p.send_rate:.6f}", f"{p.mos:.6f}",
                    f"{p.call_drop:.6f}"])
