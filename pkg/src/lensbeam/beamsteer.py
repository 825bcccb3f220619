"""Port-to-beam steering map, port selection and multi-beam codebooks."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .arrays import ArrayConfig
from .radiation import (
    RadiationPattern,
    UnboundedBeamwidth,
    cut,
    hpbw,
    pattern_for_port,
    peak_direction,
    peak_gain,
)
from .units import AngularGrid, RadioConstants, make_constants

CODEBOOK_HPBW = {8: 10.5, 16: 5.0, 32: 2.5, 64: 1.25}  # half-power half-widths, deg
SECTOR_HALF_WIDTH = 75.0
_PROFILE_STEP = 0.01  # deg, sampling of the 1-D beam profiles


class NoSteering(ValueError):
    """Every port of the map points the same way."""


def projected_angle(theta_deg: float, phi_deg: float, plane: str) -> float:
    """Signed angle (deg) of a direction projected onto a principal plane."""
    t, p = math.radians(theta_deg), math.radians(phi_deg)
    lateral = math.sin(t) * (math.sin(p) if plane == "vertical" else math.cos(p))
    return math.degrees(math.atan2(lateral, math.cos(t)))


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SteeringEntry:
    port: int
    theta_deg: float
    phi_deg: float
    gain_dbi: float
    hpbw_deg: float
    steer_deg: float  # peak direction projected on the map's steering plane


@dataclass(frozen=True)
class SteeringMap:
    entries: tuple[SteeringEntry, ...]
    plane: str
    source_hash: str

    def __getitem__(self, port: int) -> SteeringEntry:
        for e in self.entries:
            if e.port == port:
                return e
        raise KeyError(port)

    @property
    def ports(self) -> tuple[int, ...]:
        return tuple(e.port for e in self.entries)

    @property
    def degenerate(self) -> bool:
        dirs = {(round(e.theta_deg, 6), round(e.phi_deg, 6)) for e in self.entries}
        gains = [e.gain_dbi for e in self.entries]
        return len(dirs) == 1 and max(gains) - min(gains) < 0.1

    def to_json(self) -> list[dict]:
        keys = ("port", "theta_deg", "phi_deg", "gain_dbi", "hpbw_deg")
        return [{k: asdict(e)[k] for k in keys} for e in self.entries]


def steering_plane(config: ArrayConfig) -> str:
    # a 1x4 feed row lies along x; square feeds are read in the vertical plane
    return "horizontal" if config.shape[0] == 1 else "vertical"


def _entry(pattern: RadiationPattern, port: int, plane: str) -> SteeringEntry:
    theta, phi = peak_direction(pattern)
    try:
        width = hpbw(pattern, plane)
    except UnboundedBeamwidth:
        width = math.inf
    return SteeringEntry(port, theta, phi, peak_gain(pattern), width,
                         projected_angle(theta, phi, plane))


def build_steering_map(
    config: ArrayConfig,
    grid: AngularGrid | None = None,
    constants: RadioConstants | None = None,
    workers: int = 1,
) -> SteeringMap:
    grid = grid or AngularGrid()
    constants = constants or make_constants()
    plane = steering_plane(config)

    def one(port):
        return _entry(pattern_for_port(config, port, grid, constants), port, plane)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            entries = list(pool.map(one, config.ports))
    else:
        entries = [one(p) for p in config.ports]
    src = {"config": repr(config), "resolution": grid.resolution, "frequency": constants.frequency}
    return SteeringMap(tuple(entries), plane, config_hash(src))


def select_port(smap: SteeringMap, target) -> int:
    """Port whose beam is closest to ``target``.

    ``target`` is a signed angle (deg) in the map's steering plane or a
    ``(theta, phi)`` pair compared by great-circle distance.  Targets past
    the map's range land on the nearest extreme port; exact ties go to the
    lower port index.
    """
    if smap.degenerate:
        raise NoSteering("steering map is degenerate: no port steers the beam")
    if np.ndim(target) == 0:
        dist = {e.port: abs(e.steer_deg - float(target)) for e in smap.entries}
    else:
        t0, p0 = (math.radians(a) for a in target)
        u0 = np.array([math.sin(t0) * math.cos(p0), math.sin(t0) * math.sin(p0), math.cos(t0)])
        dist = {}
        for e in smap.entries:
            t, p = math.radians(e.theta_deg), math.radians(e.phi_deg)
            u = np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])
            dist[e.port] = math.acos(float(np.clip(u @ u0, -1.0, 1.0)))
    best = None
    for port in sorted(dist):
        if best is None or dist[port] < dist[best] - 1e-9:
            best = port
    return best


@dataclass(frozen=True)
class SwitchModel:
    raw_loss_db: float = 15.0
    compensation_db: float = 15.0
    delay_s: float = 0.0

    def __post_init__(self):
        if not 10.0 <= self.raw_loss_db <= 20.0:
            raise ValueError("raw switch loss must lie in [10, 20] dB")

    @property
    def net_loss_db(self) -> float:
        return self.raw_loss_db - self.compensation_db


def _source_profile(pattern: RadiationPattern, plane: str = "vertical"):
    """Relative power profile (peak = 1) of a source cut, recentred on its peak."""
    angles, values = cut(pattern, plane)
    i = int(np.argmax(values))
    return angles - angles[i], values / values[i], i


def _main_lobe_edges(offsets, rel, i):
    """Offsets of the first minimum on each side of the peak (or the cut end)."""
    lo = i
    while lo > 0 and rel[lo - 1] < rel[lo]:
        lo -= 1
    hi = i
    while hi < rel.size - 1 and rel[hi + 1] < rel[hi]:
        hi += 1
    return offsets[lo], offsets[hi]


@dataclass(frozen=True, eq=False)
class BeamCodebook:
    """Beams of one shape pointed at ``directions`` (azimuth, deg).

    A beam's gain toward azimuth offset ``a`` and elevation ``e`` is
    ``peak_gain * az_profile(a) * el_profile(e)``; the profiles are
    tabulated on a fine grid and the peak is set so the beam radiates
    ``radiated_fraction`` of the input power.
    """

    directions: np.ndarray
    half_width: float
    profile_axis: np.ndarray
    az_profile: np.ndarray
    el_profile: np.ndarray
    peak_gain: float
    radiated_fraction: float
    label: str = ""

    @property
    def n_beams(self) -> int:
        return int(self.directions.size)

    @property
    def peak_gain_dbi(self) -> float:
        return 10 * math.log10(self.peak_gain)

    @property
    def directivity_dbi(self) -> float:
        return 10 * math.log10(self.peak_gain / self.radiated_fraction)

    def gain(self, azimuth_deg, elevation_deg) -> np.ndarray:
        """Linear gain, shape (n_beams,) + broadcast(azimuth, elevation).shape."""
        az = np.asarray(azimuth_deg, dtype=float)
        el = np.asarray(elevation_deg, dtype=float)
        offs = (az[None, ...] - self.directions.reshape((-1,) + (1,) * az.ndim) + 180.0) % 360.0 - 180.0
        a = np.interp(offs, self.profile_axis, self.az_profile, left=0.0, right=0.0)
        e = np.interp(el, self.profile_axis, self.el_profile, left=0.0, right=0.0)
        return self.peak_gain * a * e[None, ...]

    def beam_solid_angle(self) -> float:
        """Sum over beams of the half-power solid angle (sr)."""
        el_width = _half_power_width(self.profile_axis, self.el_profile)
        az_width = _half_power_width(self.profile_axis, self.az_profile)
        return self.n_beams * math.radians(az_width) * math.radians(el_width)


def _half_power_width(axis, prof):
    i = int(np.argmax(prof))
    above = prof >= 0.5
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < prof.size - 1 and above[hi + 1]:
        hi += 1
    return float(axis[hi] - axis[lo])


def _reshape_profile(offsets, rel, i, scale, axis):
    """Main lobe compressed by ``scale``; sidelobes keep their shape and spacing."""
    left, right = _main_lobe_edges(offsets, rel, i)
    out = np.empty_like(axis)
    inner = (axis * scale >= left) & (axis * scale <= right)
    out[inner] = np.interp(axis[inner] * scale, offsets, rel)
    r = axis > right / scale
    out[r] = np.interp(axis[r] - right / scale + right, offsets, rel, right=0.0)
    lft = axis < left / scale
    out[lft] = np.interp(axis[lft] - left / scale + left, offsets, rel, left=0.0)
    return out


def make_beams(
    source: RadiationPattern,
    directions,
    half_width: float | None = None,
    label: str = "",
) -> BeamCodebook:
    """Beams shaped like ``source`` (vertical cut), optionally rescaled in azimuth.

    With ``half_width`` the azimuth main lobe is stretched or compressed to
    that half-power half-width; the elevation profile is the source cut.
    """
    offsets, rel, i = _source_profile(source)
    axis = np.arange(-180.0, 180.0 + _PROFILE_STEP / 2, _PROFILE_STEP)
    el = np.interp(axis, offsets, rel, left=0.0, right=0.0)
    if half_width is None:
        az = el.copy()
        half_width = _half_power_width(axis, az) / 2
    else:
        src_half = _half_power_width(axis, el) / 2
        az = _reshape_profile(offsets, rel, i, src_half / half_width, axis)
    el[np.abs(axis) > 90.0] = 0.0
    step = math.radians(_PROFILE_STEP)
    az_int = float(np.sum(az)) * step
    el_int = float(np.sum(el * np.cos(np.radians(axis)))) * step
    fraction = source.radiated_fraction
    peak = 4 * np.pi * fraction / (az_int * el_int)
    return BeamCodebook(np.asarray(directions, dtype=float), float(half_width), axis, az, el,
                        float(peak), float(fraction), label)


def make_codebook(n_beams: int, source: RadiationPattern, sector: float = SECTOR_HALF_WIDTH) -> BeamCodebook:
    """``n_beams`` uniformly spread over +-``sector`` with the listed half-power width."""
    if n_beams not in CODEBOOK_HPBW:
        raise ValueError(f"beam count must be one of {sorted(CODEBOOK_HPBW)}")
    dirs = np.linspace(-sector, sector, n_beams)
    return make_beams(source, dirs, CODEBOOK_HPBW[n_beams], label=f"{n_beams} beams")
