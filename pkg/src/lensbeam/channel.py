"""Free-space propagation, scene geometry and user drops."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .radiation import RadiationPattern
from .units import THERMAL_NOISE_DBM_HZ, RadioConstants, make_constants


def fspl(distance, constants: RadioConstants | None = None):
    """Friis free-space path loss 20 log10(4 pi d / lambda) in dB."""
    constants = constants or make_constants()
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be positive")
    out = 20.0 * np.log10(4 * np.pi * d / constants.wavelength)
    return float(out) if out.ndim == 0 else out


def noise_power(bandwidth: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise floor in dBm."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return THERMAL_NOISE_DBM_HZ + 10 * math.log10(bandwidth) + noise_figure_db


@dataclass(frozen=True)
class Link:
    tx: tuple[float, float, float]
    rx: tuple[float, float, float]
    los: bool = True
    excess_loss_db: float = 0.0

    def __post_init__(self):
        if self.excess_loss_db < 0:
            raise ValueError("excess loss cannot be negative")
        if self.los and self.excess_loss_db != 0:
            raise ValueError("a line-of-sight link carries no excess loss")
        if not self.distance > 0:
            raise ValueError("tx and rx coincide")

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(np.subtract(self.rx, self.tx)))


@dataclass(frozen=True)
class Mount:
    """Antenna orientation: local +z along ``boresight``, local +y toward ``up``."""

    boresight: tuple[float, float, float] = (0.0, 0.0, 1.0)
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def rotation(self) -> np.ndarray:
        z = np.asarray(self.boresight, float)
        z = z / np.linalg.norm(z)
        y = np.asarray(self.up, float)
        y = y - (y @ z) * z
        if np.linalg.norm(y) < 1e-12:
            raise ValueError("up vector is parallel to boresight")
        y = y / np.linalg.norm(y)
        x = np.cross(y, z)
        return np.vstack([x, y, z])  # rows: local axes in global coordinates

    def local_angles(self, direction) -> tuple[float, float]:
        """(theta, phi) in degrees of a global direction in the antenna frame."""
        d = self.rotation() @ np.asarray(direction, float)
        d = d / np.linalg.norm(d)
        theta = math.degrees(math.acos(max(-1.0, min(1.0, d[2]))))
        phi = math.degrees(math.atan2(d[1], d[0])) % 360.0
        return theta, phi


class Isotropic:
    def gain(self, theta_deg, phi_deg) -> float:
        return 1.0


def pattern_gain(pattern: RadiationPattern, theta_deg: float, phi_deg: float) -> float:
    """Bilinear interpolation of a pattern's linear gain."""
    g = pattern.grid
    t = min(max(theta_deg, 0.0), g.theta[-1])
    i = min(int(t // g.resolution), g.theta.size - 2)
    ft = (t - g.theta[i]) / g.resolution
    p = phi_deg % 360.0
    j = int(p // g.resolution) % g.phi.size
    j1 = (j + 1) % g.phi.size
    fp = (p - g.phi[j]) / g.resolution
    G = pattern.gain
    return float(
        (1 - ft) * ((1 - fp) * G[i, j] + fp * G[i, j1])
        + ft * ((1 - fp) * G[i + 1, j] + fp * G[i + 1, j1])
    )


@dataclass(frozen=True)
class Antenna:
    pattern: RadiationPattern | Isotropic = field(default_factory=Isotropic)
    mount: Mount = field(default_factory=Mount)

    def gain_toward(self, direction) -> float:
        theta, phi = self.mount.local_angles(direction)
        if isinstance(self.pattern, Isotropic):
            return 1.0
        return pattern_gain(self.pattern, theta, phi)


def link_gain(link: Link, tx: Antenna, rx: Antenna, constants: RadioConstants | None = None) -> float:
    """G_tx + G_rx - FSPL - excess loss, in dB."""
    d = np.subtract(link.rx, link.tx)
    gt = tx.gain_toward(d)
    gr = rx.gain_toward(-d)
    if gt <= 0 or gr <= 0:
        return -math.inf
    return (10 * math.log10(gt) + 10 * math.log10(gr)
            - fspl(link.distance, constants) - link.excess_loss_db)


@dataclass(frozen=True)
class Blockage:
    """Axis-aligned footprint adding ``loss_db`` to every link crossing it."""

    x: tuple[float, float]
    y: tuple[float, float]
    loss_db: float

    def crosses(self, a, b) -> bool:
        """True if the 2-D segment a->b touches the rectangle (slab clipping)."""
        t0, t1 = 0.0, 1.0
        for k, (lo, hi) in enumerate((self.x, self.y)):
            d = b[k] - a[k]
            if abs(d) < 1e-15:
                if a[k] < lo or a[k] > hi:
                    return False
                continue
            ta, tb = (lo - a[k]) / d, (hi - a[k]) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
            if t0 > t1:
                return False
        return True


def blockage_loss(tx, rx_positions, blockages) -> np.ndarray:
    rx_positions = np.atleast_2d(rx_positions)
    loss = np.zeros(len(rx_positions))
    for blk in blockages:
        for n, rx in enumerate(rx_positions):
            if blk.crosses(tx[:2], rx[:2]):
                loss[n] += blk.loss_db
    return loss


def lattice(extent: float, spacing: float, mode: str) -> np.ndarray:
    """1-D user positions on [0, extent]: cell centres or inclusive end points."""
    if not spacing > 0 or spacing > extent:
        raise ValueError(f"spacing {spacing} m does not fit in {extent} m")
    if mode == "centers":
        n = int(math.floor(extent / spacing + 1e-9))
        return (np.arange(n) + 0.5) * spacing
    if mode == "inclusive":
        n = int(math.floor(extent / spacing + 1e-9)) + 1
        return np.arange(n) * spacing
    raise ValueError(f"unknown lattice mode {mode!r}")


def drop_users(scenario) -> np.ndarray:
    """Deterministic (N, 3) user positions for a multi-user scenario."""
    (x0, y0), (lx, ly) = scenario.area_origin, scenario.area_size
    xs = x0 + lattice(lx, scenario.spacing, scenario.lattice[0])
    ys = y0 + lattice(ly, scenario.spacing, scenario.lattice[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, scenario.rx_height)])
    if pts.size == 0:
        raise ValueError("user drop is empty")
    return pts


def user_angles(tx_position, boresight_azimuth_deg, users, downtilt_deg: float = 0.0):
    """Azimuth and elevation (deg) in the Tx frame, plus distance (m).

    The Tx boresight is the +y axis turned by ``boresight_azimuth_deg`` toward
    +x and then pitched down by ``downtilt_deg``. Positive azimuth lies toward
    +x when facing +y; positive elevation is above boresight.
    """
    d = np.asarray(users, float) - np.asarray(tx_position, float)
    a, t = math.radians(boresight_azimuth_deg), math.radians(downtilt_deg)
    fwd = np.array([math.sin(a) * math.cos(t), math.cos(a) * math.cos(t), -math.sin(t)])
    right = np.array([math.cos(a), -math.sin(a), 0.0])
    up = np.cross(right, fwd)
    x, y, z = d @ right, d @ fwd, d @ up
    az = np.degrees(np.arctan2(x, y))
    el = np.degrees(np.arctan2(z, np.hypot(x, y)))
    return az, el, np.linalg.norm(d, axis=1)
