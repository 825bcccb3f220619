"""Physical constants, dB helpers, angular grids and aperture fields.

Everything is SI internally. Angles are stored in degrees on grids and
converted to radians at the point of use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_FREQUENCY = 28e9
THERMAL_NOISE_DBM_HZ = -174.0


def db_from_linear(x):
    """10*log10(x); raises ValueError for non-positive input."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("db_from_linear requires strictly positive input")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def linear_from_db(db):
    out = np.power(10.0, np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def dbm_to_watt(dbm):
    return linear_from_db(dbm) * 1e-3


def watt_to_dbm(w):
    return db_from_linear(np.asarray(w, dtype=float) * 1e3)


@dataclass(frozen=True)
class RadioConstants:
    frequency: float

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength


def make_constants(frequency: float = DEFAULT_FREQUENCY) -> RadioConstants:
    return RadioConstants(float(frequency))


@dataclass(frozen=True)
class AngularGrid:
    """Regular (theta, phi) sampling of the full sphere.

    ``theta`` is the polar angle from boresight (+z) in [0, 180] and ``phi``
    the azimuth in [0, 360).  Each sample carries the exact solid angle of
    its cell, so the weights sum to 4*pi.

    Signed angles in [-90, 90] are used for plane cuts: the vertical plane
    is phi = 90 (positive side) / phi = 270 (negative side), the horizontal
    plane phi = 0 / phi = 180.
    """

    resolution: float = 1.0
    theta_max: float = 180.0

    def __post_init__(self):
        if not 0 < self.resolution <= 90:
            raise ValueError("resolution must be in (0, 90] degrees")
        for name, span in (("theta_max", self.theta_max), ("360", 360.0)):
            n = span / self.resolution
            if abs(n - round(n)) > 1e-9:
                raise ValueError(f"resolution must divide {name}")

    @cached_property
    def theta(self) -> np.ndarray:
        n = int(round(self.theta_max / self.resolution))
        return np.linspace(0.0, self.theta_max, n + 1)

    @cached_property
    def phi(self) -> np.ndarray:
        n = int(round(360.0 / self.resolution))
        return np.arange(n) * self.resolution

    @property
    def shape(self) -> tuple[int, int]:
        return (self.theta.size, self.phi.size)

    @cached_property
    def weights(self) -> np.ndarray:
        """Solid angle (sr) of every (theta, phi) cell, shape ``self.shape``."""
        h = np.deg2rad(self.resolution)
        t = np.deg2rad(self.theta)
        lo = np.clip(t - h / 2, 0.0, np.pi)
        hi = np.clip(t + h / 2, 0.0, np.pi)
        band = np.cos(lo) - np.cos(hi)
        return np.outer(band, np.full(self.phi.size, h))

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit vectors, shape ``self.shape + (3,)``."""
        t = np.deg2rad(self.theta)[:, None]
        p = np.deg2rad(self.phi)[None, :]
        return np.stack(
            np.broadcast_arrays(np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)),
            axis=-1,
        )

    def phi_index(self, phi_deg: float) -> int:
        idx = int(np.argmin(np.abs(((self.phi - phi_deg) + 180) % 360 - 180)))
        if abs(((self.phi[idx] - phi_deg) + 180) % 360 - 180) > 1e-9:
            raise ValueError(f"phi={phi_deg} is not a grid sample")
        return idx


@dataclass(frozen=True)
class ComplexField:
    """Complex aperture amplitudes on a square lattice in the z=0 plane.

    ``values[i, j]`` sits at ``(x[i], y[j])``.  Amplitudes are scaled so that
    ``sum(|values|**2) * pitch**2`` is the power crossing the aperture (W).
    """

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    pitch: float
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.values.shape != (self.x.size, self.y.size):
            raise ValueError("values shape does not match lattice")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("aperture field contains non-finite values")

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.pitch**2)

    def check_sampling(self, wavelength: float) -> None:
        if self.pitch > wavelength / 4 * (1 + 1e-9):
            raise AliasingError(
                f"aperture pitch {self.pitch:.3e} m exceeds lambda/4 = {wavelength / 4:.3e} m"
            )


class AliasingError(ValueError):
    """Aperture lattice too coarse for far-field integration."""


def json_safe(obj):
    """Copy of ``obj`` with non-finite floats replaced by ``None`` (strict JSON)."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj
