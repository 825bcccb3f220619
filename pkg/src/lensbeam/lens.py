"""Hyperbolic dielectric lens: sizing rule, phase screen and feed transform."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .units import ComplexField

POLYETHYLENE_EPS_R = 2.40
BASE_SIDE_MM = 55          # side of the 4x4 patch array
MECH_WAVELENGTH_MM = 10    # lattice "lambda", a mechanical dimension
F_OVER_D = 1.2

# lens inside one 50 x 50 x 60 mm static unit: D fills the face, f = 1.2 D = cube depth
SULA_DIAMETER_MM = 50


@dataclass(frozen=True)
class LensSpec:
    diameter: float
    focal_length: float
    eps_r: float = POLYETHYLENE_EPS_R
    size_index: int | None = None
    efficiency: float = 1.0
    taper_radius: float | None = None

    def __post_init__(self):
        if not self.diameter > 0 or not self.focal_length > 0:
            raise ValueError("lens diameter and focal length must be positive")
        if not self.eps_r > 1:
            raise ValueError("dielectric constant must exceed 1")
        if not self.efficiency > 0:
            raise ValueError("efficiency must be positive")
        if self.taper_radius is not None and not self.taper_radius > 0:
            raise ValueError("taper_radius must be positive")

    @property
    def index(self) -> float:
        return math.sqrt(self.eps_r)

    @property
    def radius(self) -> float:
        return self.diameter / 2


def lens_diameter_mm(i: int) -> int:
    """Diameter in mm from the base-side-plus-margin rule."""
    if i not in (1, 2, 3):
        raise ValueError(f"lens size index must be 1, 2 or 3, got {i}")
    margin = MECH_WAVELENGTH_MM * (2 * i - 1)
    return BASE_SIDE_MM + 2 * margin


def make_lens(i: int, eps_r: float = POLYETHYLENE_EPS_R, efficiency: float = 1.0,
              taper_radius: float | None = None) -> LensSpec:
    d_mm = lens_diameter_mm(i)
    # f/D = 6/5 keeps f an exact multiple of a millimetre for every size
    f_mm = d_mm * 6 / 5
    return LensSpec(d_mm / 1000, f_mm / 1000, eps_r, size_index=i,
                    efficiency=efficiency, taper_radius=taper_radius)


def make_sula_lens(eps_r: float = POLYETHYLENE_EPS_R, efficiency: float = 1.0,
                   taper_radius: float | None = None) -> LensSpec:
    d_mm = SULA_DIAMETER_MM
    return LensSpec(d_mm / 1000, d_mm * 6 / 5 / 1000, eps_r,
                    efficiency=efficiency, taper_radius=taper_radius)


def collimating_phase(rho, lens: LensSpec, k: float):
    """Phase (rad) the lens adds at radius ``rho`` to collimate a focal source."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > lens.radius * (1 + 1e-12)):
        raise ValueError("radial coordinate outside the lens aperture")
    f = lens.focal_length
    out = k * (f - np.sqrt(f * f + rho * rho))
    return float(out) if out.ndim == 0 else out


def asymptote_angle(lens: LensSpec) -> float:
    """Polar angle (rad) at which the hyperbolic surface runs off to infinity."""
    return math.acos(1.0 / lens.index)


def hyperbola_surface(theta, lens: LensSpec):
    """Distance (m) from the focus to the feed-side surface at polar angle ``theta`` (rad)."""
    theta = np.asarray(theta, dtype=float)
    n = lens.index
    denom = n * np.cos(theta) - 1.0
    if np.any(denom <= 0):
        raise ValueError("ray misses the hyperbolic surface (beyond asymptote)")
    out = (n - 1.0) * lens.focal_length / denom
    return float(out) if out.ndim == 0 else out


def surface_rim_angle(lens: LensSpec) -> float:
    """Polar angle (rad) at which the surface reaches the lens rim."""
    lo, hi = 0.0, asymptote_angle(lens) * (1 - 1e-12)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hyperbola_surface(mid, lens) * math.sin(mid) < lens.radius:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def central_thickness(lens: LensSpec) -> float:
    """Apex thickness (m) of the plano-hyperbolic lens with a zero-thickness rim."""
    t = surface_rim_angle(lens)
    return hyperbola_surface(t, lens) * math.cos(t) - lens.focal_length


def thick_lens_path(theta, lens: LensSpec):
    """Optical path (m) from the focus to the flat exit face along a ray at ``theta``.

    The ray refracts to the axis direction at the hyperbolic surface and then
    crosses the dielectric to the exit plane.
    """
    r = hyperbola_surface(theta, lens)
    exit_z = lens.focal_length + central_thickness(lens)
    return r + lens.index * (exit_z - r * np.cos(theta))


def transform_feed_field(
    feed_position,
    lens: LensSpec,
    element_pattern: Callable[[np.ndarray, np.ndarray], np.ndarray],
    k: float,
    pitch: float | None = None,
) -> ComplexField:
    """Field on the lens exit aperture produced by a unit-power feed.

    The lens is a phase screen in the z = 0 plane; ``feed_position`` is
    ``(x, y, z)`` with ``z < 0`` (the focal point is ``(0, 0, -f)``).  The
    feed radiates along +z with power gain ``element_pattern(theta, phi)``.
    Power that misses the aperture disk is dropped.  A lens with a
    ``taper_radius`` reshapes the intercepted power into a Gaussian
    illumination exp(-rho^2 / w^2) without changing its total.
    """
    fx, fy, fz = (float(c) for c in feed_position)
    if not fz < 0:
        raise ValueError("feed must sit behind the lens (z < 0)")
    wavelength = 2 * np.pi / k
    if pitch is None:
        pitch = wavelength / 4
    notes = []
    offset = math.hypot(fx, fy)
    if offset > lens.radius:
        msg = f"feed offset {offset * 1e3:.1f} mm lies outside the lens aperture"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    n = int(math.ceil(lens.diameter / pitch)) + 1
    coords = (np.arange(n) - (n - 1) / 2) * pitch
    x, y = np.meshgrid(coords, coords, indexing="ij")
    rho = np.hypot(x, y)
    inside = rho <= lens.radius

    dx, dy, dz = x - fx, y - fy, -fz
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    cos_t = dz / dist
    theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = np.arctan2(dy, dx)
    gain = element_pattern(theta, phi)
    amp = np.sqrt(gain * cos_t / (4 * np.pi * dist * dist))
    phase = k * dist + collimating_phase(np.where(inside, rho, 0.0), lens, k)
    values = np.where(inside, amp * np.exp(1j * phase), 0.0)
    if lens.taper_radius is not None:
        before = np.sum(np.abs(values) ** 2)
        values = values * np.exp(-(rho / lens.taper_radius) ** 2)
        after = np.sum(np.abs(values) ** 2)
        if after > 0:
            values = values * np.sqrt(before / after)
    return ComplexField(coords, coords.copy(), values, pitch, tuple(notes))
