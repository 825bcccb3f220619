"""Patch element, feed layouts and port numbering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lens import LensSpec

PATCH_SIDE = 3.05e-3
PATCH_PITCH = 10e-3      # mechanical lattice pitch
SULA_UNIT_PITCH = 50e-3  # side of one static-user cube

LAYOUTS = {
    "SULA_1x1": ("SULA", 1, 1),
    "SULA_1x2": ("SULA", 2, 1),
    "SULA_1x4": ("SULA", 4, 1),
    "SULA_2x2": ("SULA", 2, 2),
    "MULA_1x4": ("MULA", 1, 4),
    "MULA_4x4": ("MULA", 4, 4),
}
PORT_ORDERS = ("row-major", "column-major")


@dataclass(frozen=True)
class PatchElement:
    """Patch modelled as a cos^q power pattern over the forward hemisphere."""

    side: float = PATCH_SIDE
    q: float = 2.0

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("pattern exponent q must be positive")

    @property
    def peak_gain(self) -> float:
        # 4*pi / integral(cos^q dOmega over the hemisphere) = 2(q+1)
        return 2.0 * (self.q + 1.0)

    @property
    def peak_gain_dbi(self) -> float:
        return 10.0 * math.log10(self.peak_gain)


def element_pattern(patch: PatchElement, theta, phi=None):
    """Linear power gain at polar angle ``theta`` (rad); zero behind the ground plane."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    g = np.where(c > 0, patch.peak_gain * np.power(np.clip(c, 0.0, None), patch.q), 0.0)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class ArrayConfig:
    """One antenna: feed layout, optional lens and port map.

    ``variant`` is one of :data:`LAYOUTS`, optionally prefixed with
    ``NO_LENS_`` for the same structure with the lens removed.  MULA ports
    are individual feed patches on a 10 mm lattice; a SULA has a single
    port driving all cubes in phase.  ``feed_distance_ratio`` places the
    feed plane at that fraction of the focal length behind the lens.
    """

    variant: str
    lens: LensSpec | None = None
    element: PatchElement = field(default_factory=PatchElement)
    feed_distance_ratio: float = 1.0
    port_order: str = "row-major"
    patch_pitch: float = PATCH_PITCH
    unit_pitch: float = SULA_UNIT_PITCH

    def __post_init__(self):
        base = self.variant.removeprefix("NO_LENS_")
        if self.variant.startswith("NO_LENS_"):
            if base in ("1x4", "4x4"):
                base = "MULA_" + base
            if base not in LAYOUTS:
                raise ValueError(f"unknown variant {self.variant!r}")
            if self.lens is not None:
                raise ValueError("NO_LENS variants cannot carry a lens")
        else:
            if base not in LAYOUTS:
                raise ValueError(f"unknown variant {self.variant!r}")
            if self.lens is None:
                raise ValueError(f"{self.variant} requires a lens")
        if self.port_order not in PORT_ORDERS:
            raise ValueError(f"port_order must be one of {PORT_ORDERS}")
        if not self.feed_distance_ratio > 0:
            raise ValueError("feed_distance_ratio must be positive")

    @property
    def layout(self) -> str:
        base = self.variant.removeprefix("NO_LENS_")
        return base if base in LAYOUTS else "MULA_" + base

    @property
    def kind(self) -> str:
        return LAYOUTS[self.layout][0]

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, cols): feed patches for MULA, cubes for SULA."""
        _, rows, cols = LAYOUTS[self.layout]
        return rows, cols

    @property
    def has_lens(self) -> bool:
        return self.lens is not None

    @property
    def ports(self) -> tuple[int, ...]:
        if self.kind == "SULA":
            return (1,)
        rows, cols = self.shape
        return tuple(range(1, rows * cols + 1))

    @property
    def feed_distance(self) -> float:
        if self.lens is None:
            raise ValueError("no lens attached")
        return self.lens.focal_length * self.feed_distance_ratio


def _lattice(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2) * pitch


def port_position(config: ArrayConfig, port: int) -> tuple[float, float]:
    """Lateral (x, y) of the feed behind ``port`` in metres.

    Ports count from 1 at the (-x, -y) corner; with the default row-major
    order the column (x) index runs fastest.
    """
    if port not in config.ports:
        raise ValueError(f"port {port} is not valid for {config.variant}")
    if config.kind == "SULA":
        return (0.0, 0.0)
    rows, cols = config.shape
    if config.port_order == "row-major":
        r, c = divmod(port - 1, cols)
    else:
        c, r = divmod(port - 1, rows)
    xs = _lattice(cols, config.patch_pitch)
    ys = _lattice(rows, config.patch_pitch)
    return (float(xs[c]), float(ys[r]))


def port_map(config: ArrayConfig) -> dict[int, tuple[float, float]]:
    return {p: port_position(config, p) for p in config.ports}


def unit_positions(config: ArrayConfig) -> np.ndarray:
    """(N, 2) centres of the concatenated cubes of a SULA; a 1xN stacks along y."""
    rows, cols = config.shape
    ys, xs = np.meshgrid(_lattice(rows, config.unit_pitch), _lattice(cols, config.unit_pitch), indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()])


_CONCAT_LAYOUTS = {"1x1": (1, 1), "1x2": (2, 1), "1x4": (4, 1), "2x2": (2, 2)}


def sula_concatenation_factor(layout: str, k: float, pitch: float = SULA_UNIT_PITCH):
    """Broadside array factor of concatenated cubes.

    Returns ``af(theta, phi)`` (radians) giving the complex sum of unit
    phasors; ``|af| == N`` at broadside.
    """
    if layout not in _CONCAT_LAYOUTS:
        raise ValueError(f"unsupported concatenation layout {layout!r}")
    rows, cols = _CONCAT_LAYOUTS[layout]
    ys, xs = np.meshgrid(_lattice(rows, pitch), _lattice(cols, pitch), indexing="ij")
    pos = np.column_stack([xs.ravel(), ys.ravel()])

    def af(theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        u = np.sin(theta) * np.cos(phi)
        v = np.sin(theta) * np.sin(phi)
        phase = k * (pos[:, 0, None] * u.ravel()[None, :] + pos[:, 1, None] * v.ravel()[None, :])
        return np.exp(1j * phase).sum(axis=0).reshape(np.broadcast(u, v).shape)

    return af


def grating_lobe_angles(pitch: float, wavelength: float) -> list[float]:
    """Broadside grating-lobe directions (deg from boresight) of a uniform lattice."""
    out = []
    m = 1
    while m * wavelength / pitch <= 1.0:
        out.append(math.degrees(math.asin(m * wavelength / pitch)))
        m += 1
    return out
