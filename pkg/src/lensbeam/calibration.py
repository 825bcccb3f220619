"""Calibrated antenna parameters and the routines that derive them.

The aperture model has four free scalars: a Gaussian illumination taper and
an aperture-efficiency factor for each lens family.  Each is fitted to one
measured quantity:

* MULA taper: best-port full HPBW of the largest lens = 13 deg.
* MULA efficiency: best-port gain 8 dB above the bare patch.
* SULA taper: single-cube full HPBW = 20 deg.
* SULA efficiency: 2x2 peak gain equal to ``sula_2x2_target_dbi``.

A fifth scalar, the NLoS excess loss of backhaul case 1, is solved from the
measured lens throughput.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from scipy.optimize import brentq

from .arrays import ArrayConfig, PatchElement
from .lens import POLYETHYLENE_EPS_R, make_lens, make_sula_lens
from .radiation import hpbw, pattern_for_port, peak_gain
from .scenario import ConfigError, Scenario, load_yaml, preset_path
from .units import AngularGrid, RadioConstants

MULA_HPBW_TARGET = 13.0
MULA_ADVANTAGE_DB = 8.0
SULA_HPBW_TARGET = 20.0
CASE1_LENS_RATE = 16.9e9


@dataclass(frozen=True)
class Calibration:
    element_q: float = 2.0
    eps_r: float = POLYETHYLENE_EPS_R
    mula_taper_radius: float = 0.0178
    mula_efficiency: float = 0.8
    sula_taper_radius: float = 0.012
    sula_efficiency: float = 3.7
    sula_2x2_target_dbi: float = 24.6
    nlos_excess_loss_db: float = 28.3
    grid_resolution: float = 1.0

    def replace(self, **changes) -> "Calibration":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def element(self) -> PatchElement:
        return PatchElement(q=self.element_q)

    @property
    def grid(self) -> AngularGrid:
        return AngularGrid(self.grid_resolution)


def calibration_from_dict(data: dict) -> Calibration:
    known = {f.name for f in dataclasses.fields(Calibration)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown calibration keys: {', '.join(unknown)}")
    try:
        return Calibration(**{k: float(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad calibration value: {exc}") from exc


def load_calibration(path=None) -> Calibration:
    """Shipped calibration, or the one stored at ``path``."""
    return calibration_from_dict(load_yaml(path or preset_path("calibration")) or {})


def write_calibration(cal: Calibration, path) -> None:
    import yaml

    header = "# Fitted antenna and channel scalars; regenerate with `lensbeam calibrate`.\n"
    Path(path).write_text(header + yaml.safe_dump(cal.to_dict(), sort_keys=False))


# ---------------------------------------------------------------- builders

def mula_config(cal: Calibration, size: int = 3, variant: str = "MULA_4x4", **kw) -> ArrayConfig:
    lens = make_lens(size, cal.eps_r, cal.mula_efficiency, cal.mula_taper_radius)
    return ArrayConfig(variant, lens, cal.element, **kw)


def sula_config(cal: Calibration, variant: str = "SULA_2x2") -> ArrayConfig:
    lens = make_sula_lens(cal.eps_r, cal.sula_efficiency, cal.sula_taper_radius)
    return ArrayConfig(variant, lens, cal.element)


def no_lens_config(cal: Calibration, variant: str = "NO_LENS_4x4") -> ArrayConfig:
    return ArrayConfig(variant, None, cal.element)


def antenna_config(cal: Calibration, variant: str, size: int = 3, **kw) -> ArrayConfig:
    """Calibrated configuration for any variant name."""
    if variant.startswith("NO_LENS_"):
        return no_lens_config(cal, variant)
    if variant.startswith("SULA"):
        return sula_config(cal, variant)
    return mula_config(cal, size, variant, **kw)


def best_port(config: ArrayConfig, grid: AngularGrid, constants: RadioConstants | None = None) -> int:
    """Port with the highest peak gain; ties go to the lower index."""
    gains = [peak_gain(pattern_for_port(config, p, grid, constants)) for p in config.ports]
    return config.ports[max(range(len(gains)), key=lambda i: (gains[i], -i))]


def no_lens_gain_dbi(cal: Calibration, variant: str = "NO_LENS_4x4") -> float:
    return peak_gain(pattern_for_port(no_lens_config(cal, variant), 1, cal.grid))


def backhaul_gain_dbi(cal: Calibration, lens: bool) -> float:
    """Peak gain of the 2x2 backhaul antenna with or without lenses."""
    variant = "SULA_2x2" if lens else "NO_LENS_SULA_2x2"
    return peak_gain(pattern_for_port(antenna_config(cal, variant), 1, cal.grid))


# ---------------------------------------------------------------- fitting

def _fit_taper(make, port, target, lo, hi, grid) -> float:
    def err(w):
        return hpbw(pattern_for_port(make(w), port, grid)) - target

    return float(brentq(err, lo, hi, xtol=1e-6))


def calibrate_mula(cal: Calibration, size: int = 3) -> Calibration:
    """Fit the MULA taper to the measured beamwidth, then the efficiency to the gain advantage."""
    grid = cal.grid
    unit = cal.replace(mula_efficiency=1.0)
    port = best_port(mula_config(unit.replace(mula_taper_radius=0.018), size), grid)
    w = _fit_taper(lambda w: mula_config(unit.replace(mula_taper_radius=w), size),
                   port, MULA_HPBW_TARGET, 0.012, 0.03, grid)
    unit = unit.replace(mula_taper_radius=w)
    port = best_port(mula_config(unit, size), grid)
    g = peak_gain(pattern_for_port(mula_config(unit, size), port, grid))
    target = no_lens_gain_dbi(cal) + MULA_ADVANTAGE_DB
    return cal.replace(mula_taper_radius=w, mula_efficiency=10 ** ((target - g) / 10))


def calibrate_sula(cal: Calibration) -> Calibration:
    """Fit the SULA taper to the cube beamwidth, then the efficiency to the 2x2 gain."""
    grid = cal.grid
    unit = cal.replace(sula_efficiency=1.0)
    w = _fit_taper(lambda w: sula_config(unit.replace(sula_taper_radius=w), "SULA_1x1"),
                   1, SULA_HPBW_TARGET, 0.006, 0.025, grid)
    unit = unit.replace(sula_taper_radius=w)
    g = peak_gain(pattern_for_port(sula_config(unit, "SULA_2x2"), 1, grid))
    return cal.replace(sula_taper_radius=w,
                       sula_efficiency=10 ** ((cal.sula_2x2_target_dbi - g) / 10))


def calibrate_excess_loss(cal: Calibration, scenario: Scenario) -> Calibration:
    from .syssim import solve_excess_loss

    g = backhaul_gain_dbi(cal, lens=True)
    return cal.replace(nlos_excess_loss_db=solve_excess_loss(scenario, g, CASE1_LENS_RATE))


def calibrate_all(cal: Calibration | None = None, case1: Scenario | None = None) -> Calibration:
    from .scenario import load_preset

    cal = cal or Calibration()
    cal = calibrate_mula(cal)
    cal = calibrate_sula(cal)
    return calibrate_excess_loss(cal, case1 or load_preset("backhaul_1"))


@lru_cache(maxsize=None)
def shipped() -> Calibration:
    return load_calibration()

