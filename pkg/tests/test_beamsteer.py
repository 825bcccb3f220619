import math

import numpy as np
import pytest

from lensbeam.arrays import ArrayConfig
from lensbeam.beamsteer import (
    CODEBOOK_HPBW,
    NoSteering,
    SteeringEntry,
    SteeringMap,
    SwitchModel,
    build_steering_map,
    make_beams,
    make_codebook,
    select_port,
)
from lensbeam.calibration import mula_config, no_lens_config
from lensbeam.lens import make_lens
from lensbeam.radiation import pattern_for_port


@pytest.fixture(scope="module")
def smap(cal, grid):
    return build_steering_map(mula_config(cal, 3), grid)


def test_map_has_all_ports(smap):
    assert smap.ports == tuple(range(1, 17))
    assert not smap.degenerate
    rows = smap.to_json()
    assert set(rows[0]) == {"port", "theta_deg", "phi_deg", "gain_dbi", "hpbw_deg"}


def test_diagonal_monotone(smap):
    steer = [smap[p].steer_deg for p in (16, 11, 6, 1)]
    assert all(a < b for a, b in zip(steer, steer[1:]))


def test_workers_do_not_change_map(cal, grid, smap):
    assert build_steering_map(mula_config(cal, 3), grid, workers=3) == smap


def test_select_port_nearest_and_clamped(smap):
    assert select_port(smap, smap[6].steer_deg) == 6
    steer = [e.steer_deg for e in smap.entries]
    assert smap[select_port(smap, 89.0)].steer_deg == pytest.approx(max(steer))
    assert smap[select_port(smap, -89.0)].steer_deg == pytest.approx(min(steer))
    assert select_port(smap, (smap[1].theta_deg, smap[1].phi_deg)) == 1


def test_select_port_tie_goes_low():
    entries = tuple(SteeringEntry(p, 5.0, 90.0 if s > 0 else 270.0, 15.0, 13.0, s)
                    for p, s in ((1, 5.0), (2, -5.0)))
    assert select_port(SteeringMap(entries, "vertical", "x"), 0.0) == 1


def test_no_lens_map_is_degenerate(cal, grid):
    m = build_steering_map(no_lens_config(cal), grid)
    assert m.degenerate
    with pytest.raises(NoSteering):
        select_port(m, 0.0)


def test_1x4_steers_in_horizontal_plane(grid):
    m = build_steering_map(ArrayConfig("MULA_1x4", make_lens(3, taper_radius=0.018)), grid)
    assert m.plane == "horizontal"
    steer = [m[p].steer_deg for p in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(steer, steer[1:]))


def test_switch_model():
    assert SwitchModel(raw_loss_db=12.0, compensation_db=12.0).net_loss_db == 0.0
    with pytest.raises(ValueError):
        SwitchModel(raw_loss_db=25.0)


@pytest.fixture(scope="module")
def source(cal, grid):
    return pattern_for_port(mula_config(cal, 3), 11, grid)


@pytest.mark.parametrize("n", sorted(CODEBOOK_HPBW))
def test_codebook_widths_and_directions(source, n):
    cb = make_codebook(n, source)
    assert cb.n_beams == n
    assert cb.directions[0] == -75 and cb.directions[-1] == 75
    b = n // 2
    axis = np.linspace(-30, 30, 60001)
    g = cb.gain(cb.directions[b] + axis, 0.0)[b]
    above = axis[g >= g.max() / 2]
    assert g.argmax() == 30000
    assert above.max() - above.min() == pytest.approx(2 * CODEBOOK_HPBW[n], abs=0.02)


def test_codebook_energy(source):
    # beams radiate the source's fraction: integrate one beam over the sphere
    cb = make_codebook(16, source)
    az = np.arange(-180, 180, 0.05)
    el = np.arange(-90, 90, 0.05)
    g = cb.gain(az[None, :], el[:, None])[8]
    total = np.sum(g * np.cos(np.radians(el))[:, None]) * math.radians(0.05) ** 2
    assert total / (4 * math.pi) == pytest.approx(cb.radiated_fraction, rel=2e-3)


def test_codebook_gain_grows_with_beams(source):
    peaks = [make_codebook(n, source).peak_gain_dbi for n in (8, 16, 32, 64)]
    assert all(a < b for a, b in zip(peaks, peaks[1:]))
    # halving the azimuth width adds about 3 dB
    assert peaks[3] - peaks[2] == pytest.approx(3.0, abs=0.3)


def test_beam_solid_angle_directivity(source):
    cb = make_codebook(64, source)
    approx = 10 * math.log10(4 * math.pi * cb.n_beams / cb.beam_solid_angle())
    assert approx == pytest.approx(cb.directivity_dbi, abs=2.5)


def test_unsupported_beam_count(source):
    with pytest.raises(ValueError):
        make_codebook(12, source)


def test_no_lens_beams_keep_patch_gain(cal, grid):
    bare = pattern_for_port(no_lens_config(cal), 1, grid)
    cb = make_beams(bare, [0.0])
    assert cb.peak_gain_dbi == pytest.approx(10 * math.log10(6), abs=0.01)
