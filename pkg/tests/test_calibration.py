import pytest

from lensbeam.calibration import (
    Calibration,
    antenna_config,
    best_port,
    calibrate_all,
    calibration_from_dict,
    load_calibration,
    write_calibration,
)
from lensbeam.radiation import hpbw, pattern_for_port, peak_gain
from lensbeam.scenario import ConfigError


def test_shipped_calibration_is_reproducible(cal):
    fresh = calibrate_all(Calibration())
    for key, value in cal.to_dict().items():
        assert getattr(fresh, key) == pytest.approx(value, rel=1e-4), key


def test_calibration_round_trip(tmp_path, cal):
    write_calibration(cal, tmp_path / "c.yaml")
    assert load_calibration(tmp_path / "c.yaml") == cal


def test_unknown_calibration_key():
    with pytest.raises(ConfigError):
        calibration_from_dict({"mula_taper": 1.0})


def test_fitted_targets(cal):
    grid = cal.grid
    mula = antenna_config(cal, "MULA_4x4")
    port = best_port(mula, grid)
    assert port in (6, 7, 10, 11)
    p = pattern_for_port(mula, port, grid)
    assert hpbw(p) == pytest.approx(13.0, abs=0.01)
    bare = peak_gain(pattern_for_port(antenna_config(cal, "NO_LENS_4x4"), 1, grid))
    assert peak_gain(p) - bare == pytest.approx(8.0, abs=1e-6)
    cube = pattern_for_port(antenna_config(cal, "SULA_1x1"), 1, grid)
    assert hpbw(cube) == pytest.approx(20.0, abs=0.01)
    assert peak_gain(pattern_for_port(antenna_config(cal, "SULA_2x2"), 1, grid)) == pytest.approx(24.6, abs=1e-6)


def test_fitted_fractions_stay_physical(cal):
    for variant in ("MULA_4x4", "SULA_1x1", "SULA_2x2", "SULA_1x4"):
        p = pattern_for_port(antenna_config(cal, variant), 1, cal.grid)
        assert p.radiated_fraction <= 1.0
