import math

import numpy as np
import pytest

from lensbeam.units import (
    AliasingError,
    AngularGrid,
    ComplexField,
    db_from_linear,
    dbm_to_watt,
    json_safe,
    linear_from_db,
    make_constants,
    watt_to_dbm,
)


def test_db_round_trip():
    assert db_from_linear(100.0) == pytest.approx(20.0)
    assert linear_from_db(3.0) == pytest.approx(1.9953, rel=1e-4)
    assert watt_to_dbm(dbm_to_watt(38.0)) == pytest.approx(38.0)
    assert dbm_to_watt(30.0) == pytest.approx(1.0)


def test_db_of_non_positive_raises():
    with pytest.raises(ValueError):
        db_from_linear(0.0)


def test_wavelength_at_28ghz():
    c = make_constants()
    assert c.wavelength == pytest.approx(10.707e-3, rel=1e-4)
    assert c.wavenumber == pytest.approx(2 * math.pi / c.wavelength)


@pytest.mark.parametrize("res", [0.5, 1.0, 2.0])
def test_grid_weights_cover_sphere(res):
    g = AngularGrid(res)
    assert g.weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)
    assert g.shape == (g.theta.size, g.phi.size)


def test_aliasing_guard():
    lam = 0.01
    x = np.linspace(-0.01, 0.01, 5)
    f = ComplexField(x, x, np.ones((5, 5), complex), pitch=lam / 3)
    with pytest.raises(AliasingError):
        f.check_sampling(lam)
    ComplexField(x, x, np.ones((5, 5), complex), pitch=lam / 4).check_sampling(lam)


def test_json_safe_replaces_non_finite():
    assert json_safe({"a": [1.0, math.inf], "b": -math.inf}) == {"a": [1.0, None], "b": None}
