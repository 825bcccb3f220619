"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured numbers, then
asserts.  Run ``pytest tests/test_acceptance.py -v`` to see the lines.
"""

import math

import numpy as np
import pytest

from lensbeam.arrays import ArrayConfig
from lensbeam.calibration import antenna_config, best_port, mula_config
from lensbeam.channel import fspl
from lensbeam.lens import make_lens
from lensbeam.radiation import far_field, hpbw, pattern_for_port, peak_direction, peak_gain
from lensbeam.scenario import load_preset
from lensbeam.syssim import backhaul_case, link_level_budget, run_mumimo
from lensbeam.units import AngularGrid, ComplexField

BEAMS = (8, 16, 32, 64)


def verdict(capsys, cid, title, checks):
    """Print one line for the criterion and fail if any check failed."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{'ok' if c[1] else 'FAILED'} {c[0]}: {c[2]}" for c in checks)
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] C{cid} {title} | {detail}")
    assert ok, detail


def _aperture(shape, size, wavelength):
    n = int(math.ceil(size / (wavelength / 4)))
    pitch = size / n
    x = (np.arange(n) - (n - 1) / 2) * pitch
    X, Y = np.meshgrid(x, x, indexing="ij")
    mask = np.hypot(X, Y) <= size / 2 if shape == "circle" else np.ones_like(X, bool)
    vals = mask.astype(complex)
    vals /= math.sqrt(np.sum(np.abs(vals) ** 2) * pitch ** 2)
    return ComplexField(x, x.copy(), vals, pitch)


def test_c1_lens_sizing(capsys):
    checks = []
    for i, d_mm in ((1, 75), (2, 115), (3, 155)):
        lens = make_lens(i)
        d, f = round(lens.diameter * 1000, 9), round(lens.focal_length * 1000, 9)
        checks.append((f"D{i}", d == d_mm and f == d_mm * 6 / 5, f"D={d:g} mm f={f:g} mm"))
    verdict(capsys, 1, "lens sizing", checks)


def test_c2_aperture_oracle(capsys, constants):
    lam, k = constants.wavelength, constants.wavenumber
    circ = far_field(_aperture("circle", 0.155, lam), k, AngularGrid(0.25))
    width = hpbw(circ)
    analytic = math.degrees(1.02 * lam / 0.155)
    sq = far_field(_aperture("square", 0.050, lam), k, AngularGrid(1.0))
    d_an = 10 * math.log10(4 * math.pi * 0.05 ** 2 / lam ** 2)
    verdict(capsys, 2, "aperture oracle", [
        ("circular HPBW within 5%", abs(width / analytic - 1) <= 0.05,
         f"{width:.3f} vs {analytic:.3f} deg"),
        ("square directivity +-0.2 dB", abs(peak_gain(sq) - d_an) <= 0.2,
         f"{peak_gain(sq):.2f} vs {d_an:.2f} dBi"),
    ])


def test_c3_sula_calibration(capsys, cal):
    grid = cal.grid
    g22 = peak_gain(pattern_for_port(antenna_config(cal, "SULA_2x2"), 1, grid))
    bare = peak_gain(pattern_for_port(antenna_config(cal, "NO_LENS_SULA_1x1"), 1, grid))
    half = hpbw(pattern_for_port(antenna_config(cal, "SULA_1x1"), 1, grid)) / 2
    verdict(capsys, 3, "static-user lens calibration", [
        ("2x2 peak 25+-2 dBi", abs(g22 - 25) <= 2, f"{g22:.2f} dBi"),
        ("lens over bare feed 12-17 dB", 12 <= g22 - bare <= 17, f"{g22 - bare:.2f} dB"),
        ("HPBW +-10 +-3 deg", abs(half - 10) <= 3, f"+-{half:.2f} deg"),
    ])


def test_c4_mula_steering(capsys, cal):
    grid = cal.grid
    d3 = mula_config(cal, 3)
    d1 = mula_config(cal, 1)
    from lensbeam.beamsteer import build_steering_map

    smap = build_steering_map(d3, grid)
    order = [smap[p].steer_deg for p in (16, 11, 6, 1)]
    bare = peak_gain(pattern_for_port(antenna_config(cal, "NO_LENS_4x4"), 1, grid))
    centre = {p: peak_gain(pattern_for_port(d3, p, grid)) - bare for p in (6, 7, 10, 11)}

    def growth(p):
        return peak_gain(pattern_for_port(d3, p, grid)) - peak_gain(pattern_for_port(d1, p, grid))

    edge = min(growth(1), growth(16))
    mid = max(growth(6), growth(11))
    best = best_port(d3, grid)
    half = hpbw(pattern_for_port(d3, best, grid)) / 2
    bare_half = hpbw(pattern_for_port(antenna_config(cal, "NO_LENS_4x4"), 1, grid)) / 2
    verdict(capsys, 4, "mobile-user lens steering", [
        ("ports 16->11->6->1 strictly monotone", all(a < b for a, b in zip(order, order[1:])),
         " < ".join(f"{v:+.2f}" for v in order)),
        ("centre-port advantage >= 5 dB", min(centre.values()) >= 5,
         f"min {min(centre.values()):.2f} dB"),
        ("edge ports gain more D1->D3", edge > mid, f"edge {edge:+.2f} vs centre {mid:+.2f} dB"),
        ("best-port HPBW +-6.5 +-2 deg", abs(half - 6.5) <= 2, f"port {best} +-{half:.2f} deg"),
        ("no-lens HPBW gap >= 30 deg", bare_half - half >= 30,
         f"+-{bare_half:.1f} vs +-{half:.1f} -> {bare_half - half:.1f} deg"),
    ])


def test_c5_backhaul(capsys, cal):
    c2l, c2n = backhaul_case(2, True, cal), backhaul_case(2, False, cal)
    c1l = backhaul_case(1, True, cal)
    x = cal.nlos_excess_loss_db
    from lensbeam.calibration import Calibration, calibrate_excess_loss

    refit = calibrate_excess_loss(cal.replace(nlos_excess_loss_db=Calibration().nlos_excess_loss_db),
                                  load_preset("backhaul_1")).nlos_excess_loss_db
    verdict(capsys, 5, "backhaul reproduction", [
        ("case 2 lens 34.3 Gbps +-20%", abs(c2l / 34.3e9 - 1) <= 0.20, f"{c2l / 1e9:.2f} Gbps"),
        ("case 2 no lens 18.8 Gbps +-25%", abs(c2n / 18.8e9 - 1) <= 0.25, f"{c2n / 1e9:.2f} Gbps"),
        ("case 1 lens 16.9 Gbps +-10%", abs(c1l / 16.9e9 - 1) <= 0.10, f"{c1l / 1e9:.2f} Gbps"),
        ("excess loss in 28-31 dB", 28 <= refit <= 31 and abs(refit - x) < 1e-6,
         f"{refit:.3f} dB (shipped {x:.3f})"),
    ])


@pytest.fixture(scope="module")
def outdoor(cal):
    return {h: run_mumimo(load_preset(name), cal) for h, name in ((3, "outdoor"), (6, "outdoor_h6"))}


def test_c6_outdoor_mu_mimo(capsys, outdoor):
    gb = 1e9
    checks = []
    gaps = {(h, n): (r[(n, True)].max - r[(n, False)].max) / gb for h, r in outdoor.items() for n in BEAMS}
    checks.append(("max gap 2-6 Gbps at every N_b",
                   all(2 <= g <= 6 for g in gaps.values()),
                   ", ".join(f"h{h}/{n}:{g:.2f}" for (h, n), g in gaps.items())))
    for h, r in outdoor.items():
        imp = {n: (r[(n, True)].mean - r[(n, False)].mean) / gb for n in BEAMS}
        checks.append((f"h{h} N_b=8 smallest improvement", min(imp, key=imp.get) == 8,
                       ", ".join(f"{n}:{v:.2f}" for n, v in imp.items())))
        lens = {n: r[(n, True)].mean / gb for n in BEAMS}
        a, b = lens[64] - lens[32], lens[16] - lens[8]
        checks.append((f"h{h} 32->64 < 8->16", a < b, f"{a:.2f} < {b:.2f} Gbps"))
    change = {(n, flag): abs(outdoor[6][(n, flag)].mean / outdoor[3][(n, flag)].mean - 1)
              for n in BEAMS for flag in (True, False)}
    worst = max(change, key=change.get)
    checks.append(("Tx height 3 vs 6 m < 15%", change[worst] < 0.15,
                   f"worst {100 * change[worst]:.1f}% at N_b={worst[0]} {'lens' if worst[1] else 'no lens'}"))
    verdict(capsys, 6, "outdoor MU-MIMO properties", checks)


def test_c7_indoor_mu_mimo(capsys, cal):
    r = run_mumimo(load_preset("indoor"), cal)
    lens, bare = r[(2, True)].mean, r[(2, False)].mean
    verdict(capsys, 7, "indoor MU-MIMO", [
        ("lens mean - no-lens mean > 5 Gbps", lens - bare > 5e9,
         f"{lens / 1e9:.2f} - {bare / 1e9:.2f} = {(lens - bare) / 1e9:+.2f} Gbps"),
    ])


def test_c8_link_level_bound(capsys, cal):
    rx = peak_gain(pattern_for_port(antenna_config(cal, "SULA_1x1"), 1, cal.grid))
    rates = {g: link_level_budget(g, rx)["shannon_bps"] for g in (10.0, 15.0, 20.0, 25.0)}
    ceiling = link_level_budget(10.0, rx)["qam64_ceiling_bps"]
    verdict(capsys, 8, "link-level bound", [
        ("Shannon >= 2474 Mbps for horn >= 10 dBi", min(rates.values()) >= 2474e6,
         f"{rates[10.0] / 1e9:.2f} Gbps at 10 dBi"),
        ("64-QAM ceiling 4.8 Gbps >= 2474 Mbps", ceiling == 4.8e9 and ceiling >= 2474e6,
         f"{ceiling / 1e9:.2f} Gbps"),
    ])


def test_c9_numerical_invariants(capsys, cal, outdoor):
    grid = cal.grid
    fractions = []
    for variant in ("MULA_4x4", "MULA_1x4", "SULA_1x1", "SULA_1x2", "SULA_1x4", "SULA_2x2",
                    "NO_LENS_4x4", "NO_LENS_SULA_2x2"):
        cfg = antenna_config(cal, variant)
        for port in cfg.ports:
            p = pattern_for_port(cfg, port, grid)
            fractions.append((p.radiated_fraction, abs(p.integrated_fraction() - p.radiated_fraction)))
    worst_frac = max(f for f, _ in fractions)
    worst_quad = max(q for _, q in fractions)

    d = np.geomspace(0.5, 5000, 25)
    doubling = np.max(np.abs(fspl(2 * d) - fspl(d) - 20 * math.log10(2)))

    cdf_ok = True
    for reports in outdoor.values():
        for rep in reports.values():
            x, p = rep.cdf()
            cdf_ok &= bool(np.all(np.diff(x) >= 0) and np.all(np.diff(p) > 0) and p[-1] == 1.0)

    fine = AngularGrid(grid.resolution / 2)
    drift = 0.0
    for variant, port in (("SULA_2x2", 1), ("MULA_4x4", 6), ("MULA_4x4", 1)):
        cfg = antenna_config(cal, variant)
        drift = max(drift, abs(peak_gain(pattern_for_port(cfg, port, grid))
                               - peak_gain(pattern_for_port(cfg, port, fine))))

    scenario = load_preset("outdoor")
    one = run_mumimo(scenario, cal, (16,), workers=1)[(16, True)].to_json()
    many = run_mumimo(scenario, cal, (16,), workers=4)[(16, True)].to_json()
    import json

    identical = json.dumps(one, sort_keys=True) == json.dumps(many, sort_keys=True)
    verdict(capsys, 9, "numerical invariants", [
        ("radiated fraction <= 1", worst_frac <= 1 + 1e-3, f"max {worst_frac:.4f}"),
        ("quadrature matches fraction (1e-3)", worst_quad <= 1e-3, f"max error {worst_quad:.1e}"),
        ("fspl 6.02 dB per doubling (1e-6)", doubling <= 1e-6, f"max error {doubling:.1e} dB"),
        ("CDF monotone and normalised", cdf_ok, f"{sum(len(r) for r in outdoor.values())} reports"),
        ("grid halving peak drift < 0.05 dB", drift < 0.05, f"{drift:.4f} dB"),
        ("1 vs 4 workers bit-identical", identical, "same seed"),
    ])
