"""Command-line front end.

Every command writes data files plus a ``manifest.json`` into the output
directory (``--out``, else ``$LENSBEAM_OUT``, else ``./lensbeam_out``).

Exit codes: 0 success, 2 configuration error, 3 numerical-contract violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .beamsteer import build_steering_map
from .calibration import (
    Calibration,
    antenna_config,
    backhaul_gain_dbi,
    calibrate_all,
    load_calibration,
    write_calibration,
)
from .radiation import EnergyBookkeepingError, UnboundedBeamwidth, pattern_for_port, pattern_metrics, write_pattern_csv
from .scenario import DEFAULT_SEED, ConfigError, load_preset, load_scenario, load_yaml, preset_path
from .syssim import backhaul_throughput, link_level_budget, run_mumimo
from .units import AliasingError, AngularGrid, json_safe

OUT_ENV = "LENSBEAM_OUT"
MANIFEST = "manifest.json"
ANTENNA_KEYS = {"variant", "lens_size", "port_order", "feed_distance_ratio", "grid_resolution"}
LINK_KEYS = {"horn_gain_dbi", "rx_variant", "bandwidth", "distance", "tx_power_dbm",
             "noise_figure_db", "frequency"}


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    seed: int | None
    tool_version: str = __version__
    scenario_hash: str | None = None
    outputs: list[str] = field(default_factory=list)

    def write(self, out: Path) -> Path:
        path = out / MANIFEST
        _dump(asdict(self), path)
        return path


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(json_safe(obj), indent=1, sort_keys=True, allow_nan=False) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "lensbeam_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _calibration(args) -> Calibration:
    return load_calibration(args.calibration) if args.calibration else load_calibration()


def _checked_keys(data, allowed, what):
    if not isinstance(data, dict):
        raise ConfigError(f"{what} config must be a mapping")
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"unknown {what} keys: {', '.join(extra)}")
    return data


def _antenna(args):
    data = _checked_keys(load_yaml(args.config), ANTENNA_KEYS, "antenna") if args.config else {}
    variant = args.variant or data.get("variant")
    if not variant:
        raise ConfigError("an antenna variant is required (--variant or 'variant' in --config)")
    cal = _calibration(args)
    if "grid_resolution" in data:
        cal = cal.replace(grid_resolution=float(data["grid_resolution"]))
    kw = {k: data[k] for k in ("port_order", "feed_distance_ratio") if k in data}
    try:
        config = antenna_config(cal, variant, int(data.get("lens_size", 3)), **kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return config, cal


def _scenario(args):
    if args.config:
        return load_scenario(args.config), args.config
    name = args.scenario
    return load_preset(name), str(preset_path(name))


# ---------------------------------------------------------------- commands

def cmd_pattern(args) -> RunManifest:
    config, cal = _antenna(args)
    if args.port not in config.ports:
        raise ConfigError(f"port {args.port} does not exist on {config.variant} (ports {config.ports})")
    out = _out_dir(args)
    pattern = pattern_for_port(config, args.port, AngularGrid(cal.grid_resolution))
    stem = f"pattern_{config.variant}_p{args.port}"
    man = RunManifest("pattern", args.config, None)
    write_pattern_csv(pattern, out / f"{stem}.csv", comment=f"manifest={MANIFEST}")
    _dump({**pattern_metrics(pattern), "variant": config.variant, "port": args.port,
           "manifest": MANIFEST}, out / f"{stem}.json")
    man.outputs += [f"{stem}.csv", f"{stem}.json"]
    return man


def cmd_steermap(args) -> RunManifest:
    config, cal = _antenna(args)
    out = _out_dir(args)
    smap = build_steering_map(config, cal.grid, workers=args.workers)
    if smap.degenerate:
        print(f"warning: {config.variant} steering map is degenerate; ports do not steer the beam",
              file=sys.stderr)
    name = f"steermap_{config.variant}.json"
    _dump({"variant": config.variant, "plane": smap.plane, "source_hash": smap.source_hash,
           "degenerate": smap.degenerate, "entries": smap.to_json(), "manifest": MANIFEST}, out / name)
    man = RunManifest("steermap", args.config, None, scenario_hash=smap.source_hash)
    man.outputs.append(name)
    return man


def cmd_backhaul(args) -> RunManifest:
    cal = _calibration(args)
    scenario, path = (load_scenario(args.config), args.config) if args.config else \
        (load_preset(f"backhaul_{args.case}"), str(preset_path(f"backhaul_{args.case}")))
    excess = scenario.excess_loss_db
    if excess is None:
        excess = 0.0 if scenario.los else cal.nlos_excess_loss_db
    gain = backhaul_gain_dbi(cal, args.lens)
    rate = backhaul_throughput(scenario, gain, excess_loss_db=excess)
    out = _out_dir(args)
    name = f"backhaul_{scenario.name}_{'lens' if args.lens else 'nolens'}.json"
    _dump({"scenario": scenario.name, "lens": args.lens, "antenna_gain_dbi": gain,
           "excess_loss_db": excess, "throughput_bps": rate,
           "scenario_hash": scenario.hash(), "manifest": MANIFEST}, out / name)
    print(f"{scenario.name} {'lens' if args.lens else 'no lens'}: {rate / 1e9:.2f} Gbps")
    man = RunManifest("backhaul", path, None, scenario_hash=scenario.hash())
    man.outputs.append(name)
    return man


def _beam_list(text):
    try:
        return tuple(int(b) for b in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad beam list {text!r}") from exc


def cmd_mumimo(args) -> RunManifest:
    scenario, path = _scenario(args)
    if args.seed is not None:
        scenario = scenario.replace(seed=args.seed)
    beams = _beam_list(args.beams) if args.beams else None
    try:
        reports = run_mumimo(scenario, _calibration(args), beams, args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args)
    man = RunManifest("mumimo", path, scenario.seed, scenario_hash=scenario.hash())
    for (n, lens), rep in sorted(reports.items()):
        stem = f"{scenario.name}_{rep.label}"
        rep.write_json(out / f"{stem}.json", {"manifest": MANIFEST})
        rep.write_cdf_csv(out / f"{stem}_cdf.csv", comment=f"manifest={MANIFEST}")
        man.outputs += [f"{stem}.json", f"{stem}_cdf.csv"]
        s = rep.summary()
        print(f"{stem}: mean {s['mean_bps'] / 1e9:.2f} Gbps, max {s['max_bps'] / 1e9:.2f} Gbps")
    return man


def cmd_linkbudget(args) -> RunManifest:
    path = args.config or str(preset_path("linklevel"))
    data = dict(_checked_keys(load_yaml(path), LINK_KEYS, "link budget"))
    if args.horn_gain is not None:
        data["horn_gain_dbi"] = args.horn_gain
    cal = _calibration(args)
    rx_gain = _peak_gain_of(cal, data.pop("rx_variant", "SULA_1x1"))
    try:
        kw = {k: float(v) for k, v in data.items()}
        horn = kw.pop("horn_gain_dbi")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad link budget config: {exc}") from exc
    res = link_level_budget(horn, rx_gain, **kw)
    out = _out_dir(args)
    _dump({**res, "horn_gain_dbi": horn, "rx_gain_dbi": rx_gain, "manifest": MANIFEST}, out / "linkbudget.json")
    print(f"SNR {res['snr_db']:.1f} dB, Shannon {res['shannon_bps'] / 1e9:.2f} Gbps, "
          f"64-QAM ceiling {res['qam64_ceiling_bps'] / 1e9:.2f} Gbps")
    man = RunManifest("linkbudget", path, None)
    man.outputs.append("linkbudget.json")
    return man


def _peak_gain_of(cal: Calibration, variant: str) -> float:
    from .radiation import peak_gain

    try:
        config = antenna_config(cal, variant)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return peak_gain(pattern_for_port(config, config.ports[0], cal.grid))


def cmd_calibrate(args) -> RunManifest:
    cal = calibrate_all(_calibration(args))
    out = _out_dir(args)
    write_calibration(cal, out / "calibration.yaml")
    for key, value in cal.to_dict().items():
        print(f"{key}: {value:.6g}")
    man = RunManifest("calibrate", args.calibration, None)
    man.outputs.append("calibration.yaml")
    return man


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--calibration", help="calibration YAML (default: shipped)")
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./lensbeam_out)")

    parser = argparse.ArgumentParser(prog="lensbeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", parents=[common], help="radiation pattern of one port")
    p.add_argument("--variant")
    p.add_argument("--port", type=int, default=1)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("steermap", parents=[common], help="port-to-beam steering map")
    p.add_argument("--variant")
    p.set_defaults(func=cmd_steermap)

    p = sub.add_parser("backhaul", parents=[common], help="point-to-point backhaul throughput")
    p.add_argument("--case", type=int, choices=(1, 2), default=2)
    p.add_argument("--lens", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_backhaul)

    p = sub.add_parser("mumimo", parents=[common], help="multi-user throughput experiment")
    p.add_argument("--scenario", default="outdoor", help="preset name (outdoor, outdoor_h6, indoor)")
    p.add_argument("--beams", help="comma-separated beam counts, e.g. 8,16,32,64")
    p.set_defaults(func=cmd_mumimo)

    p = sub.add_parser("linkbudget", parents=[common], help="short-range link-level bound")
    p.add_argument("--horn-gain", type=float, default=None)
    p.set_defaults(func=cmd_linkbudget)

    p = sub.add_parser("calibrate", parents=[common], help="refit calibration scalars")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            manifest = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (EnergyBookkeepingError, AliasingError, UnboundedBeamwidth) as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return 3
    manifest.write(_out_dir(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
