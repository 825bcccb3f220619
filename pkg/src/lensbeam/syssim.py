"""Link budgets and Monte Carlo multi-user throughput experiments."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .beamsteer import BeamCodebook
from .channel import blockage_loss, drop_users, fspl, noise_power, user_angles
from .scenario import Scenario
from .units import json_safe, db_from_linear, dbm_to_watt, linear_from_db, make_constants, watt_to_dbm

QAM64_BITS = 6


def shannon(sinr, bandwidth: float):
    """B log2(1 + SINR) in bit/s for linear SINR >= 0."""
    s = np.asarray(sinr, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR cannot be negative")
    out = bandwidth * np.log2(1.0 + s)
    return float(out) if out.ndim == 0 else out


def snr_for_rate(rate: float, bandwidth: float) -> float:
    """Minimum SNR (dB) for a Shannon rate."""
    return db_from_linear(2.0 ** (rate / bandwidth) - 1.0)


# ---------------------------------------------------------------- backhaul

def backhaul_snr_db(scenario: Scenario, tx_gain_dbi: float, rx_gain_dbi: float,
                    excess_loss_db: float | None = None) -> float:
    constants = make_constants(scenario.frequency)
    loss = scenario.excess_loss_db if excess_loss_db is None else excess_loss_db
    if loss is None:
        if not scenario.los:
            raise ValueError("NLoS link needs an excess loss (calibrate it first)")
        loss = 0.0
    received = scenario.tx_power_dbm + tx_gain_dbi + rx_gain_dbi - fspl(scenario.distance, constants) - loss
    return received - noise_power(scenario.bandwidth, scenario.noise_figure_db)


def backhaul_throughput(scenario: Scenario, tx_gain_dbi: float, rx_gain_dbi: float | None = None,
                        excess_loss_db: float | None = None) -> float:
    """Shannon rate of a perfectly aligned point-to-point link."""
    rx = tx_gain_dbi if rx_gain_dbi is None else rx_gain_dbi
    snr = backhaul_snr_db(scenario, tx_gain_dbi, rx, excess_loss_db)
    return shannon(linear_from_db(snr), scenario.bandwidth)


def solve_excess_loss(scenario: Scenario, gain_dbi: float, target_rate: float) -> float:
    """Excess loss (dB) at which the link delivers ``target_rate``."""
    from scipy.optimize import brentq

    def err(x):
        return backhaul_throughput(scenario, gain_dbi, gain_dbi, x) - target_rate

    if err(0.0) < 0:
        raise ValueError("target rate unreachable even without excess loss")
    return float(brentq(err, 0.0, 200.0, xtol=1e-10))


def backhaul_case(case: int, lens: bool, cal=None) -> float:
    """Throughput (bit/s) of backhaul preset ``case`` with calibrated 2x2 antennas."""
    from .calibration import backhaul_gain_dbi, shipped
    from .scenario import load_preset

    if case not in (1, 2):
        raise ValueError("backhaul case must be 1 or 2")
    cal = cal or shipped()
    scenario = load_preset(f"backhaul_{case}")
    excess = scenario.excess_loss_db
    if excess is None:
        excess = 0.0 if scenario.los else cal.nlos_excess_loss_db
    return backhaul_throughput(scenario, backhaul_gain_dbi(cal, lens), excess_loss_db=excess)


# ---------------------------------------------------------------- link level

def link_level_budget(
    horn_gain_dbi: float,
    rx_gain_dbi: float,
    bandwidth: float = 800e6,
    distance: float = 0.7,
    tx_power_dbm: float = -10.0,
    noise_figure_db: float = 5.0,
    frequency: float = 28e9,
) -> dict:
    """Shannon bound for a short horn-to-lens link plus the 64-QAM ceiling."""
    constants = make_constants(frequency)
    path = fspl(distance, constants)
    snr = tx_power_dbm + horn_gain_dbi + rx_gain_dbi - path - noise_power(bandwidth, noise_figure_db)
    return {
        "fspl_db": path,
        "snr_db": snr,
        "shannon_bps": shannon(linear_from_db(snr), bandwidth),
        "qam64_ceiling_bps": QAM64_BITS * bandwidth,
    }


# ---------------------------------------------------------------- multi-user

@dataclass(frozen=True)
class TrialResult:
    trial: int
    users: tuple[int, ...]
    beams: tuple[int, ...]
    signal_dbm: tuple[float, ...]
    interference_dbm: tuple[float, ...]
    sinr_db: tuple[float, ...]
    throughput_bps: tuple[float, ...]


@dataclass
class ThroughputReport:
    scenario_hash: str
    seed: int | None
    lens: bool
    label: str
    trials: list[TrialResult]
    user_throughput: dict[int, float] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.user_throughput:
            sums: dict[int, list[float]] = {}
            for t in self.trials:
                for u, r in zip(t.users, t.throughput_bps):
                    sums.setdefault(u, []).append(r)
            self.user_throughput = {u: float(np.mean(v)) for u, v in sorted(sums.items())}

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.user_throughput.values()))

    def cdf(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted per-user average throughputs and their empirical CDF."""
        x = np.sort(self.values)
        return x, np.arange(1, x.size + 1) / x.size

    def trial_average_cdf(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.sort([float(np.mean(t.throughput_bps)) for t in self.trials])
        return x, np.arange(1, x.size + 1) / x.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def max(self) -> float:
        return float(self.values.max())

    def summary(self) -> dict:
        return {"label": self.label, "lens": self.lens, "mean_bps": self.mean,
                "median_bps": self.median, "max_bps": self.max, "users": len(self.user_throughput)}

    def to_json(self) -> dict:
        return {
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "lens": self.lens,
            "label": self.label,
            "meta": self.meta,
            "summary": self.summary(),
            "trials": [asdict(t) for t in self.trials],
            "user_throughput": {str(k): v for k, v in self.user_throughput.items()},
        }

    def write_json(self, path, extra: dict | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(json_safe({**self.to_json(), **(extra or {})}), fh, indent=1, sort_keys=True, allow_nan=False)
            fh.write("\n")

    def write_cdf_csv(self, path, per_trial: bool = False, comment: str | None = None) -> None:
        x, p = self.trial_average_cdf() if per_trial else self.cdf()
        with open(path, "w", newline="") as fh:
            fh.write(f"# scenario_hash={self.scenario_hash} seed={self.seed} "
                     f"lens={self.lens} label={self.label}"
                     + (f" {comment}" if comment else "") + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["throughput_bps", "cdf"])
            for a, b in zip(x, p):
                w.writerow([repr(float(a)), repr(float(b))])


def _beam_power_w(scenario: Scenario, n_streams: int) -> float:
    total = dbm_to_watt(scenario.tx_power_dbm)
    return total / n_streams if scenario.power_split == "equal" else total


def _stream_bandwidth(scenario: Scenario, n_streams: int) -> float:
    return scenario.bandwidth / n_streams if scenario.bandwidth_mode == "partition" else scenario.bandwidth


def _geometry(scenario: Scenario, users: np.ndarray):
    constants = make_constants(scenario.frequency)
    tx = np.array([*scenario.tx_position, scenario.tx_height], dtype=float)
    az, el, dist = user_angles(tx, scenario.boresight_azimuth_deg, users, scenario.resolved_downtilt())
    loss = fspl(dist, constants) + blockage_loss(tx, users, scenario.blockages)
    path_gain = linear_from_db(scenario.rx_gain_dbi - loss)
    return az, el, np.asarray(path_gain, dtype=float)


def _evaluate(gains, chosen, beams, path_gain, p_beam, noise_w, bandwidth):
    """Per-user signal, interference and throughput for one set of streams.

    ``gains[b, u]`` is the linear gain of beam b toward user u.
    """
    g = gains[np.ix_(beams, chosen)]          # (streams, users)
    rx = p_beam * g * path_gain[chosen][None, :]
    signal = np.diag(rx).copy()
    interference = rx.sum(axis=0) - signal
    sinr = signal / (interference + noise_w)
    return signal, interference, sinr, shannon(sinr, bandwidth)


def _to_dbm(w):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(w > 0, 10 * np.log10(np.maximum(w, 1e-300) * 1e3), -np.inf)


def run_outdoor_mu(
    scenario: Scenario,
    codebook: BeamCodebook,
    lens: bool,
    workers: int = 1,
    users: np.ndarray | None = None,
) -> ThroughputReport:
    """Random multi-user trials; every chosen user gets its strongest beam."""
    users = drop_users(scenario) if users is None else np.asarray(users, float)
    k = scenario.users_per_trial
    if users.shape[0] < k:
        raise ValueError(f"need at least {k} users, have {users.shape[0]}")
    az, el, path_gain = _geometry(scenario, users)
    gains = codebook.gain(az, el)                       # (beams, users)
    best = np.argmax(gains, axis=0)                     # first max -> lower beam index
    p_beam = _beam_power_w(scenario, k)
    bw = _stream_bandwidth(scenario, k)
    noise_w = dbm_to_watt(noise_power(bw, scenario.noise_figure_db))
    children = np.random.SeedSequence(scenario.seed).spawn(scenario.trials)

    def trial(t):
        rng = np.random.default_rng(children[t])
        chosen = np.sort(rng.choice(users.shape[0], size=k, replace=False))
        beams = best[chosen]
        s, i, sinr, rate = _evaluate(gains, chosen, beams, path_gain, p_beam, noise_w, bw)
        return TrialResult(t, tuple(int(c) for c in chosen), tuple(int(b) for b in beams),
                           tuple(_to_dbm(s).tolist()), tuple(_to_dbm(i).tolist()),
                           tuple(db_or_inf(sinr)), tuple(float(r) for r in rate))

    results = _map_ordered(trial, range(scenario.trials), workers)
    meta = {"n_beams": codebook.n_beams, "tx_height": scenario.tx_height,
            "peak_gain_dbi": codebook.peak_gain_dbi, "variant": scenario.variant}
    return ThroughputReport(scenario.hash(), scenario.seed, lens, _label(codebook, lens), results, meta=meta)


def run_indoor_mu(scenario: Scenario, codebook: BeamCodebook, lens: bool = True) -> ThroughputReport:
    """Fixed beams on; each lattice user is served by its stronger beam."""
    users = drop_users(scenario)
    az, el, path_gain = _geometry(scenario, users)
    gains = codebook.gain(az, el)
    n = codebook.n_beams
    p_beam = _beam_power_w(scenario, n)
    bw = _stream_bandwidth(scenario, n)
    noise_w = dbm_to_watt(noise_power(bw, scenario.noise_figure_db))
    best = np.argmax(gains, axis=0)
    rx = p_beam * gains * path_gain[None, :]
    signal = rx[best, np.arange(users.shape[0])]
    interference = rx.sum(axis=0) - signal
    sinr = signal / (interference + noise_w)
    rate = shannon(sinr, bw)
    results = [TrialResult(0, tuple(range(users.shape[0])), tuple(int(b) for b in best),
                           tuple(_to_dbm(signal).tolist()), tuple(_to_dbm(interference).tolist()),
                           tuple(db_or_inf(sinr)), tuple(float(r) for r in rate))]
    meta = {"n_beams": n, "tx_height": scenario.tx_height,
            "peak_gain_dbi": codebook.peak_gain_dbi, "variant": scenario.variant}
    return ThroughputReport(scenario.hash(), None, lens, _label(codebook, lens), results, meta=meta)


def db_or_inf(x) -> list[float]:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return [float(v) for v in np.where(x > 0, 10 * np.log10(np.maximum(x, 1e-300)), -np.inf)]


def _label(codebook: BeamCodebook, lens: bool) -> str:
    return f"{codebook.n_beams}beams_{'lens' if lens else 'nolens'}"


def _map_ordered(fn, items, workers):
    items = list(items)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- experiments

def source_patterns(scenario: Scenario, cal=None):
    """(lens, no-lens) transmit patterns for a multi-user scenario."""
    from .calibration import mula_config, no_lens_config, shipped
    from .radiation import pattern_for_port

    cal = cal or shipped()
    lens = pattern_for_port(mula_config(cal, scenario.lens_size), scenario.source_port, cal.grid)
    bare = pattern_for_port(no_lens_config(cal), scenario.source_port, cal.grid)
    return lens, bare


def run_mumimo(scenario: Scenario, cal=None, beam_counts=None, workers: int = 1) -> dict:
    """Lens and no-lens reports keyed by ``(n_beams, lens)``.

    Outdoor scenes use the uniform codebooks; indoor scenes use the fixed
    ``beam_directions`` with the unmodified source beam.
    """
    from .beamsteer import make_beams, make_codebook

    lens_src, bare_src = source_patterns(scenario, cal)
    out = {}
    if scenario.variant == "INDOOR_MU":
        dirs = scenario.beam_directions or (-60.0, 60.0)
        for flag, src in ((True, lens_src), (False, bare_src)):
            out[(len(dirs), flag)] = run_indoor_mu(scenario, make_beams(src, dirs), flag)
        return out
    if scenario.variant != "OUTDOOR_MU":
        raise ValueError(f"{scenario.variant} is not a multi-user scenario")
    users = drop_users(scenario)
    for n in beam_counts or scenario.beam_counts:
        lens_cb = make_codebook(n, lens_src)
        # the bare patch cannot be narrowed, so its beams keep the native shape
        bare_cb = make_beams(bare_src, lens_cb.directions, label=f"{n} beams")
        out[(n, True)] = run_outdoor_mu(scenario, lens_cb, True, workers, users)
        out[(n, False)] = run_outdoor_mu(scenario, bare_cb, False, workers, users)
    return out
