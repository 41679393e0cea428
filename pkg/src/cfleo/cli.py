"""Experiment runner: JSON config in, CSV curves and a JSON manifest out.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numeric error
(outputs written so far are kept and flagged partial in the manifest).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import re
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import analytic, constellation, montecarlo
from .channel import ChannelConfig, dbm_to_watt
from .config import CapacityConfig, IltControl, NetworkConfig
from .errors import NumericalError, ParameterError
from .geometry import EARTH_RADIUS_KM, GeometryConfig

CSV_SCHEMA_VERSION = 1
OUT_DIR_ENV = "CFLEO_OUT_DIR"
DEFAULT_OUT_DIR = "cfleo-out"

ENGINES = ("analytic", "monte-carlo", "nearest-baseline", "walker")
SWEEPS = ("threshold_db", "m", "eta_deg", "altitude_km", "sap_count", "ut_count", "pilot_len")
DEFAULT_THRESHOLDS = list(range(-5, 16))
# fine grid used to integrate the nearest-baseline coverage for capacity
CAPACITY_GRID_DB = np.round(np.arange(-30.0, 50.0001, 0.1), 10)

# (linear name, dB name, dB -> linear, default linear)
_DUAL_FIELDS = {
    "tx_power_data": ("tx_power_data_dbm", dbm_to_watt, float(dbm_to_watt(33.0))),
    "tx_power_pilot": ("tx_power_pilot_dbm", dbm_to_watt, float(dbm_to_watt(30.0))),
    "noise_power": ("noise_power_dbm", dbm_to_watt, float(dbm_to_watt(-100.0))),
    "reference_loss": ("reference_loss_db", lambda x: 10.0 ** (x / 10.0), 1.0),
    "tx_gain_mainlobe": ("tx_gain_mainlobe_db", lambda x: 10.0 ** (x / 10.0), 1000.0),
    "tx_gain_sidelobe": ("tx_gain_sidelobe_db", lambda x: 10.0 ** (x / 10.0), 100.0),
    "rx_gain": ("rx_gain_db", lambda x: 10.0 ** (x / 10.0), 1.0),
}
_PLAIN_FIELDS = {
    "sap_density": None, "ut_density": None,
    "altitude_km": 500.0, "earth_radius_km": EARTH_RADIUS_KM, "dome_angle_deg": 75.0,
    "nakagami_m": 2.0, "omega": 1.0, "path_loss_exponent": 2.0, "carrier_hz": 2e9,
    "pilot_len": 200, "coherence_len": 500,
}
_REQUIRED = ("sap_density", "ut_density")
_EXPERIMENT_KEYS = {"name", "sweep", "engines", "trials", "seed", "ilt", "capacity", "thresholds_db",
                    "csi", "walker", "network"}


@dataclass
class Experiment:
    name: str
    sweep_type: str
    sweep_values: list
    engines: list
    trials: int
    seed: int
    ilt: IltControl
    thresholds_db: list
    csi: str
    network: NetworkConfig
    network_raw: dict
    capacity: dict | None = None
    walker: dict = field(default_factory=dict)


# -- parsing and validation ---------------------------------------------------

def load_json(path):
    return json.loads(Path(path).read_text())


def _num(issues, where, value, lo=None, hi=None, integer=False, lo_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        issues.append((where, f"must be a number, got {value!r}"))
        return None
    if integer and not float(value).is_integer():
        issues.append((where, f"must be an integer, got {value!r}"))
        return None
    if not math.isfinite(value):
        issues.append((where, "must be finite"))
        return None
    if lo is not None and (value <= lo if lo_open else value < lo):
        issues.append((where, f"must be {'>' if lo_open else '>='} {lo}, got {value!r}"))
    if hi is not None and value > hi:
        issues.append((where, f"must be <= {hi}, got {value!r}"))
    return int(value) if integer else float(value)


def resolve_network(raw, issues, where="network", require=True):
    if not isinstance(raw, dict):
        issues.append((where, "must be an object"))
        return None, {}
    start = len(issues)
    known = set(_PLAIN_FIELDS) | set(_DUAL_FIELDS) | {v[0] for v in _DUAL_FIELDS.values()}
    for k in raw:
        if k not in known:
            issues.append((f"{where}.{k}", "unknown field"))
    vals = {}
    for name, default in _PLAIN_FIELDS.items():
        if name in raw:
            vals[name] = raw[name]
        elif name in _REQUIRED and require:
            issues.append((f"{where}.{name}", "missing mandatory field"))
        else:
            vals[name] = default
    for name, (db_name, conv, default) in _DUAL_FIELDS.items():
        if name in raw and db_name in raw:
            issues.append((f"{where}.{name}", f"give either {name} or {db_name}, not both"))
            continue
        if db_name in raw:
            v = _num(issues, f"{where}.{db_name}", raw[db_name])
            vals[name] = float(conv(v)) if v is not None else None
        elif name in raw:
            vals[name] = _num(issues, f"{where}.{name}", raw[name], lo=0.0, lo_open=True)
        else:
            vals[name] = default
    p = f"{where}."
    checks = {
        "sap_density": dict(lo=0.0), "ut_density": dict(lo=0.0),
        "altitude_km": dict(lo=0.0, lo_open=True), "earth_radius_km": dict(lo=0.0, lo_open=True),
        "nakagami_m": dict(lo=0.5), "omega": dict(lo=0.0, lo_open=True),
        "path_loss_exponent": dict(lo=0.0), "carrier_hz": dict(lo=0.0, lo_open=True),
        "pilot_len": dict(lo=0, integer=True), "coherence_len": dict(lo=1, integer=True),
    }
    for name, kw in checks.items():
        if vals.get(name) is not None:
            vals[name] = _num(issues, p + name, vals[name], **kw)
    if vals.get("dome_angle_deg") is not None:
        eta = _num(issues, p + "dome_angle_deg", vals["dome_angle_deg"])
        if eta is not None and not 0.0 <= eta <= 90.0:
            issues.append((p + "dome_angle_deg", f"out of range [0°, 90°], got {eta!r}"))
        vals["dome_angle_deg"] = eta
    tp, tc = vals.get("pilot_len"), vals.get("coherence_len")
    if tp is not None and tc is not None and tp >= tc:
        issues.append((p + "pilot_len", f"pilot_len ({tp}) must be < coherence_len ({tc})"))
    if any(v is None for v in vals.values()) or len(issues) > start:
        return None, vals
    return build_network(vals), vals


def build_network(vals) -> NetworkConfig:
    geo = GeometryConfig(vals["earth_radius_km"], vals["earth_radius_km"] + vals["altitude_km"],
                         math.radians(vals["dome_angle_deg"]))
    ch = ChannelConfig(
        path_loss_exponent=vals["path_loss_exponent"], reference_loss=vals["reference_loss"],
        carrier_hz=vals["carrier_hz"],
        tx_gain_mainlobe_db=10.0 * math.log10(vals["tx_gain_mainlobe"]),
        tx_gain_sidelobe_db=10.0 * math.log10(vals["tx_gain_sidelobe"]),
        rx_gain_db=10.0 * math.log10(vals["rx_gain"]),
        nakagami_m=vals["nakagami_m"], omega=vals["omega"])
    return NetworkConfig(geo, ch, vals["sap_density"], vals["ut_density"], vals["tx_power_data"],
                         vals["tx_power_pilot"], vals["noise_power"], int(vals["pilot_len"]),
                         int(vals["coherence_len"]))


def _resolve_experiment(raw, base_raw, idx, issues, base_ok=True):
    where = f"experiments[{idx}]"
    if not isinstance(raw, dict):
        issues.append((where, "must be an object"))
        return None
    for k in raw:
        if k not in _EXPERIMENT_KEYS:
            issues.append((f"{where}.{k}", "unknown field"))
    name = raw.get("name")
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", name or ""):
        issues.append((f"{where}.name", "must be a non-empty string of [A-Za-z0-9_.-]"))
    where = f"experiments[{name if isinstance(name, str) else idx}]"

    sweep = raw.get("sweep")
    sweep_type, values = None, None
    if not isinstance(sweep, dict) or len(sweep) != 1:
        issues.append((f"{where}.sweep", f"must be an object with exactly one of {list(SWEEPS)}"))
    else:
        sweep_type, values = next(iter(sweep.items()))
        if sweep_type not in SWEEPS:
            issues.append((f"{where}.sweep", f"unknown sweep {sweep_type!r}; expected one of {list(SWEEPS)}"))
        if not isinstance(values, list) or not values:
            issues.append((f"{where}.sweep.{sweep_type}", "must be a nonempty list"))
            values = None
        else:
            values = [_num(issues, f"{where}.sweep.{sweep_type}[{i}]", v) for i, v in enumerate(values)]
            if sweep_type == "eta_deg":
                for i, v in enumerate(values):
                    if v is not None and not 0 <= v <= 90:
                        issues.append((f"{where}.sweep.eta_deg[{i}]", f"out of range [0°, 90°], got {v!r}"))

    engines = raw.get("engines", ["analytic"])
    if not isinstance(engines, list) or not engines or any(e not in ENGINES for e in engines):
        issues.append((f"{where}.engines", f"must be a nonempty subset of {list(ENGINES)}"))
        engines = []
    engines = [e for e in ENGINES if e in engines]
    needs_mc = any(e != "analytic" for e in engines)
    trials = raw.get("trials", 0 if not needs_mc else None)
    if trials is None:
        issues.append((f"{where}.trials", "required when a Monte Carlo engine is selected"))
    else:
        trials = _num(issues, f"{where}.trials", trials, lo=1 if needs_mc else 0, integer=True)
    seed = _num(issues, f"{where}.seed", raw.get("seed", 0), lo=0, integer=True)

    ilt_raw = raw.get("ilt", {})
    ilt = None
    if not isinstance(ilt_raw, dict) or any(k not in ("a", "b", "c") for k in ilt_raw):
        issues.append((f"{where}.ilt", "must be an object with optional keys a, b, c"))
    else:
        a = _num(issues, f"{where}.ilt.a", ilt_raw.get("a", 18.4), lo=0.0, lo_open=True)
        b = _num(issues, f"{where}.ilt.b", ilt_raw.get("b", 11), lo=1, integer=True)
        c = _num(issues, f"{where}.ilt.c", ilt_raw.get("c", 15), lo=1, integer=True)
        if None not in (a, b, c):
            ilt = IltControl(a, b, c)

    thresholds = raw.get("thresholds_db", DEFAULT_THRESHOLDS)
    if not isinstance(thresholds, list) or not thresholds:
        issues.append((f"{where}.thresholds_db", "must be a nonempty list"))
        thresholds = []
    thresholds = [_num(issues, f"{where}.thresholds_db[{i}]", v) for i, v in enumerate(thresholds)]

    csi = raw.get("csi", montecarlo.PERFECT)
    if csi not in montecarlo.CSI_MODES:
        issues.append((f"{where}.csi", f"must be one of {list(montecarlo.CSI_MODES)}"))

    capacity = raw.get("capacity")
    if capacity is not None:
        if not isinstance(capacity, dict) or any(k not in ("bandwidth_hz",) for k in capacity):
            issues.append((f"{where}.capacity", "must be an object with optional key bandwidth_hz"))
        else:
            bw = _num(issues, f"{where}.capacity.bandwidth_hz", capacity.get("bandwidth_hz", 30e6),
                      lo=0.0, lo_open=True)
            capacity = {"bandwidth_hz": bw}
        if sweep_type != "ut_count":
            issues.append((f"{where}.capacity", "capacity experiments need a ut_count sweep"))
        if "analytic" not in engines:
            issues.append((f"{where}.engines", "capacity experiments need the analytic engine"))

    walker = raw.get("walker", {})
    if not isinstance(walker, dict):
        issues.append((f"{where}.walker", "must be an object"))
        walker = {}
    else:
        allowed = {"phase_mode", "observer_lat_deg", "planes", "inclinations_deg"}
        for k in walker:
            if k not in allowed:
                issues.append((f"{where}.walker.{k}", "unknown field"))
        if walker.get("phase_mode", "random") not in (constellation.FIXED, constellation.RANDOM):
            issues.append((f"{where}.walker.phase_mode", "must be 'fixed' or 'random'"))
        lat = walker.get("observer_lat_deg", 20.0)
        lat = _num(issues, f"{where}.walker.observer_lat_deg", lat, lo=-90.0, hi=90.0)
        planes = _num(issues, f"{where}.walker.planes", walker.get("planes", 28), lo=1, integer=True)
        incs = walker.get("inclinations_deg", [33.0, 43.0, 53.0])
        if not isinstance(incs, list) or not incs:
            issues.append((f"{where}.walker.inclinations_deg", "must be a nonempty list"))
            incs = []
        incs = [_num(issues, f"{where}.walker.inclinations_deg[{i}]", v, lo=0.0, hi=90.0)
                for i, v in enumerate(incs)]
        walker = {"phase_mode": walker.get("phase_mode", "random"), "observer_lat_deg": lat,
                  "planes": planes, "inclinations_deg": incs}

    over = raw.get("network", {})
    if not isinstance(over, dict):
        issues.append((f"{where}.network", "must be an object"))
        over = {}
    merged = dict(base_raw, **over)
    before = len(issues)
    if not base_ok:
        # base-section problems are reported once, under "network"
        resolve_network(over, issues, f"{where}.network", require=False)
        return None
    net, _ = resolve_network(merged, issues, f"{where}.network")
    if len(issues) > before or net is None or values is None or None in values:
        return None
    if sweep_type == "pilot_len":
        for i, v in enumerate(values):
            if not float(v).is_integer() or not 1 <= v < net.coherence_len:
                issues.append((f"{where}.sweep.pilot_len[{i}]",
                               f"must be an integer in [1, coherence_len), got {v!r}"))
    elif csi == montecarlo.TRAINED and net.pilot_len < 1:
        issues.append((f"{where}.network.pilot_len", "trained csi needs pilot_len >= 1"))
    if sweep_type == "m":
        for i, v in enumerate(values):
            if v < 0.5:
                issues.append((f"{where}.sweep.m[{i}]", f"must be >= 0.5, got {v!r}"))
    if sweep_type in ("altitude_km", "sap_count", "ut_count"):
        for i, v in enumerate(values):
            if v <= 0 if sweep_type == "altitude_km" else v < 0:
                issues.append((f"{where}.sweep.{sweep_type}[{i}]", f"out of range, got {v!r}"))
    if issues[before:]:
        return None
    return Experiment(name, sweep_type, values, engines, trials or 0, seed, ilt, thresholds,
                      csi, net, merged, capacity, walker)


def validate_config(data):
    """Return (issues, experiments).  ``issues`` is a list of (field, message)."""
    issues = []
    if not isinstance(data, dict):
        return [("<root>", "top level must be an object")], []
    for k in data:
        if k not in ("network", "experiments"):
            issues.append((k, "unknown top-level field"))
    base = data.get("network")
    if base is None:
        issues.append(("network", "missing mandatory section"))
        base = {}
        base_ok = False
    else:
        base_ok = resolve_network(base, issues)[0] is not None
    exps_raw = data.get("experiments")
    if not isinstance(exps_raw, list) or not exps_raw:
        issues.append(("experiments", "must be a nonempty list"))
        exps_raw = []
    exps = []
    names = set()
    for i, e in enumerate(exps_raw):
        ex = _resolve_experiment(e, base if isinstance(base, dict) else {}, i, issues, base_ok)
        if ex is not None:
            if ex.name in names:
                issues.append((f"experiments[{ex.name}].name", "duplicate experiment name"))
            names.add(ex.name)
            exps.append(ex)
    # the base section is re-checked inside every experiment; keep one copy of each issue
    seen, unique = set(), []
    for it in issues:
        if it not in seen:
            seen.add(it)
            unique.append(it)
    return unique, exps


# -- execution -----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "outage"
    return format(x, ".12g")


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _sub_seed(seed: int, *key) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint64)[0] >> 1)


def _apply_sweep(ex: Experiment, raw_net: dict, value) -> NetworkConfig:
    vals = dict(raw_net)
    t = ex.sweep_type
    if t == "m":
        vals["nakagami_m"] = value
    elif t == "eta_deg":
        vals["dome_angle_deg"] = value
    elif t == "altitude_km":
        vals["altitude_km"] = value
    elif t == "pilot_len":
        vals["pilot_len"] = int(value)
    issues = []
    net, _ = resolve_network(vals, issues)
    if net is None:
        raise ParameterError("; ".join(f"{f}: {m}" for f, m in issues))
    if t == "sap_count":
        rs = net.geometry.shell_radius_km
        net = replace(net, sap_density=value / (4 * math.pi * rs * rs))
    elif t == "ut_count":
        net = replace(net, ut_density=analytic.ut_density_for(value, net))
    return net


def _coverage_points(ex: Experiment):
    """(sweep value or None, network, thresholds) for each block of rows."""
    if ex.sweep_type == "threshold_db":
        return [(None, ex.network, list(ex.sweep_values))]
    return [(v, _apply_sweep(ex, ex.network_raw, v), ex.thresholds_db) for v in ex.sweep_values]


def _run_engine(engine, ex: Experiment, net, thresholds, key, threads):
    seed = _sub_seed(ex.seed, ENGINES.index(engine), key)
    if engine == "analytic":
        return analytic.coverage_curve(thresholds, net, ex.ilt)
    pool = net.pilot_len if ex.csi == montecarlo.TRAINED else None
    if engine == "monte-carlo":
        return montecarlo.estimate_coverage(net, thresholds, ex.trials, ex.csi, seed, threads, pool)
    if engine == "nearest-baseline":
        return montecarlo.nearest_satellite_coverage(net, thresholds, ex.trials, seed, threads)
    w = ex.walker
    spec = constellation.starlink_like(net.geometry.altitude_km, net.sap_density, w["phase_mode"],
                                       tuple(w["inclinations_deg"]), w["planes"],
                                       net.geometry.earth_radius_km)
    return constellation.coverage_at_latitude(spec, w["observer_lat_deg"], net, thresholds,
                                              ex.trials, seed, ex.csi, threads)


_COMBINED_COLS = {
    "analytic": ["coverage_analytic"],
    "monte-carlo": ["coverage_mc", "ci_low", "ci_high"],
    "nearest-baseline": ["coverage_nearest", "nearest_ci_low", "nearest_ci_high"],
    "walker": ["coverage_walker", "walker_ci_low", "walker_ci_high"],
}


def _curve_cols(engine, curve, trials):
    cov = np.asarray(curve.coverage)
    if engine == "analytic":
        return [cov]
    lo, hi = montecarlo.coverage_bounds(curve, trials)
    return [cov, lo, hi]


def run_coverage_experiment(ex: Experiment, out: Path, threads: int, written: list):
    sweep_col = [] if ex.sweep_type == "threshold_db" else [ex.sweep_type]
    per_engine = {e: [] for e in ex.engines}
    combined = []
    for key, (value, net, thresholds) in enumerate(_coverage_points(ex)):
        cols = []
        for engine in ex.engines:
            curve = _run_engine(engine, ex, net, thresholds, key, threads)
            ccols = _curve_cols(engine, curve, ex.trials)
            cols.extend(ccols)
            lead = [] if value is None else [value]
            for i, t in enumerate(thresholds):
                row = lead + [t, ccols[0][i]]
                row += [ccols[1][i], ccols[2][i]] if len(ccols) == 3 else [ccols[0][i], ccols[0][i]]
                per_engine[engine].append(row)
        lead = [] if value is None else [value]
        for i, t in enumerate(thresholds):
            combined.append(lead + [t] + [c[i] for c in cols])
    for engine, rows in per_engine.items():
        path = out / f"{ex.name}.{engine}.csv"
        write_csv(path, sweep_col + ["threshold_db", "coverage", "ci_low", "ci_high"], rows)
        written.append(path.name)
    header = sweep_col + ["threshold_db"] + sum((_COMBINED_COLS[e] for e in ex.engines), [])
    path = out / f"{ex.name}.csv"
    write_csv(path, header, combined)
    written.append(path.name)


def run_capacity_experiment(ex: Experiment, out: Path, threads: int, written: list):
    bw = ex.capacity["bandwidth_hz"]
    nearest_se = {}
    rows_cf, rows_nr, combined = [], [], []
    has_nearest = "nearest-baseline" in ex.engines
    for key, n_users in enumerate(ex.sweep_values):
        net = _apply_sweep(ex, ex.network_raw, n_users)
        n = int(n_users)
        cf = analytic.system_capacity(net, CapacityConfig(bw, n, "cell-free"), ex.ilt)
        rows_cf.append([n, cf.spectral_efficiency, cf.system_capacity_bps, cf.per_user_bps])
        row = [n, cf.system_capacity_bps]
        if has_nearest:
            # the baseline serves each UT at full power, so its SINR law does
            # not depend on the UT count; simulate once per geometry
            if not nearest_se:
                seed = _sub_seed(ex.seed, ENGINES.index("nearest-baseline"), 0)
                curve = montecarlo.nearest_satellite_coverage(net, CAPACITY_GRID_DB, ex.trials,
                                                              seed, threads)
                nearest_se["se"] = analytic.spectral_efficiency_from_curve(curve)
            nr = analytic.system_capacity(net, CapacityConfig(bw, n, "nearest-satellite"),
                                          spectral_eff=nearest_se["se"])
            rows_nr.append([n, nr.spectral_efficiency, nr.system_capacity_bps, nr.per_user_bps])
            row += [nr.system_capacity_bps, cf.per_user_bps, nr.per_user_bps]
        else:
            row += [cf.per_user_bps]
        combined.append(row)
    eng_header = ["n_users", "spectral_efficiency", "system_capacity", "per_user"]
    write_csv(out / f"{ex.name}.analytic.csv", eng_header, rows_cf)
    written.append(f"{ex.name}.analytic.csv")
    if has_nearest:
        write_csv(out / f"{ex.name}.nearest-baseline.csv", eng_header, rows_nr)
        written.append(f"{ex.name}.nearest-baseline.csv")
        header = ["n_users", "system_capacity_cf", "system_capacity_nearest", "per_user_cf",
                  "per_user_nearest"]
    else:
        header = ["n_users", "system_capacity_cf", "per_user_cf"]
    write_csv(out / f"{ex.name}.csv", header, combined)
    written.append(f"{ex.name}.csv")


def _versions():
    from importlib import metadata
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _experiment_record(ex: Experiment):
    return {"name": ex.name, "sweep": {ex.sweep_type: ex.sweep_values}, "engines": ex.engines,
            "trials": ex.trials, "seed": ex.seed, "csi": ex.csi, "ilt": asdict(ex.ilt),
            "thresholds_db": ex.thresholds_db, "capacity": ex.capacity,
            "walker": ex.walker if "walker" in ex.engines else None,
            "network": ex.network_raw, "network_resolved": asdict(ex.network)}


def execute(experiments, out: Path, threads: int = 1):
    """Run every experiment; returns the manifest dict (status ok or partial)."""
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = {"csv_schema_version": CSV_SCHEMA_VERSION, "versions": _versions(),
                "threads": threads, "experiments": [], "status": "complete"}
    error = None
    for ex in experiments:
        written = []
        rec = {"config": _experiment_record(ex), "files": written, "status": "complete"}
        manifest["experiments"].append(rec)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", category=RuntimeWarning)
                if ex.capacity is not None:
                    run_capacity_experiment(ex, out, threads, written)
                else:
                    run_coverage_experiment(ex, out, threads, written)
        except (NumericalError, FloatingPointError) as err:
            rec["status"] = "partial"
            rec["error"] = str(err)
            manifest["status"] = "partial"
            error = err
            break
    manifest["wall_time_s"] = time.perf_counter() - t0
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if error is not None:
        raise NumericalError(str(error), partial=manifest)
    return manifest


# -- entry point ---------------------------------------------------------------

def _parse_file(path, stderr):
    try:
        return load_json(path), None
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=stderr)
        return None, 2
    except json.JSONDecodeError as err:
        print(f"parse error: {path}: line {err.lineno} column {err.colno}: {err.msg}", file=stderr)
        return None, 2


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = argparse.ArgumentParser(prog="cfleo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out-dir", default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)

    data, code = _parse_file(args.config, stderr)
    if data is None:
        return code
    issues, exps = validate_config(data)
    if args.threads < 1:
        issues.append(("--threads", "must be >= 1"))
    if args.seed is not None and args.seed < 0:
        issues.append(("--seed", "must be >= 0"))
    if args.command == "validate":
        for f, m in issues:
            print(f"{f}: {m}", file=stdout)
        if not issues:
            print("ok: no issues", file=stdout)
        return 3 if issues else 0
    if issues:
        for f, m in issues:
            print(f"validation error: {f}: {m}", file=stderr)
        return 3
    if args.seed is not None:
        for ex in exps:
            ex.seed = args.seed
    out = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)
    try:
        manifest = execute(exps, out, args.threads)
    except NumericalError as err:
        print(f"numeric error: {err} (partial outputs flagged in {out / 'manifest.json'})",
              file=stderr)
        return 4
    except ParameterError as err:
        print(f"validation error: {err}", file=stderr)
        return 3
    files = [f for e in manifest["experiments"] for f in e["files"]]
    print(f"wrote {len(files)} files to {out}", file=stdout)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
