"""Batch pipeline: config parsing, envelope binning, and run orchestration.

A run configuration is a plain INI file.  ``[resonator:NAME]`` sections
list per-power sweep files for the power sweep; ``[group:NAME]`` sections
list temperature-series files (or per-temperature sweep files) and the fit
strategy for the temperature study.  See the README for a full example.
"""

from __future__ import annotations

import configparser
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import TemperatureSeries, TempModelParams, microev_to_joules
from .errors import (ConfigError, DomainError, PipelineRunError, VgresError)
from .io import load_sweep, load_temperature_series, read_metadata
from .notch import fit_notch
from .photon import (YFactorData, incident_power, incident_power_from_gain,
                     photon_number, y_factor)
from .tempmodel import (EnsembleFit, FixAlpha, FixDelta, FixDeltaSweep,
                        critical_temperature, ensemble_statistics,
                        fit_temperature_sweep, model_shift)

LOW_POWER_PHOTON_LIMIT = 1.0


# ---------------------------------------------------------------------------
# Envelope binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeCurve:
    """Per-bin mean/min/max of pooled (x, y) points on a transformed axis.

    ``centers`` are in transformed-axis units (log10(x) for the log axis);
    empty bins carry NaN statistics and a zero count.
    """

    axis: str
    edges: np.ndarray     # transformed units, length n_bins + 1
    centers: np.ndarray   # transformed units, length n_bins
    means: np.ndarray
    mins: np.ndarray
    maxs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        occ = self.counts > 0
        if np.any(self.mins[occ] > self.means[occ]) or \
                np.any(self.means[occ] > self.maxs[occ]):
            raise DomainError("envelope violates min <= mean <= max")

    @property
    def n_bins(self) -> int:
        return int(self.centers.size)

    @property
    def occupied(self) -> np.ndarray:
        return self.counts > 0

    def centers_untransformed(self) -> np.ndarray:
        return 10.0 ** self.centers if self.axis == "log10" else self.centers


def bin_envelope(curves, n_bins: int, axis: str = "log10") -> EnvelopeCurve:
    """Pool (x, y) curves into equally spaced bins on the chosen axis.

    ``curves`` is an iterable of (x, y) array pairs.  Bins are equally
    spaced on the transformed axis (log10 or linear) spanning the pooled
    data range; each bin reports mean, min, max and count over all points
    of all curves that fall inside it.
    """
    if n_bins < 2:
        raise DomainError(f"need at least 2 bins, got {n_bins}")
    if axis not in ("log10", "linear"):
        raise DomainError(f"axis must be 'log10' or 'linear', got {axis!r}")
    xs, ys = [], []
    for x, y in curves:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size != y.size:
            raise DomainError("curve x and y lengths differ")
        xs.append(x)
        ys.append(y)
    if not xs or sum(x.size for x in xs) == 0:
        raise DomainError("no data to bin")
    x_all = np.concatenate(xs)
    y_all = np.concatenate(ys)
    if axis == "log10":
        if np.any(x_all <= 0):
            raise DomainError("log10 axis requires positive x values")
        t = np.log10(x_all)
    else:
        t = x_all
    lo, hi = float(t.min()), float(t.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, n_bins - 1)
    means = np.full(n_bins, np.nan)
    mins = np.full(n_bins, np.nan)
    maxs = np.full(n_bins, np.nan)
    counts = np.zeros(n_bins, dtype=int)
    for b in range(n_bins):
        sel = y_all[idx == b]
        counts[b] = sel.size
        if sel.size:
            means[b] = sel.mean()
            mins[b] = sel.min()
            maxs[b] = sel.max()
    return EnvelopeCurve(axis=axis, edges=edges,
                         centers=0.5 * (edges[:-1] + edges[1:]),
                         means=means, mins=mins, maxs=maxs, counts=counts)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

@dataclass
class CalibrationConfig:
    mode: str                      # "attenuation" | "y-factor" | "none"
    input_attenuation_db: float | None = None
    y_data: YFactorData | None = None
    planck_frequency_hz: float | None = None

    def describe(self) -> dict:
        out = {"mode": self.mode}
        if self.mode == "attenuation":
            out["input-attenuation-db"] = self.input_attenuation_db
        elif self.mode == "y-factor":
            gain, t_e = y_factor(self.y_data, self.planck_frequency_hz)
            out.update({
                "t-hot-k": self.y_data.t_hot, "t-cold-k": self.y_data.t_cold,
                "bandwidth-hz": self.y_data.bandwidth,
                "gain-linear": gain, "gain-db": 10.0 * math.log10(gain),
                "noise-temperature-k": t_e,
            })
            if self.planck_frequency_hz:
                out["planck-frequency-hz"] = self.planck_frequency_hz
        return out


@dataclass
class GroupConfig:
    name: str
    strategy: object               # FixAlpha | FixDelta | FixDeltaSweep
    series_paths: list[Path] = field(default_factory=list)
    sweep_paths: list[Path] = field(default_factory=list)


@dataclass
class RunConfig:
    path: Path | None = None
    fmt: str | None = None
    out_dir: Path | None = None
    bins: int = 20
    axis: str = "log10"
    calibration: CalibrationConfig = field(
        default_factory=lambda: CalibrationConfig(mode="none"))
    resonators: dict = field(default_factory=dict)   # name -> [Path]
    groups: dict = field(default_factory=dict)       # name -> GroupConfig


def _cfg_float(section, key, cfg_path):
    raw = section.get(key)
    if raw is None:
        raise ConfigError(f"{cfg_path}: missing key {key!r} in "
                          f"[{section.name}]")
    try:
        return float(raw)
    except ValueError as err:
        raise ConfigError(f"{cfg_path}: bad number for {key!r}: {raw!r}") from err


def _cfg_paths(section, key, base: Path, cfg_path) -> list[Path]:
    raw = section.get(key, "")
    paths = []
    for token in raw.replace(",", "\n").splitlines():
        token = token.strip()
        if not token:
            continue
        p = Path(token)
        if not p.is_absolute():
            p = base / p
        if not p.is_file():
            raise ConfigError(f"{cfg_path}: referenced file does not exist: {p}")
        paths.append(p)
    return paths


def _parse_strategy(section, cfg_path):
    kind = section.get("strategy", "").strip().lower()
    if kind == "fix_alpha":
        return FixAlpha(alpha=_cfg_float(section, "alpha", cfg_path))
    if kind == "fix_delta":
        return FixDelta(
            delta_0=microev_to_joules(_cfg_float(section, "delta_uev", cfg_path)))
    if kind == "fix_delta_sweep":
        raw = section.get("delta_sweep_uev")
        if not raw:
            raise ConfigError(f"{cfg_path}: fix_delta_sweep needs "
                              "delta_sweep_uev")
        try:
            vals = tuple(microev_to_joules(float(v))
                         for v in raw.replace(",", " ").split())
        except (ValueError, VgresError) as err:
            raise ConfigError(f"{cfg_path}: bad delta_sweep_uev: {raw!r}") from err
        return FixDeltaSweep(delta_values=vals)
    raise ConfigError(f"{cfg_path}: [{section.name}] needs strategy = "
                      "fix_alpha | fix_delta | fix_delta_sweep")


def load_config(path) -> RunConfig:
    """Parse and validate a run-configuration INI file."""
    cfg_path = Path(path)
    if not cfg_path.is_file():
        raise ConfigError(f"config file not found: {cfg_path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(cfg_path, encoding="utf-8")
    except configparser.Error as err:
        raise ConfigError(f"{cfg_path}: {err}") from err
    base = cfg_path.parent
    run = RunConfig(path=cfg_path)

    known = {"input", "binning", "calibration", "output"}
    for name in parser.sections():
        if name in known or name.startswith("resonator:") or \
                name.startswith("group:"):
            continue
        raise ConfigError(f"{cfg_path}: unknown section [{name}]")

    if parser.has_section("input"):
        fmt = parser["input"].get("format", "").strip().lower() or None
        if fmt not in (None, "csv", "touchstone"):
            raise ConfigError(f"{cfg_path}: format must be csv or touchstone")
        run.fmt = fmt
    if parser.has_section("output"):
        out = parser["output"].get("directory", "").strip()
        if out:
            p = Path(out)
            run.out_dir = p if p.is_absolute() else base / p
    if parser.has_section("binning"):
        sec = parser["binning"]
        if sec.get("bins"):
            try:
                run.bins = int(sec["bins"])
            except ValueError as err:
                raise ConfigError(f"{cfg_path}: bad bin count") from err
            if run.bins < 2:
                raise ConfigError(f"{cfg_path}: need at least 2 bins")
        axis = sec.get("axis", "").strip().lower()
        if axis:
            if axis not in ("log10", "linear"):
                raise ConfigError(f"{cfg_path}: axis must be log10 or linear")
            run.axis = axis

    if parser.has_section("calibration"):
        sec = parser["calibration"]
        mode = sec.get("mode", "").strip().lower()
        if mode == "attenuation":
            run.calibration = CalibrationConfig(
                mode=mode,
                input_attenuation_db=_cfg_float(sec, "input_attenuation_db",
                                                cfg_path))
        elif mode == "y-factor":
            planck = None
            if sec.get("planck_frequency_hz"):
                planck = _cfg_float(sec, "planck_frequency_hz", cfg_path)
            try:
                y_data = YFactorData(
                    p_hot=_cfg_float(sec, "p_hot_w", cfg_path),
                    p_cold=_cfg_float(sec, "p_cold_w", cfg_path),
                    t_hot=_cfg_float(sec, "t_hot_k", cfg_path),
                    t_cold=_cfg_float(sec, "t_cold_k", cfg_path),
                    bandwidth=_cfg_float(sec, "bandwidth_hz", cfg_path))
            except DomainError as err:
                raise ConfigError(f"{cfg_path}: {err}") from err
            run.calibration = CalibrationConfig(mode=mode, y_data=y_data,
                                                planck_frequency_hz=planck)
        else:
            raise ConfigError(f"{cfg_path}: calibration mode must be "
                              "attenuation or y-factor")

    for name in parser.sections():
        if name.startswith("resonator:"):
            rname = name.split(":", 1)[1].strip()
            paths = _cfg_paths(parser[name], "sweeps", base, cfg_path)
            if not paths:
                raise ConfigError(f"{cfg_path}: [{name}] lists no sweeps")
            run.resonators[rname] = paths
        elif name.startswith("group:"):
            gname = name.split(":", 1)[1].strip()
            sec = parser[name]
            group = GroupConfig(name=gname,
                                strategy=_parse_strategy(sec, cfg_path),
                                series_paths=_cfg_paths(sec, "series", base,
                                                        cfg_path),
                                sweep_paths=_cfg_paths(sec, "sweeps", base,
                                                       cfg_path))
            if not group.series_paths and not group.sweep_paths:
                raise ConfigError(f"{cfg_path}: [{name}] lists neither "
                                  "series nor sweeps")
            run.groups[gname] = group
    return run


# ---------------------------------------------------------------------------
# Power sweep
# ---------------------------------------------------------------------------

@dataclass
class FitRow:
    resonator: str
    path: Path
    drive_power_dbm: float
    p_inc_w: float
    n_bar: float
    fit: object                   # NotchFit


@dataclass
class FitFailure:
    resonator: str
    path: Path
    error: str


@dataclass
class PowerSweepResult:
    rows: list
    failures: list
    envelope: EnvelopeCurve | None
    low_power_q_int: dict         # resonator -> Q_int
    calibration: dict
    config: RunConfig


def _p_inc_for(calibration: CalibrationConfig, power_dbm: float, fit) -> float:
    if calibration.mode == "attenuation":
        return incident_power(power_dbm, calibration.input_attenuation_db)
    if calibration.mode == "y-factor":
        gain, _ = y_factor(calibration.y_data,
                           calibration.planck_frequency_hz)
        return incident_power_from_gain(power_dbm, fit.background_amp, gain)
    raise ConfigError("power sweep requires a [calibration] section")


def run_power_sweep(config: RunConfig) -> PowerSweepResult:
    """Fit every sweep, convert drive powers to photon numbers, and bin the
    pooled (n, Q_int) curves into an envelope.

    Individual fit failures are recorded and skipped; more than 50%
    failures raise PipelineRunError.
    """
    if not config.resonators:
        raise ConfigError("no [resonator:...] sections in configuration")
    rows: list[FitRow] = []
    failures: list[FitFailure] = []
    n_total = 0
    for rname in sorted(config.resonators):
        for path in sorted(config.resonators[rname]):
            n_total += 1
            try:
                sweep = load_sweep(path, config.fmt)[0]
                if sweep.drive_power_dbm is None:
                    raise DomainError("sweep carries no power_dbm metadata")
                fit = fit_notch(sweep)
                p_inc = _p_inc_for(config.calibration,
                                   sweep.drive_power_dbm, fit)
                n_bar = photon_number(fit.q_l, fit.q_c_mag, fit.f_r, p_inc)
                rows.append(FitRow(resonator=rname, path=path,
                                   drive_power_dbm=sweep.drive_power_dbm,
                                   p_inc_w=p_inc, n_bar=n_bar, fit=fit))
            except (VgresError, OSError) as err:
                failures.append(FitFailure(resonator=rname, path=path,
                                           error=str(err)))
    if n_total and len(failures) > 0.5 * n_total:
        raise PipelineRunError(
            f"{len(failures)} of {n_total} sweeps failed to fit",
            failures=failures)

    by_res = defaultdict(list)
    for row in rows:
        by_res[row.resonator].append(row)
    curves = []
    low_power = {}
    for rname in sorted(by_res):
        rrows = sorted(by_res[rname], key=lambda r: r.n_bar)
        curves.append((np.array([r.n_bar for r in rrows]),
                       np.array([r.fit.q_int for r in rrows])))
        low = [r.fit.q_int for r in rrows
               if r.n_bar <= LOW_POWER_PHOTON_LIMIT]
        low_power[rname] = float(np.mean(low)) if low \
            else float(rrows[0].fit.q_int)
    envelope = bin_envelope(curves, config.bins, config.axis) if curves else None
    return PowerSweepResult(rows=rows, failures=failures, envelope=envelope,
                            low_power_q_int=low_power,
                            calibration=config.calibration.describe(),
                            config=config)


# ---------------------------------------------------------------------------
# Temperature study
# ---------------------------------------------------------------------------

@dataclass
class GroupResult:
    name: str
    strategy: object
    fits: list                    # (resonator name, TempModelParams)
    ensemble: EnsembleFit | None
    notice: str | None
    critical_temperature_k: float | None
    curves: list                  # (resonator, TemperatureSeries, model values)


@dataclass
class TempStudyResult:
    groups: list
    failures: list
    config: RunConfig


def _series_from_sweeps(paths, fmt):
    """Group per-temperature sweeps by their resonator metadata and build
    one TemperatureSeries per resonator (f0 = lowest-temperature fit)."""
    by_res = defaultdict(list)
    for path in paths:
        sweep = load_sweep(path, fmt)[0]
        meta = read_metadata(path)
        if "temperature_k" not in meta:
            raise DomainError(f"{path}: sweep carries no temperature_k metadata")
        rname = str(meta.get("resonator", "R0"))
        fit = fit_notch(sweep)
        by_res[rname].append((float(meta["temperature_k"]), fit.f_r))
    out = {}
    for rname, pairs in by_res.items():
        pairs.sort()
        t = np.array([p[0] for p in pairs])
        f = np.array([p[1] for p in pairs])
        out[rname] = TemperatureSeries(temperatures=t, frequencies=f,
                                       f0=float(f[0]))
    return out


def run_temperature_study(config: RunConfig) -> TempStudyResult:
    """Fit the temperature model per resonator and group, with ensemble
    statistics and the critical temperature of each material group."""
    if not config.groups:
        raise ConfigError("no [group:...] sections in configuration")
    groups = []
    failures: list[FitFailure] = []
    n_total = 0
    for gname in sorted(config.groups):
        gcfg = config.groups[gname]
        series_by_name = {}
        for path in sorted(gcfg.series_paths):
            n_total += 1
            try:
                series_by_name[path.stem] = load_temperature_series(path)
            except (VgresError, OSError) as err:
                failures.append(FitFailure(resonator=path.stem, path=path,
                                           error=str(err)))
        if gcfg.sweep_paths:
            n_total += len(gcfg.sweep_paths)
            try:
                series_by_name.update(
                    _series_from_sweeps(sorted(gcfg.sweep_paths), config.fmt))
            except (VgresError, OSError) as err:
                failures.append(FitFailure(resonator=gname, path=Path(""),
                                           error=str(err)))

        fits = []
        curves = []
        for rname in sorted(series_by_name):
            series = series_by_name[rname]
            try:
                params = fit_temperature_sweep(series, gcfg.strategy)
            except VgresError as err:
                failures.append(FitFailure(resonator=rname, path=Path(""),
                                           error=str(err)))
                continue
            fits.append((rname, params))
            curves.append((rname, series, model_shift(series.temperatures,
                                                      params)))
        ensemble = None
        notice = None
        t_c = None
        if len(fits) >= 2:
            ensemble = ensemble_statistics([p for _, p in fits])
            t_c = critical_temperature(ensemble.mean.delta_0)
        elif len(fits) == 1:
            notice = ("single resonator in group; ensemble statistics "
                      "skipped")
            t_c = critical_temperature(fits[0][1].delta_0)
        else:
            notice = "no successful fits in group"
        groups.append(GroupResult(name=gname, strategy=gcfg.strategy,
                                  fits=fits, ensemble=ensemble, notice=notice,
                                  critical_temperature_k=t_c, curves=curves))
    if n_total and len(failures) > 0.5 * n_total:
        raise PipelineRunError(
            f"{len(failures)} of {n_total} inputs failed",
            failures=failures)
    return TempStudyResult(groups=groups, failures=failures, config=config)
