"""Machine-readable run reports and plot-ready delimited files.

The main report is a plain-text key-value tree (deterministic ordering, no
timestamps, repr floats) so reruns on identical inputs produce
byte-identical files.  Alongside it, tab-separated files carry the
envelope and per-fit tables for plotting.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .core import joules_to_microev
from .pipeline import PowerSweepResult, TempStudyResult
from .tempmodel import FixAlpha, FixDelta, FixDeltaSweep

REPORT_NAME = "report.txt"

# Published loss tangents of dielectrics used in comparable parallel-plate
# amplifier processes, plus the vacuum-gap reference value.
LOSS_REFERENCE_ROWS = (
    ("SiO2 (50 nm)", 5e-4),
    ("Al2O3 (30 nm)", 6.5e-3),
    ("aSi:H (200 nm)", 3.6e-5),
    ("vacuum gap reference (80 nm)", 3e-4),
)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def format_value_uncertainty(value: float, sigma: float | None,
                             unit: str = "") -> str:
    """Concise value(uncertainty) notation: 351 +- 2 -> ``351(2)``.

    The uncertainty keeps one significant digit, or two when its leading
    digit is 1; the value is rounded to the same decimal place.
    """
    suffix = f" {unit}" if unit else ""
    if sigma is None or sigma <= 0 or not math.isfinite(sigma):
        return f"{value!r}{suffix}"
    exp = math.floor(math.log10(sigma))
    digits = 2 if round(sigma / 10.0 ** exp) == 1 else 1
    place = exp - (digits - 1)
    sig = round(sigma / 10.0 ** place)
    if sig == 10 ** digits:      # rounding bumped 9.6 -> 10
        sig = 10 ** (digits - 1)
        place += 1
    val = round(value / 10.0 ** place) * 10.0 ** place
    if place >= 0:
        return f"{val:.0f}({sig * 10 ** place:.0f}){suffix}"
    return f"{val:.{-place}f}({sig}){suffix}"


def loss_comparison(measured_tan_delta: float | None):
    """Reference loss table with the measured value ranked into it.

    Rows sorted by loss tangent ascending (best first); reference rows
    precede a measured row with exactly equal loss.
    """
    rows = [{"label": label, "tan-delta": value, "measured": False}
            for label, value in LOSS_REFERENCE_ROWS]
    if measured_tan_delta is not None:
        rows.append({"label": "this run", "tan-delta": measured_tan_delta,
                     "measured": True})
    rows.sort(key=lambda r: (r["tan-delta"], r["measured"]))
    return rows


def _render(node, indent: int, lines: list):
    pad = "  " * indent
    if isinstance(node, dict):
        for key, value in node.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                _render(value, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_scalar(value)}")
    elif isinstance(node, list):
        for item in node:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                _render(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(node)}")


def _scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):  # incl. numpy float64; plain repr for both
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "none"
    return str(value)


def render_tree(tree: dict) -> str:
    lines: list[str] = []
    _render(tree, 0, lines)
    return "\n".join(lines) + "\n"


def _provenance(config) -> dict:
    prov = {}
    if config.path is not None:
        prov["config"] = str(config.path)
        prov["config-sha256"] = sha256_file(config.path)
    inputs = []
    for rname in sorted(getattr(config, "resonators", {})):
        for p in sorted(config.resonators[rname]):
            inputs.append({"path": str(p), "sha256": sha256_file(p)})
    for gname in sorted(getattr(config, "groups", {})):
        g = config.groups[gname]
        for p in sorted(g.series_paths) + sorted(g.sweep_paths):
            inputs.append({"path": str(p), "sha256": sha256_file(p)})
    prov["inputs"] = inputs
    return prov


def _envelope_tree(env) -> dict:
    out = {"axis": env.axis, "bins": env.n_bins}
    rows = []
    for i in range(env.n_bins):
        row = {"center": float(env.centers[i]), "count": int(env.counts[i])}
        if env.counts[i] > 0:
            row.update(mean=float(env.means[i]), min=float(env.mins[i]),
                       max=float(env.maxs[i]))
        else:
            row["empty"] = True
        rows.append(row)
    out["bin"] = rows
    return out


def _strategy_tree(strategy) -> dict:
    if isinstance(strategy, FixAlpha):
        return {"kind": "fix_alpha", "alpha": strategy.alpha}
    if isinstance(strategy, FixDelta):
        return {"kind": "fix_delta",
                "delta-uev": joules_to_microev(strategy.delta_0)}
    if isinstance(strategy, FixDeltaSweep):
        return {"kind": "fix_delta_sweep",
                "delta-uev": [joules_to_microev(d)
                              for d in strategy.delta_values]}
    return {"kind": str(strategy)}


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_power_sweep_report(result: PowerSweepResult, out_dir) -> Path:
    """Write report.txt, fits.tsv and envelope.tsv; returns the report path."""
    out = Path(out_dir)
    tree: dict = {"vgres-report": 1, "mode": "power-sweep"}
    tree["provenance"] = _provenance(result.config)
    tree["calibration"] = result.calibration
    tree["summary"] = {
        "fits": len(result.rows),
        "failures": len(result.failures),
        "status": "ok" if result.rows else "no fits",
    }

    resonators: dict = {}
    measured_tan = None
    by_res: dict = {}
    for row in result.rows:
        by_res.setdefault(row.resonator, []).append(row)
    for rname in sorted(by_res):
        rows = sorted(by_res[rname], key=lambda r: str(r.path))
        low_q = result.low_power_q_int.get(rname)
        resonators[rname] = {
            "fits": len(rows),
            "low-power-q-int": low_q,
            "low-power-tan-delta": 1.0 / low_q if low_q else None,
            "rows": [{
                "path": str(r.path),
                "power-dbm": r.drive_power_dbm,
                "p-inc-w": r.p_inc_w,
                "n-bar": r.n_bar,
                "f-r-hz": r.fit.f_r,
                "q-l": r.fit.q_l,
                "q-c-mag": r.fit.q_c_mag,
                "phi-rad": r.fit.phi,
                "q-int": r.fit.q_int,
                "residual-rms": r.fit.residual_rms,
            } for r in rows],
        }
    tree["resonators"] = resonators
    if result.low_power_q_int:
        mean_low_q = float(np.mean(sorted(result.low_power_q_int.values())))
        measured_tan = 1.0 / mean_low_q
        tree["summary"]["low-power-q-int-mean"] = mean_low_q
        tree["summary"]["low-power-tan-delta"] = measured_tan
    if result.failures:
        tree["failed-inputs"] = [{"resonator": flr.resonator,
                                  "path": str(flr.path), "error": flr.error}
                                 for flr in sorted(result.failures,
                                                   key=lambda x: str(x.path))]
    if result.envelope is not None:
        tree["envelope"] = _envelope_tree(result.envelope)
    tree["loss-comparison"] = loss_comparison(measured_tan)

    report_path = out / REPORT_NAME
    _write(report_path, render_tree(tree))

    fits_lines = ["resonator\tpath\tpower_dbm\tp_inc_w\tn_bar\tf_r_hz\tq_l\t"
                  "q_c_mag\tphi_rad\tq_int\tresidual_rms"]
    for rname in sorted(by_res):
        for r in sorted(by_res[rname], key=lambda r: str(r.path)):
            fit = r.fit
            fits_lines.append("\t".join([
                rname, str(r.path), repr(r.drive_power_dbm), repr(r.p_inc_w),
                repr(r.n_bar), repr(fit.f_r), repr(fit.q_l),
                repr(fit.q_c_mag), repr(fit.phi), repr(fit.q_int),
                repr(fit.residual_rms)]))
    _write(out / "fits.tsv", "\n".join(fits_lines) + "\n")

    if result.envelope is not None:
        env = result.envelope
        env_lines = ["bin_center\tbin_center_transformed\tmean\tmin\tmax\tcount"]
        centers = env.centers_untransformed()
        for i in range(env.n_bins):
            if env.counts[i] > 0:
                stats = [repr(float(env.means[i])), repr(float(env.mins[i])),
                         repr(float(env.maxs[i]))]
            else:
                stats = ["nan", "nan", "nan"]
            env_lines.append("\t".join([repr(float(centers[i])),
                                        repr(float(env.centers[i]))] + stats +
                                       [str(int(env.counts[i]))]))
        _write(out / "envelope.tsv", "\n".join(env_lines) + "\n")
    return report_path


def write_temperature_report(result: TempStudyResult, out_dir) -> Path:
    """Write report.txt, temperature_fits.tsv and temperature_curves.tsv."""
    out = Path(out_dir)
    tree: dict = {"vgres-report": 1, "mode": "temp-study"}
    tree["provenance"] = _provenance(result.config)
    n_fits = sum(len(g.fits) for g in result.groups)
    tree["summary"] = {
        "groups": len(result.groups),
        "fits": n_fits,
        "failures": len(result.failures),
        "status": "ok" if n_fits else "no fits",
    }

    groups_tree: dict = {}
    for group in result.groups:
        gt: dict = {
            "resonators": len(group.fits),
            "strategy": _strategy_tree(group.strategy),
        }
        if group.notice:
            gt["notice"] = group.notice
        per = {}
        for rname, params in group.fits:
            per[rname] = {
                "f-tan-delta": params.f_tan_delta,
                "delta-uev": joules_to_microev(params.delta_0),
                "alpha": params.alpha,
                "f0-hz": params.f0,
                "fixed": ", ".join(params.fixed),
                "uncertainties": {
                    k: (joules_to_microev(v) if k == "delta_0" else v)
                    for k, v in sorted(params.uncertainties.items())},
            }
        gt["per-resonator"] = per
        if group.ensemble is not None:
            mean = group.ensemble.mean
            spread = group.ensemble.spread
            gt["ensemble"] = {
                "f-tan-delta": format_value_uncertainty(
                    mean.f_tan_delta, spread.get("f_tan_delta")),
                "delta": format_value_uncertainty(
                    joules_to_microev(mean.delta_0),
                    joules_to_microev(spread["delta_0"])
                    if spread.get("delta_0") else None, "ueV"),
                "alpha": format_value_uncertainty(mean.alpha,
                                                  spread.get("alpha")),
            }
        if group.critical_temperature_k is not None:
            gt["critical-temperature-k"] = group.critical_temperature_k
        groups_tree[group.name] = gt
    tree["groups"] = groups_tree
    if result.failures:
        tree["failed-inputs"] = [{"resonator": flr.resonator,
                                  "path": str(flr.path), "error": flr.error}
                                 for flr in sorted(result.failures,
                                                   key=lambda x: str(x.path))]

    report_path = out / REPORT_NAME
    _write(report_path, render_tree(tree))

    fit_lines = ["group\tresonator\tf_tan_delta\tdelta_uev\talpha\tf0_hz\t"
                 "fixed\tsigma_f_tan_delta\tsigma_delta_uev\tsigma_alpha"]
    for group in result.groups:
        for rname, p in group.fits:
            unc = p.uncertainties
            fit_lines.append("\t".join([
                group.name, rname, repr(p.f_tan_delta),
                repr(joules_to_microev(p.delta_0)), repr(p.alpha),
                repr(p.f0), "+".join(p.fixed) or "-",
                repr(unc.get("f_tan_delta", float("nan"))),
                repr(joules_to_microev(unc["delta_0"]))
                if "delta_0" in unc else "nan",
                repr(unc.get("alpha", float("nan")))]))
    _write(out / "temperature_fits.tsv", "\n".join(fit_lines) + "\n")

    curve_lines = ["group\tresonator\ttemperature_k\trel_shift_measured\t"
                   "rel_shift_model"]
    for group in result.groups:
        for rname, series, model in group.curves:
            measured = series.relative_shift
            for t, ym, yf in zip(series.temperatures, measured, model):
                curve_lines.append("\t".join([
                    group.name, rname, repr(float(t)), repr(float(ym)),
                    repr(float(yf))]))
    _write(out / "temperature_curves.tsv", "\n".join(curve_lines) + "\n")
    return report_path
