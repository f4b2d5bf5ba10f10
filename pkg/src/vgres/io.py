"""Sweep and temperature-series file I/O.

Two sweep formats are supported:

* CSV with header ``freq_hz,re,im`` or ``freq_hz,mag_db,phase_deg``;
  ``#``-prefixed lines are comments, and ``# key: value`` comments carry
  metadata (``power_dbm``, ``temperature_k``).
* Two-port Touchstone version 1 (option line ``# HZ S RI R 50``, also MA
  and DB value formats and the usual frequency-unit keywords), one data
  line per point; S21 is extracted.  ``!`` comments may carry the same
  ``key: value`` metadata.

Temperature series use CSV with header ``temperature_k,f_hz`` and an
optional ``# f0_hz: ...`` metadata line (defaults to the lowest-temperature
frequency).
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .core import ComplexSweep, TemperatureSeries
from .errors import ParseError

_META_RE = re.compile(r"^\s*(?P<key>[A-Za-z_][\w]*)\s*[:=]\s*(?P<value>\S+)\s*$")

CSV_RI_HEADER = ("freq_hz", "re", "im")
CSV_MA_HEADER = ("freq_hz", "mag_db", "phase_deg")
_FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def _parse_metadata(text: str, meta: dict):
    m = _META_RE.match(text)
    if m:
        try:
            meta[m.group("key").lower()] = float(m.group("value"))
        except ValueError:
            meta[m.group("key").lower()] = m.group("value")


def read_metadata(path) -> dict:
    """Collect ``key: value`` metadata from the comments of a sweep file
    (``#`` comments in CSV, ``!`` comments in Touchstone)."""
    meta: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("#"):
                _parse_metadata(stripped[1:].strip(), meta)
            elif "!" in line:
                _parse_metadata(line.split("!", 1)[1].strip(), meta)
    return meta


def _finish_sweep(path, freqs, values, meta) -> ComplexSweep:
    if not freqs:
        raise ParseError("no data rows", path=path)
    power = meta.get("power_dbm")
    try:
        return ComplexSweep(frequencies=np.asarray(freqs),
                            s21=np.asarray(values),
                            drive_power_dbm=power)
    except Exception as err:
        raise ParseError(f"invalid sweep data: {err}", path=path) from err


def load_sweep_csv(path) -> list[ComplexSweep]:
    """Load one sweep from a CSV file; returns a single-element list."""
    path = Path(path)
    header = None
    freqs, values = [], []
    meta: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_metadata(line[1:], meta)
                continue
            if header is None:
                cols = tuple(c.strip().lower() for c in line.split(","))
                if cols == CSV_RI_HEADER or cols == CSV_MA_HEADER:
                    header = cols
                    continue
                raise ParseError(
                    f"unrecognized header {line!r}; expected "
                    f"{','.join(CSV_RI_HEADER)} or {','.join(CSV_MA_HEADER)}",
                    path=path, line=line_no)
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"expected 3 comma-separated values, got "
                                 f"{len(parts)}", path=path, line=line_no)
            try:
                a, b, c = (float(p) for p in parts)
            except ValueError as err:
                raise ParseError(f"bad number: {err}", path=path,
                                 line=line_no) from err
            freqs.append(a)
            if header == CSV_RI_HEADER:
                values.append(complex(b, c))
            else:
                mag = 10.0 ** (b / 20.0)
                phase = math.radians(c)
                values.append(complex(mag * math.cos(phase),
                                      mag * math.sin(phase)))
    if header is None:
        raise ParseError("empty file", path=path)
    return [_finish_sweep(path, freqs, values, meta)]


def _touchstone_option_line(path, line_no, line):
    tokens = line[1:].split()
    unit = 1.0
    fmt = "RI"
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in _FREQ_UNITS:
            unit = _FREQ_UNITS[tok]
        elif tok == "S":
            pass
        elif tok in ("RI", "MA", "DB"):
            fmt = tok
        elif tok == "R":
            i += 1  # reference resistance value follows; accepted, unused
        else:
            raise ParseError(f"unsupported option token {tokens[i]!r}",
                             path=path, line=line_no)
        i += 1
    return unit, fmt


def _touchstone_pair(fmt, x, y) -> complex:
    if fmt == "RI":
        return complex(x, y)
    if fmt == "MA":
        mag = x
    else:  # DB
        mag = 10.0 ** (x / 20.0)
    phase = math.radians(y)
    return complex(mag * math.cos(phase), mag * math.sin(phase))


def load_sweep_touchstone(path) -> list[ComplexSweep]:
    """Load S21 of a two-port Touchstone v1 file; single-element list."""
    path = Path(path)
    unit_fmt = None
    freqs, values = [], []
    meta: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("!", 1)
            if len(line) == 2:
                _parse_metadata(line[1].strip(), meta)
            line = line[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                if unit_fmt is not None:
                    raise ParseError("duplicate option line", path=path,
                                     line=line_no)
                unit_fmt = _touchstone_option_line(path, line_no, line)
                continue
            if unit_fmt is None:
                raise ParseError("data before the option line", path=path,
                                 line=line_no)
            parts = line.split()
            if len(parts) != 9:
                raise ParseError(
                    f"expected 9 columns (f + 4 S-parameter pairs), got "
                    f"{len(parts)}", path=path, line=line_no)
            try:
                nums = [float(p) for p in parts]
            except ValueError as err:
                raise ParseError(f"bad number: {err}", path=path,
                                 line=line_no) from err
            unit, fmt = unit_fmt
            freqs.append(nums[0] * unit)
            values.append(_touchstone_pair(fmt, nums[3], nums[4]))  # S21
    if unit_fmt is None:
        raise ParseError("empty file", path=path)
    return [_finish_sweep(path, freqs, values, meta)]


def load_sweep(path, fmt: str | None = None) -> list[ComplexSweep]:
    """Load sweeps from a file; format from ``fmt`` or the file suffix
    (.s2p/.snp -> touchstone, else csv)."""
    path = Path(path)
    if fmt is None:
        fmt = "touchstone" if path.suffix.lower() in (".s2p", ".snp", ".ts") \
            else "csv"
    if fmt == "csv":
        return load_sweep_csv(path)
    if fmt == "touchstone":
        return load_sweep_touchstone(path)
    raise ParseError(f"unknown format {fmt!r}", path=path)


def _format_meta(value) -> str:
    # floats via repr (round-trip exact); strings must be single tokens
    if isinstance(value, bool):
        raise ValueError("boolean metadata is not supported")
    if isinstance(value, (int, float)):
        return repr(float(value))
    return str(value)


def write_sweep_csv(path, sweep: ComplexSweep, metadata: dict | None = None):
    """Write a sweep as freq_hz,re,im CSV (repr floats, bit-exact round trip)."""
    lines = []
    meta = dict(metadata or {})
    if sweep.drive_power_dbm is not None:
        meta.setdefault("power_dbm", sweep.drive_power_dbm)
    for key in sorted(meta):
        lines.append(f"# {key}: {_format_meta(meta[key])}")
    lines.append(",".join(CSV_RI_HEADER))
    for f, z in zip(sweep.frequencies, sweep.s21):
        lines.append(f"{float(f)!r},{float(z.real)!r},{float(z.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_touchstone(path, sweep: ComplexSweep, fmt: str = "RI",
                           metadata: dict | None = None):
    """Write a sweep as a two-port Touchstone v1 file (S21 = S12 = data,
    S11 = S22 = 0)."""
    if fmt not in ("RI", "MA", "DB"):
        raise ValueError(f"fmt must be RI, MA or DB, got {fmt!r}")
    lines = []
    meta = dict(metadata or {})
    if sweep.drive_power_dbm is not None:
        meta.setdefault("power_dbm", sweep.drive_power_dbm)
    for key in sorted(meta):
        lines.append(f"! {key}: {_format_meta(meta[key])}")
    lines.append(f"# HZ S {fmt} R 50")

    def pair(z: complex) -> str:
        if fmt == "RI":
            return f"{z.real!r} {z.imag!r}"
        mag = abs(z)
        ang = math.degrees(math.atan2(z.imag, z.real))
        if fmt == "MA":
            return f"{mag!r} {ang!r}"
        db = 20.0 * math.log10(mag) if mag > 0 else -400.0
        return f"{db!r} {ang!r}"

    zero = pair(complex(0.0, 0.0)) if fmt == "RI" else "-400.0 0.0" \
        if fmt == "DB" else "0.0 0.0"
    for f, z in zip(sweep.frequencies, sweep.s21):
        lines.append(f"{float(f)!r} {zero} {pair(complex(z))} "
                     f"{pair(complex(z))} {zero}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_temperature_series(path) -> TemperatureSeries:
    """Load a temperature_k,f_hz CSV as a TemperatureSeries."""
    path = Path(path)
    header_seen = False
    temps, freqs = [], []
    meta: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_metadata(line[1:], meta)
                continue
            if not header_seen:
                cols = tuple(c.strip().lower() for c in line.split(","))
                if cols != ("temperature_k", "f_hz"):
                    raise ParseError(f"unrecognized header {line!r}; expected "
                                     "temperature_k,f_hz", path=path,
                                     line=line_no)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"expected 2 comma-separated values, got "
                                 f"{len(parts)}", path=path, line=line_no)
            try:
                t, f = float(parts[0]), float(parts[1])
            except ValueError as err:
                raise ParseError(f"bad number: {err}", path=path,
                                 line=line_no) from err
            temps.append(t)
            freqs.append(f)
    if not header_seen or not temps:
        raise ParseError("empty file", path=path)
    order = np.argsort(np.asarray(temps), kind="stable")
    t_arr = np.asarray(temps)[order]
    f_arr = np.asarray(freqs)[order]
    f0 = meta.get("f0_hz", f_arr[0])
    try:
        return TemperatureSeries(temperatures=t_arr, frequencies=f_arr,
                                 f0=float(f0))
    except Exception as err:
        raise ParseError(f"invalid series: {err}", path=path) from err


def write_temperature_series(path, series: TemperatureSeries,
                             include_f0: bool = True):
    """Write a TemperatureSeries as temperature_k,f_hz CSV."""
    lines = []
    if include_f0:
        lines.append(f"# f0_hz: {float(series.f0)!r}")
    lines.append("temperature_k,f_hz")
    for t, f in zip(series.temperatures, series.frequencies):
        lines.append(f"{float(t)!r},{float(f)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
