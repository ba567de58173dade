"""Parsing of unit-suffixed quantities such as ``1200km/h`` or ``50dB``.

Every parser returns strict SI values.  A bare number is taken to already be
in the SI unit (m/s, Hz, s, bit/s, W, linear power ratio).
"""
from __future__ import annotations

import math
import re

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*?)?\s*$")

# km/h is applied as (x * 1000) / 3600 so that 1200 km/h lands exactly on 1000/3
_KMH = (1000.0, 3600.0)
SPEED_UNITS = {"": 1.0, "m/s": 1.0, "km/h": _KMH, "kmh": _KMH, "kph": _KMH}
FREQ_UNITS = {"": 1.0, "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
TIME_UNITS = {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9}
RATE_UNITS = {
    "": 1.0, "bps": 1.0, "b/s": 1.0,
    "kbps": 1e3, "kb/s": 1e3,
    "mbps": 1e6, "mb/s": 1e6,
    "gbps": 1e9, "gb/s": 1e9,
}
POWER_UNITS = {"": 1.0, "w": 1.0, "mw": 1e-3, "uw": 1e-6}


class UnitError(ValueError):
    pass


def _split(text: str | float | int) -> tuple[float, str]:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text), ""
    m = _NUMBER.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    return float(m.group(1)), (m.group(2) or "").strip()


def _parse(text, table: dict[str, float | tuple[float, float]], kind: str) -> float:
    value, unit = _split(text)
    key = unit if unit in table else unit.lower()
    if key not in table:
        raise UnitError(f"unknown {kind} unit {unit!r} in {text!r}; expected one of {sorted(k for k in table if k)}")
    factor = table[key]
    result = value * factor[0] / factor[1] if isinstance(factor, tuple) else value * factor
    if not math.isfinite(result):
        raise UnitError(f"{kind} must be finite, got {text!r}")
    return result


def parse_speed(text) -> float:
    return _parse(text, SPEED_UNITS, "speed")


def parse_frequency(text) -> float:
    return _parse(text, FREQ_UNITS, "frequency")


def parse_time(text) -> float:
    return _parse(text, TIME_UNITS, "time")


def parse_rate(text) -> float:
    return _parse(text, RATE_UNITS, "rate")


def parse_power(text) -> float:
    return _parse(text, POWER_UNITS, "power")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def parse_ratio(text) -> float:
    """``50dB`` -> 1e5; a bare number is a linear power ratio."""
    value, unit = _split(text)
    if unit.lower() == "db":
        value = db_to_linear(value)
    elif unit:
        raise UnitError(f"unknown ratio unit {unit!r} in {text!r}; use dB or a bare linear ratio")
    if not math.isfinite(value):
        raise UnitError(f"ratio must be finite, got {text!r}")
    return value
