"""Command line entry point.

Examples::

    hyperloop-ici analyze --preset fig2-n64 --snr 50dB
    hyperloop-ici simulate --preset fig2-n16 --trials 10000 --seed 7 --mode taylor
    hyperloop-ici sweep --preset fig2-n64 --variable snr_db --grid 0:50:5
    hyperloop-ici table1
    hyperloop-ici feasibility --rate 48kbps --speed 1200km/h --tube

Exit status: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import units
from .channel_sim import ChannelMode, Constellation, run_trials
from .link_model import FadingProfile, LinkModelError, MobilityProfile, OfdmConfig, throughput
from .scenarios import (
    DEFAULT_SNR,
    HYPERLOOP_SPEED,
    PresetId,
    SweepSpec,
    SweepVariable,
    preset,
    sweep,
    table1_report,
)
from .techmatrix import FeasibilityQuery, builtin_catalog, evaluate, load_catalog


class Command(str, enum.Enum):
    ANALYZE = "analyze"
    SIMULATE = "simulate"
    SWEEP = "sweep"
    TABLE1 = "table1"
    FEASIBILITY = "feasibility"
    PRESETS = "presets"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


# Parameters that define a link from scratch; mutually exclusive with --preset.
EXPLICIT = ("n", "symbol_interval", "carrier_freq", "tx_power")

DEFAULTS: dict[str, Any] = {
    "format": "csv",
    "output": None,
    "preset": None,
    "n": None,
    "symbol_interval": None,
    "carrier_freq": None,
    "tx_power": None,
    "snr": DEFAULT_SNR,
    "speed": None,
    "trials": 10_000,
    "seed": 0,
    "mode": "taylor",
    "oversample": 16,
    "workers": 1,
    "constellation": "qpsk",
    "variable": None,
    "grid": None,
    "rate": None,
    "tube": True,
    "catalog": None,
}

CONVERTERS = {
    "n": int,
    "symbol_interval": units.parse_time,
    "carrier_freq": units.parse_frequency,
    "tx_power": units.parse_power,
    "snr": units.parse_ratio,
    "speed": units.parse_speed,
    "trials": int,
    "seed": int,
    "oversample": int,
    "workers": int,
    "rate": units.parse_rate,
}


@dataclass
class RunConfig:
    command: Command
    output_format: OutputFormat = OutputFormat.CSV
    output_path: Path | None = None
    preset: PresetId | None = None
    explicit: dict[str, Any] = field(default_factory=dict)
    snr: float = DEFAULT_SNR
    speed: float | None = None
    seed: int = 0
    trials: int = 10_000
    mode: ChannelMode = ChannelMode.TAYLOR
    oversample: int = 16
    workers: int = 1
    constellation: Constellation = Constellation.QPSK
    variable: SweepVariable | None = None
    grid: tuple[float, ...] = ()
    rate: float | None = None
    tube: bool = True
    catalog: Path | None = None


class UsageError(Exception):
    pass


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=[f.value for f in OutputFormat], help="output format (default csv)")
    p.add_argument("--output", "-o", help="output file (default standard output)")
    p.add_argument("--config", help="JSON file with the same fields as the flags; flags win")


def _add_link(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=[x.value for x in PresetId])
    p.add_argument("--n", help="number of subcarriers")
    p.add_argument("--symbol-interval", dest="symbol_interval", help="input symbol interval T, e.g. 1us")
    p.add_argument("--carrier-freq", dest="carrier_freq", help="carrier frequency, e.g. 5GHz")
    p.add_argument("--tx-power", dest="tx_power", help="per-subcarrier power, e.g. 1W")
    p.add_argument("--snr", help="P_T/N_0 as dB (50dB) or a bare linear ratio")
    p.add_argument("--speed", help="vehicle speed, e.g. 1200km/h or 333.3m/s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperloop-ici",
        description="OFDM throughput under Doppler ICI and railway technology feasibility.",
        argument_default=None,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("analyze", help="closed-form per-subcarrier metrics and throughput")
    _add_link(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo power decomposition")
    _add_link(p)
    p.add_argument("--trials")
    p.add_argument("--seed")
    p.add_argument("--mode", choices=[m.value for m in ChannelMode])
    p.add_argument("--oversample")
    p.add_argument("--workers")
    p.add_argument("--constellation", choices=[c.value for c in Constellation])
    _add_output(p)

    p = sub.add_parser("sweep", help="throughput over a grid of SNR, speed or N")
    _add_link(p)
    p.add_argument("--variable", choices=[v.value for v in SweepVariable])
    p.add_argument("--grid", help="comma list (0,10,20) or start:stop:step, inclusive")
    _add_output(p)

    p = sub.add_parser("table1", help="DVB-CS2 / 802.11a degradation report")
    p.add_argument("--snr")
    p.add_argument("--speed")
    _add_output(p)

    p = sub.add_parser("feasibility", help="which railway technologies meet a link requirement")
    p.add_argument("--rate", help="required rate, e.g. 48kbps")
    p.add_argument("--speed")
    where = p.add_mutually_exclusive_group()
    where.add_argument("--tube", dest="tube", action="store_const", const=True)
    where.add_argument("--open-site", dest="tube", action="store_const", const=False)
    p.add_argument("--catalog", help="JSON catalog replacing the builtin one")
    _add_output(p)

    p = sub.add_parser("presets", help="list builtin presets")
    _add_output(p)
    return parser


def _parse_grid(text: str, variable: SweepVariable) -> tuple[float, ...]:
    conv = units.parse_speed if variable is SweepVariable.SPEED else float
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("grid range must be start:stop:step")
        start, stop, step = (conv(x) for x in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(count))
    return tuple(conv(x) for x in text.split(",") if x.strip())


def _load_config(path: str) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    for key, value in data.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in DEFAULTS:
            raise UsageError(f"unknown config field {key!r}")
        out[dest] = value
    return out


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse the argument vector; usage problems exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _resolve(ns)
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))
        raise  # unreachable


def _resolve(ns: argparse.Namespace) -> RunConfig:
    command = Command(ns.command)
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config") and v is not None}
    file_values = _load_config(ns.config) if getattr(ns, "config", None) else {}
    merged = {**DEFAULTS, **file_values, **given}
    values = {k: (CONVERTERS[k](v) if k in CONVERTERS and v is not None else v) for k, v in merged.items()}

    cfg = RunConfig(command=command)
    cfg.output_format = OutputFormat(values["format"])
    cfg.output_path = Path(values["output"]) if values["output"] else None

    if command in (Command.ANALYZE, Command.SIMULATE, Command.SWEEP):
        explicit = {k: values[k] for k in EXPLICIT if values[k] is not None}
        if values["preset"] is not None and explicit:
            flags = ", ".join("--" + k.replace("_", "-") for k in explicit)
            raise UsageError(f"--preset cannot be combined with {flags}")
        if values["preset"] is not None:
            cfg.preset = PresetId(values["preset"])
        else:
            missing = [k for k in ("n", "symbol_interval", "carrier_freq") if k not in explicit]
            if missing:
                raise UsageError(
                    "give --preset or all of --n, --symbol-interval, --carrier-freq (missing "
                    + ", ".join("--" + k.replace("_", "-") for k in missing)
                    + ")"
                )
            cfg.explicit = explicit
    cfg.snr = values["snr"]
    if not cfg.snr > 0:
        raise UsageError("--snr must be positive")
    cfg.speed = values["speed"]
    if cfg.speed is not None and cfg.speed < 0:
        raise UsageError("--speed must be >= 0")

    if command is Command.SIMULATE:
        cfg.trials = values["trials"]
        if cfg.trials < 1:
            raise UsageError("--trials must be >= 1")
        cfg.seed = values["seed"]
        if not 0 <= cfg.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        cfg.mode = ChannelMode(values["mode"])
        cfg.oversample = values["oversample"]
        if cfg.oversample < 4:
            raise UsageError("--oversample must be >= 4")
        cfg.workers = max(1, values["workers"])
        cfg.constellation = Constellation(values["constellation"])
    if command is Command.SWEEP:
        if values["variable"] is None or values["grid"] is None:
            raise UsageError("sweep needs --variable and --grid")
        cfg.variable = SweepVariable(values["variable"])
        grid = values["grid"]
        cfg.grid = tuple(grid) if isinstance(grid, list) else _parse_grid(grid, cfg.variable)
    if command is Command.FEASIBILITY:
        if values["rate"] is None:
            raise UsageError("feasibility needs --rate")
        cfg.rate = values["rate"]
        cfg.tube = bool(values["tube"])
        cfg.catalog = Path(values["catalog"]) if values["catalog"] else None
    return cfg


# ---------------------------------------------------------------- execution


def _link(cfg: RunConfig) -> tuple[OfdmConfig, MobilityProfile, FadingProfile, str]:
    if cfg.preset is not None:
        p = preset(cfg.preset).at(snr=cfg.snr, speed=cfg.speed)
        return p.cfg, p.mob, p.fading, p.id.value
    e = cfg.explicit
    ofdm = OfdmConfig(
        n_subcarriers=e["n"],
        symbol_rate_interval=e["symbol_interval"],
        carrier_freq=e["carrier_freq"],
        tx_power=e.get("tx_power", 1.0),
    ).with_snr(cfg.snr)
    speed = HYPERLOOP_SPEED if cfg.speed is None else cfg.speed
    return ofdm, MobilityProfile.for_config(speed, ofdm), FadingProfile.flat(ofdm.n_subcarriers), "custom"


ANALYZE_HEADER = ["subcarrier", "desired_w", "ici_w", "noise_w", "sinr_db", "bps"]
SIMULATE_HEADER = ANALYZE_HEADER + [
    "desired_w_hat",
    "ici_w_hat",
    "noise_w_hat",
    "desired_w_stderr",
    "ici_w_stderr",
    "noise_w_stderr",
]
FEASIBILITY_HEADER = ["technology", "qualifies", "margin", "reason"]
TABLE1_HEADER = [
    "system",
    "carrier_freq_hz",
    "n_subcarriers",
    "symbol_duration_s",
    "doppler_hz",
    "throughput_moving_bps",
    "throughput_static_bps",
    "degradation",
    "printed_doppler_hz",
    "printed_throughput_moving_bps",
    "printed_throughput_static_bps",
    "printed_degradation",
    "reproduced",
]
PRESETS_HEADER = [
    "id",
    "n_subcarriers",
    "symbol_interval_s",
    "symbol_duration_s",
    "carrier_freq_hz",
    "speed_mps",
    "doppler_hz",
]


def _analytic_rows(ofdm, mob, fading) -> tuple[list[dict], float]:
    res = throughput(ofdm, mob, fading)
    bps = res.subcarrier_bps()
    rows = [
        {
            "subcarrier": m.index,
            "desired_w": m.desired_power,
            "ici_w": m.ici_power,
            "noise_w": m.noise_power,
            "sinr_db": m.sinr_db,
            "bps": float(b),
        }
        for m, b in zip(res.per_subcarrier, bps)
    ]
    return rows, res.total_bps


def run(cfg: RunConfig) -> tuple[list[str], list[dict], dict]:
    """Execute a parsed command; returns (header, rows, extra JSON fields)."""
    if cfg.command is Command.ANALYZE:
        ofdm, mob, fading, name = _link(cfg)
        rows, total = _analytic_rows(ofdm, mob, fading)
        return ANALYZE_HEADER, rows, {"link": name, "total_bps": total}

    if cfg.command is Command.SIMULATE:
        ofdm, mob, fading, name = _link(cfg)
        rows, total = _analytic_rows(ofdm, mob, fading)
        stats = run_trials(
            ofdm,
            mob,
            fading,
            mode=cfg.mode,
            trials=cfg.trials,
            seed=cfg.seed,
            constellation=cfg.constellation,
            oversample=cfg.oversample,
            workers=cfg.workers,
        )
        for i, row in enumerate(rows):
            row.update(
                desired_w_hat=float(stats.desired_power_hat[i]),
                ici_w_hat=float(stats.ici_power_hat[i]),
                noise_w_hat=float(stats.noise_power_hat[i]),
                desired_w_stderr=float(stats.desired_stderr[i]),
                ici_w_stderr=float(stats.ici_stderr[i]),
                noise_w_stderr=float(stats.noise_stderr[i]),
            )
        extra = {
            "link": name,
            "total_bps": total,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "mode": cfg.mode.value,
            "oversample": cfg.oversample,
            "constellation": cfg.constellation.value,
        }
        return SIMULATE_HEADER, rows, extra

    if cfg.command is Command.SWEEP:
        if cfg.preset is None:
            raise UsageError("sweep runs on a preset; pass --preset")
        fixed = {"snr": cfg.snr}
        if cfg.speed is not None:
            fixed["speed"] = cfg.speed
        if cfg.variable is SweepVariable.SNR_DB:
            fixed.pop("snr")
        if cfg.variable is SweepVariable.SPEED:
            fixed.pop("speed", None)
        spec = SweepSpec(cfg.variable, cfg.grid, cfg.preset, fixed)
        var = cfg.variable.value
        rows = [{var: v, "total_bps": c} for v, c in sweep(spec)]
        return [var, "total_bps"], rows, {"link": cfg.preset.value}

    if cfg.command is Command.TABLE1:
        speed = HYPERLOOP_SPEED if cfg.speed is None else cfg.speed
        rows = []
        for r in table1_report(snr_db=10.0 * math.log10(cfg.snr), speed=speed):
            rows.append(
                {
                    "system": r.system.value,
                    "carrier_freq_hz": r.carrier_freq,
                    "n_subcarriers": r.n_subcarriers,
                    "symbol_duration_s": r.symbol_duration,
                    "doppler_hz": r.doppler_hz,
                    "throughput_moving_bps": r.throughput_moving_bps,
                    "throughput_static_bps": r.throughput_static_bps,
                    "degradation": r.degradation,
                    "printed_doppler_hz": r.printed.doppler_khz * 1e3,
                    "printed_throughput_moving_bps": r.printed.throughput_moving_mbps * 1e6,
                    "printed_throughput_static_bps": r.printed.throughput_static_mbps * 1e6,
                    "printed_degradation": r.printed.degradation,
                    "reproduced": r.reproduced,
                }
            )
        return TABLE1_HEADER, rows, {"speed_mps": speed, "snr": cfg.snr}

    if cfg.command is Command.FEASIBILITY:
        catalog = load_catalog(cfg.catalog) if cfg.catalog else builtin_catalog()
        speed = HYPERLOOP_SPEED if cfg.speed is None else cfg.speed
        report = evaluate(FeasibilityQuery(cfg.rate, speed, cfg.tube), catalog)
        rows = [
            {"technology": q.record.name, "qualifies": True, "margin": q.margin, "reason": ""}
            for q in report.qualifying
        ] + [
            {"technology": e.record.name, "qualifies": False, "margin": e.margin, "reason": e.criterion.value}
            for e in report.excluded
        ]
        extra = {"min_rate_bps": cfg.rate, "speed_mps": speed, "in_tube": cfg.tube, "notes": list(report.notes)}
        return FEASIBILITY_HEADER, rows, extra

    rows = []
    for pid in PresetId:
        p = preset(pid)
        rows.append(
            {
                "id": pid.value,
                "n_subcarriers": p.cfg.n_subcarriers,
                "symbol_interval_s": p.cfg.symbol_rate_interval,
                "symbol_duration_s": p.cfg.symbol_duration,
                "carrier_freq_hz": p.cfg.carrier_freq,
                "speed_mps": p.mob.speed,
                "doppler_hz": p.mob.doppler_bw,
            }
        )
    return PRESETS_HEADER, rows, {}


def format_number(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def _cell(v: Any) -> str:
    if isinstance(v, str):
        return v
    return format_number(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return format_number(v)
        return float(format(v, ".9g"))
    if isinstance(v, list):
        return [_json_value(x) for x in v]
    return v


def emit(header: list[str], rows: list[dict], fmt: OutputFormat, command: Command, extra: dict | None = None) -> bytes:
    if fmt is OutputFormat.CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[h]) for h in header])
        return buf.getvalue().encode("utf-8")
    doc = {"command": command.value}
    doc.update({k: _json_value(v) for k, v in (extra or {}).items()})
    doc["columns"] = header
    doc["rows"] = [{h: _json_value(row[h]) for h in header} for row in rows]
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:  # argparse: usage errors (2) and --help (0)
        return int(exc.code or 0)
    try:
        header, rows, extra = run(cfg)
    except UsageError as exc:
        print(f"hyperloop-ici: error: {exc}", file=sys.stderr)
        return 2
    except (LinkModelError, ValueError, OSError) as exc:
        print(f"hyperloop-ici: {exc}", file=sys.stderr)
        return 1
    payload = emit(header, rows, cfg.output_format, cfg.command, extra)
    if cfg.output_path is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return 0
    try:
        cfg.output_path.write_bytes(payload)
    except OSError as exc:
        print(f"hyperloop-ici: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
