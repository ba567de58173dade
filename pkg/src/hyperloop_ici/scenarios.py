"""Named parameter sets, sweeps and link-requirement checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .link_model import (
    FadingProfile,
    MobilityProfile,
    OfdmConfig,
    doppler_frequency,
    throughput,
)

HYPERLOOP_SPEED = 1000.0 / 3.0  # 1200 km/h in m/s
DEFAULT_SNR = 1e5  # 50 dB


class PresetId(str, enum.Enum):
    FIG2_N16 = "fig2-n16"
    FIG2_N64 = "fig2-n64"
    FIG2_N256 = "fig2-n256"
    FIG2_N1024 = "fig2-n1024"
    DVB_CS2 = "dvb-cs2"
    IEEE80211A = "ieee80211a"


FIG2_PRESETS = (PresetId.FIG2_N16, PresetId.FIG2_N64, PresetId.FIG2_N256, PresetId.FIG2_N1024)


@dataclass(frozen=True)
class Preset:
    id: PresetId
    cfg: OfdmConfig
    mob: MobilityProfile
    fading: FadingProfile

    def at(self, *, snr: float | None = None, speed: float | None = None) -> "Preset":
        cfg = self.cfg if snr is None else self.cfg.with_snr(snr)
        mob = self.mob if speed is None else MobilityProfile.for_config(speed, cfg)
        return replace(self, cfg=cfg, mob=mob)

    def throughput_bps(self) -> float:
        return throughput(self.cfg, self.mob, self.fading).total_bps


def _build(pid: PresetId, n: int, t: float, fc: float) -> Preset:
    cfg = OfdmConfig(n_subcarriers=n, symbol_rate_interval=t, carrier_freq=fc).with_snr(DEFAULT_SNR)
    return Preset(pid, cfg, MobilityProfile.for_config(HYPERLOOP_SPEED, cfg), FadingProfile.flat(n))


def preset(pid: PresetId | str) -> Preset:
    try:
        pid = PresetId(pid)
    except ValueError:
        known = ", ".join(p.value for p in PresetId)
        raise ValueError(f"unknown preset {pid!r}; known presets: {known}") from None
    if pid in FIG2_PRESETS:
        n = int(pid.value.split("-n")[1])
        return _build(pid, n, 1e-6, 5e9)
    if pid is PresetId.DVB_CS2:
        return _build(pid, 2000, 500e-6 / 2000, 4.8e9)
    return _build(pid, 64, 4e-6 / 64, 5e9)


class SweepVariable(str, enum.Enum):
    SNR_DB = "snr_db"
    SPEED = "speed"
    N_SUBCARRIERS = "n_subcarriers"


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVariable
    grid: tuple[float, ...]
    base: PresetId = PresetId.FIG2_N64
    fixed: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variable", SweepVariable(self.variable))
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ValueError("sweep grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        if self.variable is SweepVariable.N_SUBCARRIERS and any(g != int(g) or g < 1 for g in grid):
            raise ValueError("subcarrier counts must be positive integers")
        object.__setattr__(self, "grid", grid)
        unknown = set(self.fixed) - {"snr", "speed"}
        if unknown:
            raise ValueError(f"unsupported sweep overrides: {sorted(unknown)}")


def _point(spec: SweepSpec, value: float) -> Preset:
    p = preset(spec.base).at(snr=spec.fixed.get("snr"), speed=spec.fixed.get("speed"))
    if spec.variable is SweepVariable.SNR_DB:
        return p.at(snr=10.0 ** (value / 10.0))
    if spec.variable is SweepVariable.SPEED:
        return p.at(speed=value)
    if not p.fading.is_flat:
        raise ValueError("subcarrier sweeps need a flat fading profile")
    n = int(value)
    cfg = replace(p.cfg, n_subcarriers=n)
    return replace(p, cfg=cfg, fading=FadingProfile.flat(n, p.fading.beta[0]))


def sweep(spec: SweepSpec) -> list[tuple[float, float]]:
    """One analytic throughput evaluation per grid point, in grid order."""
    return [(value, _point(spec, value).throughput_bps()) for value in spec.grid]


@dataclass(frozen=True)
class LinkRequirement:
    name: str
    min_rate: float
    reliability_note: str = ""
    speed: float = HYPERLOOP_SPEED

    def __post_init__(self) -> None:
        if not (math.isfinite(self.min_rate) and self.min_rate > 0):
            raise ValueError("min_rate must be a finite positive rate")
        if not (math.isfinite(self.speed) and self.speed >= 0):
            raise ValueError("speed must be >= 0")


CONTROL_LINK = LinkRequirement(
    "central-control", 48e3, "very reliable, low latency train control", HYPERLOOP_SPEED
)
DISPATCH_LINK = LinkRequirement(
    "real-time-dispatch", 100e6, "real-time monitoring inside and outside the vehicle", HYPERLOOP_SPEED
)


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class RequirementResult:
    requirement: LinkRequirement
    preset: PresetId
    verdict: Verdict
    total_bps: float
    margin: float


def requirement_check(req: LinkRequirement, p: Preset | PresetId | str, snr: float = DEFAULT_SNR) -> RequirementResult:
    if not isinstance(p, Preset):
        p = preset(p)
    rate = p.at(snr=snr, speed=req.speed).throughput_bps()
    verdict = Verdict.PASS if rate >= req.min_rate else Verdict.FAIL
    return RequirementResult(req, p.id, verdict, rate, rate / req.min_rate)


@dataclass(frozen=True)
class PrintedRow:
    """Values exactly as printed in the published comparison table."""

    doppler_khz: float
    throughput_moving_mbps: float
    throughput_static_mbps: float
    degradation: float


# Throughput columns are labelled MHz in print; read as Mbps.
PRINTED_TABLE1 = {
    PresetId.IEEE80211A: PrintedRow(5.9, 212.2, 189.7, 22.5),
    PresetId.DVB_CS2: PrintedRow(5.78, 26.53, 12.27, 14.26),
}


@dataclass(frozen=True)
class Table1Row:
    system: PresetId
    carrier_freq: float
    n_subcarriers: int
    symbol_duration: float
    doppler_hz: float
    throughput_moving_bps: float
    throughput_static_bps: float
    degradation: float
    printed: PrintedRow
    doppler_matches: bool
    degradation_matches: bool

    @property
    def reproduced(self) -> bool:
        return self.doppler_matches and self.degradation_matches


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * abs(b)


def table1_report(
    snr_db: float = 50.0, speed: float = HYPERLOOP_SPEED, rel_tol: float = 0.02
) -> list[Table1Row]:
    """Recompute the DVB-CS2 / 802.11a comparison and flag printed mismatches.

    A printed value counts as matched when within ``rel_tol`` of the computed
    one.  Printed numbers are carried through untouched.
    """
    snr = 10.0 ** (snr_db / 10.0)
    rows = []
    for pid in (PresetId.DVB_CS2, PresetId.IEEE80211A):
        p = preset(pid)
        moving = p.at(snr=snr, speed=speed).throughput_bps()
        static = p.at(snr=snr, speed=0.0).throughput_bps()
        fd = doppler_frequency(speed, p.cfg.carrier_freq)
        ratio = static / moving
        printed = PRINTED_TABLE1[pid]
        rows.append(
            Table1Row(
                system=pid,
                carrier_freq=p.cfg.carrier_freq,
                n_subcarriers=p.cfg.n_subcarriers,
                symbol_duration=p.cfg.symbol_duration,
                doppler_hz=fd,
                throughput_moving_bps=moving,
                throughput_static_bps=static,
                degradation=ratio,
                printed=printed,
                doppler_matches=_close(fd, printed.doppler_khz * 1e3, rel_tol),
                degradation_matches=_close(ratio, printed.degradation, rel_tol),
            )
        )
    return rows


def fig2_curves(snr_db_grid: Sequence[float], presets: Sequence[PresetId] = FIG2_PRESETS) -> dict[PresetId, list[tuple[float, float]]]:
    """Throughput-vs-SNR curves for each ``fig2-*`` preset."""
    return {pid: sweep(SweepSpec(SweepVariable.SNR_DB, tuple(snr_db_grid), pid)) for pid in presets}
