"""Railway communication technology catalog and a rule-based feasibility check.

A technology qualifies for a query when all three rules hold:

1. scenario: if the vehicle runs in a tube the technology must support TUBE;
2. mobility: the query speed does not exceed the rated mobility limit;
3. throughput: the best-case rate covers the required rate.

Exclusions report the first failing rule in that order.  Free-text fields
(advantages, drawbacks, notes) never influence the outcome.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class Scenario(str, enum.Enum):
    OPEN_SITE = "OPEN_SITE"
    TUBE = "TUBE"


class Source(str, enum.Enum):
    TABLE2 = "TABLE2"
    TABLE3 = "TABLE3"


class Criterion(str, enum.Enum):
    SCENARIO = "scenario"
    MOBILITY = "mobility"
    THROUGHPUT = "throughput"


@dataclass(frozen=True)
class RateRange:
    min_bps: float
    max_bps: float | None = None  # None means unbounded

    def __post_init__(self) -> None:
        if not (math.isfinite(self.min_bps) and self.min_bps > 0):
            raise ValueError("min_bps must be finite and > 0")
        if self.max_bps is not None and self.max_bps < self.min_bps:
            raise ValueError("max_bps must be >= min_bps")

    @property
    def upper(self) -> float:
        return math.inf if self.max_bps is None else self.max_bps


@dataclass(frozen=True)
class TechnologyRecord:
    name: str
    throughput: RateRange
    mobility_limit: float | None  # m/s, None means unlimited
    scenario: frozenset[Scenario]
    channel_bw: str = ""
    modulation: str = ""
    frequency: str = ""
    advantages: tuple[str, ...] = ()
    drawbacks: tuple[str, ...] = ()
    source: Source = Source.TABLE3
    # Subsidiary records (deployments, variants) name the row they belong to
    # and are kept out of feasibility evaluation.
    parent: str | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if not self.scenario:
            raise ValueError(f"{self.name}: scenario set must not be empty")
        if self.mobility_limit is not None and self.mobility_limit < 0:
            raise ValueError(f"{self.name}: mobility_limit must be >= 0")

    @property
    def mobility_cap(self) -> float:
        return math.inf if self.mobility_limit is None else self.mobility_limit

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "throughput": {"min_bps": self.throughput.min_bps, "max_bps": self.throughput.max_bps},
            "mobility_limit": self.mobility_limit,
            "scenario": sorted(s.value for s in self.scenario),
            "channel_bw": self.channel_bw,
            "modulation": self.modulation,
            "frequency": self.frequency,
            "advantages": list(self.advantages),
            "drawbacks": list(self.drawbacks),
            "source": self.source.value,
            "parent": self.parent,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TechnologyRecord":
        tp = data["throughput"]
        return cls(
            name=data["name"],
            throughput=RateRange(float(tp["min_bps"]), None if tp.get("max_bps") is None else float(tp["max_bps"])),
            mobility_limit=None if data.get("mobility_limit") is None else float(data["mobility_limit"]),
            scenario=frozenset(Scenario(s) for s in data["scenario"]),
            channel_bw=data.get("channel_bw", ""),
            modulation=data.get("modulation", ""),
            frequency=data.get("frequency", ""),
            advantages=tuple(data.get("advantages", ())),
            drawbacks=tuple(data.get("drawbacks", ())),
            source=Source(data.get("source", "TABLE3")),
            parent=data.get("parent"),
            note=data.get("note", ""),
        )


def _check_unique(records: Sequence[TechnologyRecord]) -> None:
    seen = set()
    for r in records:
        if r.name in seen:
            raise ValueError(f"duplicate technology name {r.name!r}")
        seen.add(r.name)


def loads_catalog(text: str) -> list[TechnologyRecord]:
    data = json.loads(text)
    items = data["technologies"] if isinstance(data, dict) else data
    records = [TechnologyRecord.from_dict(item) for item in items]
    _check_unique(records)
    return records


def dumps_catalog(records: Iterable[TechnologyRecord]) -> str:
    return json.dumps({"version": 1, "technologies": [r.to_dict() for r in records]}, indent=2) + "\n"


def load_catalog(path: str | Path) -> list[TechnologyRecord]:
    return loads_catalog(Path(path).read_text(encoding="utf-8"))


def builtin_catalog() -> list[TechnologyRecord]:
    text = resources.files("hyperloop_ici").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return loads_catalog(text)


@dataclass(frozen=True)
class FeasibilityQuery:
    min_rate: float
    speed: float
    in_tube: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.min_rate) and self.min_rate > 0):
            raise ValueError("min_rate must be finite and > 0")
        if not (math.isfinite(self.speed) and self.speed >= 0):
            raise ValueError("speed must be finite and >= 0")


@dataclass(frozen=True)
class Qualified:
    record: TechnologyRecord
    margin: float

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.margin)


@dataclass(frozen=True)
class Excluded:
    record: TechnologyRecord
    criterion: Criterion
    margin: float


@dataclass(frozen=True)
class FeasibilityReport:
    query: FeasibilityQuery
    qualifying: tuple[Qualified, ...]
    excluded: tuple[Excluded, ...]
    notes: tuple[str, ...] = field(default=())

    def qualifying_names(self) -> list[str]:
        return [q.record.name for q in self.qualifying]

    def excluded_reasons(self) -> dict[str, Criterion]:
        return {e.record.name: e.criterion for e in self.excluded}


CONTROL_RECOMMENDATION = "LCX"
_LCX_NOTE = (
    "LCX is the recommended choice for the central-control link: a constant rate "
    "inside each cable segment regardless of vehicle position and speed."
)
_HIGH_RATE_NOTE = (
    "No tube-capable technology except FSO reaches this rate; mmWave systems "
    "(beam switching, hybrid beamforming, distributed antennas) are the suggested "
    "direction for the dispatch link rather than any catalogued technology."
)


def _first_failure(record: TechnologyRecord, q: FeasibilityQuery) -> Criterion | None:
    if q.in_tube and Scenario.TUBE not in record.scenario:
        return Criterion.SCENARIO
    if q.speed > record.mobility_cap:
        return Criterion.MOBILITY
    if record.throughput.upper < q.min_rate:
        return Criterion.THROUGHPUT
    return None


def evaluate(query: FeasibilityQuery, catalog: Sequence[TechnologyRecord] | None = None) -> FeasibilityReport:
    """Split the top-level catalog rows into qualifying and excluded.

    Qualifying rows are ordered by margin (best-case rate over required rate)
    descending, then by name.
    """
    records = builtin_catalog() if catalog is None else list(catalog)
    _check_unique(records)
    qualifying, excluded = [], []
    for r in records:
        if r.parent is not None:
            continue
        margin = r.throughput.upper / query.min_rate
        failed = _first_failure(r, query)
        if failed is None:
            qualifying.append(Qualified(r, margin))
        else:
            excluded.append(Excluded(r, failed, margin))
    qualifying.sort(key=lambda q: (-q.margin, q.record.name))

    notes = []
    names = {q.record.name for q in qualifying}
    if CONTROL_RECOMMENDATION in names:
        notes.append(_LCX_NOTE)
    for q in qualifying:
        if q.record.drawbacks:
            notes.append(f"{q.record.name} drawbacks: {', '.join(q.record.drawbacks)}")
    lcx = next((e for e in excluded if e.record.name == CONTROL_RECOMMENDATION), None)
    if query.in_tube and lcx is not None and lcx.criterion is Criterion.THROUGHPUT:
        notes.append(_HIGH_RATE_NOTE)
    return FeasibilityReport(query, tuple(qualifying), tuple(excluded), tuple(notes))
