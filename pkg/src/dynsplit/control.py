"""Closed-loop split controller driven by PM counters.

A decision takes a window of counter records, turns the O-DU PRB occupancy
into per-sector loads, runs the optimizer, and only reconfigures when the
relative objective improvement beats a hysteresis threshold, or when the
current split vector no longer fits the fronthaul.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .fronthaul import sector_fh
from .model import BbFunction, Side, Split, placement_of
from .optimizer import SEARCH_METHODS, Solution, evaluate
from .scenario import Scenario

log = logging.getLogger(__name__)

MIN_CADENCE_S = 1.0
DIVERGENCE_TOL = 0.05


class Source(str, enum.Enum):
    O_DU = "O-DU"
    O_RU = "O-RU"
    FH_SWITCH = "FH-SWITCH"


@dataclass(frozen=True)
class PmCounterRecord:
    timestamp: float
    sector_id: int
    prb_occupancy_dl: float
    prb_occupancy_ul: float
    traffic_volume: float = 0.0
    source: Source = Source.O_DU

    def __post_init__(self):
        object.__setattr__(self, "source", Source(self.source))
        for v in (self.prb_occupancy_dl, self.prb_occupancy_ul):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"occupancy {v!r} outside [0, 1]")

    @property
    def occupancy(self) -> float:
        # one scalar drives both directions; take the busier one
        return max(self.prb_occupancy_dl, self.prb_occupancy_ul)


@dataclass(frozen=True)
class ReconfigEvent:
    timestamp: float
    sector_id: int
    from_split: Split
    to_split: Split
    moved_functions: tuple[tuple[BbFunction, Side, Side], ...]

    def __post_init__(self):
        if self.from_split is self.to_split:
            raise ValueError("a reconfiguration must change the split")

    @classmethod
    def between(cls, timestamp: float, sector_id: int, old: Split, new: Split) -> "ReconfigEvent":
        moved = tuple(placement_of(old).moved(placement_of(new)))
        return cls(timestamp, sector_id, old, new, moved)

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "sector_id": self.sector_id,
            "from_split": self.from_split.value,
            "to_split": self.to_split.value,
            "moved_functions": [
                {"function": f.value, "from": a.value, "to": b.value} for f, a, b in self.moved_functions
            ],
        }


@dataclass(frozen=True)
class Policy:
    hysteresis: float = 0.02
    method: str = "exhaustive"

    def __post_init__(self):
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be >= 0")
        if self.method not in SEARCH_METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class Decision:
    splits: tuple[Split, ...] | None
    reason: str
    loads: tuple[float, ...] = ()
    improvement: float = 0.0
    candidate: Solution | None = None

    @property
    def changed(self) -> bool:
        return self.splits is not None


def _mean(vals: list[float]) -> float:
    # constant windows must reproduce the reported value bit for bit
    if all(v == vals[0] for v in vals):
        return vals[0]
    return math.fsum(vals) / len(vals)


def window_loads(records: Iterable[PmCounterRecord], n_sectors: int) -> list[float] | None:
    """Mean O-DU occupancy per sector, or None if a sector has no O-DU record."""
    by_src: dict[Source, dict[int, list[float]]] = {}
    for r in records:
        by_src.setdefault(r.source, {}).setdefault(r.sector_id, []).append(r.occupancy)
    odu = by_src.get(Source.O_DU, {})
    missing = [s for s in range(n_sectors) if not odu.get(s)]
    if missing:
        log.warning("no O-DU counters for sectors %s in window; skipping decision", missing)
        return None
    loads = [_mean(odu[s]) for s in range(n_sectors)]
    for src, sectors in by_src.items():
        if src is Source.O_DU:
            continue
        for s, vals in sectors.items():
            if s < n_sectors and abs(_mean(vals) - loads[s]) > DIVERGENCE_TOL:
                log.info("sector %d: %s occupancy diverges from O-DU (%.3f vs %.3f)", s, src.value, _mean(vals), loads[s])
    return loads


def decide(
    counters: Sequence[PmCounterRecord],
    state: Sequence[Split] | None,
    site: Scenario,
    policy: Policy = Policy(),
) -> Decision:
    """Return a Decision whose ``splits`` is the new vector, or None to hold."""
    loads = window_loads(counters, site.n_sectors)
    if loads is None:
        return Decision(None, "missing-sector")
    kw = dict(objective=site.objective, link=site.link, overhead=site.fh_overhead, ops=site.ops)
    cand = SEARCH_METHODS[policy.method](site.cells, loads, **kw)
    loads_t = tuple(loads)
    if state is None:
        return Decision(cand.splits, "initial", loads_t, candidate=cand)
    state = tuple(state)
    if cand.splits == state:
        return Decision(None, "hold", loads_t, candidate=cand)
    current = evaluate(state, site.cells, loads, **kw)
    if not current.feasible:
        return Decision(cand.splits, "infeasible", loads_t, candidate=cand)
    if not cand.feasible:
        return Decision(None, "hold", loads_t, candidate=cand)
    cur = current.objective_value
    improvement = (cur - cand.objective_value) / cur if cur > 0 else 0.0
    # h = 0 follows the optimizer exactly, ties included
    if improvement > policy.hysteresis or (policy.hysteresis == 0 and improvement >= -1e-12):
        return Decision(cand.splits, "improvement", loads_t, improvement, cand)
    return Decision(None, "hold", loads_t, improvement, cand)


@dataclass
class ReplayResult:
    ticks: list[float] = field(default_factory=list)
    timeline: list[tuple[Split, ...] | None] = field(default_factory=list)
    decisions: list[Decision] = field(default_factory=list)
    events: list[ReconfigEvent] = field(default_factory=list)
    switch_count: int = 0


def replay_counters(
    records: Sequence[PmCounterRecord],
    site: Scenario,
    windows: Sequence[tuple[float, float]],
    policy: Policy = Policy(),
    initial: Sequence[Split] | None = None,
) -> ReplayResult:
    """Decide once per ``[start, end)`` window; the decision is stamped at ``end``."""
    last_seen: dict[Source, float] = {}
    for r in records:
        if r.timestamp < last_seen.get(r.source, -math.inf):
            raise ValueError(f"timestamps of {r.source.value} counters must be non-decreasing")
        last_seen[r.source] = r.timestamp
    for start, end in windows:
        if end - start < MIN_CADENCE_S:
            raise ValueError(f"decision cadence must be >= {MIN_CADENCE_S} s")

    out = ReplayResult()
    state = tuple(initial) if initial is not None else None
    for start, end in windows:
        window = [r for r in records if start <= r.timestamp < end]
        d = decide(window, state, site, policy)
        if d.changed:
            if state is not None:
                out.switch_count += 1
                out.events.extend(
                    ReconfigEvent.between(end, i, a, b) for i, (a, b) in enumerate(zip(state, d.splits)) if a is not b
                )
            state = d.splits
        out.ticks.append(end)
        out.timeline.append(state)
        out.decisions.append(d)
    return out


def _period_bounds(scenario: Scenario) -> list[tuple[float, float]]:
    bounds, t = [], 0.0
    for p in scenario.periods:
        if p.hours is not None:
            a, b = p.hours[0] * 3600.0, p.hours[1] * 3600.0
        else:
            a, b = t, t + 3600.0
        bounds.append((a, b))
        t = b
    return bounds


def synthesize_counters(scenario: Scenario, report_interval: float = 900.0) -> list[PmCounterRecord]:
    """PM counters reproducing each period's sector occupancy, O-DU and FH-switch views."""
    records = []
    for period, (a, b) in zip(scenario.periods, _period_bounds(scenario)):
        loads = scenario.occupancies(period)
        n_reports = max(1, math.ceil((b - a) / report_interval - 1e-9))
        for k in range(n_reports):
            t = a + k * report_interval
            for s, (cell, occ) in enumerate(zip(scenario.cells, loads)):
                info = sector_fh(Split.S6, cell, occ)
                volume = (info.dl_gbps + info.ul_gbps) * 1e9 * report_interval
                for src in (Source.O_DU, Source.FH_SWITCH):
                    records.append(PmCounterRecord(t, s, occ, occ, volume, src))
    return records


def replay(
    scenario: Scenario,
    cadence: float | None = None,
    hysteresis: float = 0.02,
    method: str = "exhaustive",
    report_interval: float = 900.0,
) -> ReplayResult:
    """Replay a scenario through the controller.

    ``cadence=None`` decides once per scenario period; otherwise decisions
    are taken every ``cadence`` seconds over the scenario span.
    """
    records = synthesize_counters(scenario, report_interval)
    bounds = _period_bounds(scenario)
    if cadence is None:
        windows = bounds
    else:
        if cadence < MIN_CADENCE_S:
            raise ValueError(f"decision cadence must be >= {MIN_CADENCE_S} s")
        t0, t1 = bounds[0][0], bounds[-1][1]
        n = math.floor((t1 - t0) / cadence + 1e-9)
        windows = [(t0 + k * cadence, t0 + (k + 1) * cadence) for k in range(n)]
    return replay_counters(records, scenario, windows, Policy(hysteresis, method))


def write_events(events: Iterable[ReconfigEvent], path: str | Path) -> None:
    with open(path, "w") as fh:
        for e in events:
            fh.write(json.dumps(e.to_dict()) + "\n")


def read_events(path: str | Path) -> list[ReconfigEvent]:
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        moved = tuple((BbFunction(m["function"]), Side(m["from"]), Side(m["to"])) for m in d["moved_functions"])
        out.append(ReconfigEvent(d["timestamp"], d["sector_id"], Split(d["from_split"]), Split(d["to_split"]), moved))
    return out


COUNTER_COLUMNS = ("timestamp", "sector_id", "prb_occupancy_dl", "prb_occupancy_ul", "traffic_volume", "source")


def read_counters_csv(path: str | Path) -> list[PmCounterRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(COUNTER_COLUMNS[:4]) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [
            PmCounterRecord(
                float(row["timestamp"]),
                int(row["sector_id"]),
                float(row["prb_occupancy_dl"]),
                float(row["prb_occupancy_ul"]),
                float(row.get("traffic_volume") or 0.0),
                Source(row.get("source") or "O-DU"),
            )
            for row in reader
        ]


def write_counters_csv(records: Iterable[PmCounterRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNTER_COLUMNS)
        for r in records:
            w.writerow([r.timestamp, r.sector_id, r.prb_occupancy_dl, r.prb_occupancy_ul, r.traffic_volume, r.source.value])
