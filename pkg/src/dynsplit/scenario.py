"""Daily traffic scenarios: loading, per-period optimization and export."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema

from . import __version__
from .complexity import DEFAULT_OPS, OpCountTable, granularity_hash, GRANULARITY
from .fronthaul import FhLink, sector_fh_peak
from .model import SPLITS, CellConfig, Split
from .optimizer import SEARCH_METHODS, Objective, Solution, fixed_split_eval, pct_diff

SHARE_TOL = 1e-9

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["periods"],
    "properties": {
        "description": {"type": "string"},
        "cells": {"type": "array", "minItems": 1, "items": {"type": "object"}},
        "link": {
            "type": "object",
            "properties": {"capacity_gbps": {"type": ["number", "null"], "minimum": 0}},
            "additionalProperties": False,
        },
        "epsilon": {"type": "number", "minimum": 1},
        "load_scale": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "fh_overhead": {"type": "number", "exclusiveMinimum": 0},
        "fixed_splits": {"type": "array", "items": {"type": "string"}},
        "periods": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "aggregate_load", "sector_shares"],
                "properties": {
                    "label": {"type": "string"},
                    "hours": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "aggregate_load": {"type": "number", "minimum": 0, "maximum": 1},
                    "sector_shares": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """Invalid scenario document; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path


def _path(parts: Sequence[Any]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


@dataclass(frozen=True)
class Period:
    label: str
    aggregate_load: float
    sector_shares: tuple[float, ...]
    hours: tuple[float, float] | None = None

    @property
    def duration_h(self) -> float | None:
        return None if self.hours is None else self.hours[1] - self.hours[0]


@dataclass(frozen=True)
class Scenario:
    cells: tuple[CellConfig, ...]
    periods: tuple[Period, ...]
    link: FhLink = FhLink()
    epsilon: float = 2.0
    load_scale: float = 1.0
    fh_overhead: float = 1.0
    fixed_splits: tuple[Split, ...] = SPLITS
    description: str = ""
    ops: OpCountTable = field(default=DEFAULT_OPS, compare=False)

    @property
    def n_sectors(self) -> int:
        return len(self.cells)

    @property
    def objective(self) -> Objective:
        return Objective(self.epsilon)

    def occupancies(self, period: Period) -> list[float]:
        """share * aggregate * S * load_scale, clamped to [0, 1]."""
        n = self.n_sectors
        return [min(1.0, max(0.0, period.aggregate_load * sh * n * self.load_scale)) for sh in period.sector_shares]


def load_scenario(document: Mapping[str, Any] | str | Path) -> Scenario:
    """Validate a scenario document (mapping, JSON text, or file path)."""
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        document = json.loads(Path(document).read_text())
    elif isinstance(document, str):
        document = json.loads(document)
    try:
        jsonschema.validate(document, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(_path(exc.absolute_path), exc.message) from None

    cell_docs = document.get("cells", [{}])
    cells = []
    for i, cdoc in enumerate(cell_docs):
        try:
            cells.append(CellConfig.from_dict(cdoc))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"cells[{i}]", str(exc)) from None
    periods = []
    for i, pdoc in enumerate(document["periods"]):
        where = f"periods[{i}]"
        shares = tuple(float(s) for s in pdoc["sector_shares"])
        if len(shares) != len(cells):
            raise ScenarioError(f"{where}.sector_shares", f"expected {len(cells)} shares, got {len(shares)}")
        if abs(sum(shares) - 1.0) > SHARE_TOL:
            raise ScenarioError(f"{where}.sector_shares", f"shares sum to {sum(shares):.6g}, expected 1")
        hours = pdoc.get("hours")
        if hours is not None and not hours[1] > hours[0]:
            raise ScenarioError(f"{where}.hours", "end must be after start")
        periods.append(
            Period(pdoc["label"], float(pdoc["aggregate_load"]), shares, tuple(hours) if hours else None)
        )
    fixed = []
    for i, name in enumerate(document.get("fixed_splits", [s.value for s in SPLITS])):
        try:
            fixed.append(Split.parse(name))
        except ValueError as exc:
            raise ScenarioError(f"fixed_splits[{i}]", str(exc)) from None
    cap = document.get("link", {}).get("capacity_gbps", 40.0)
    return Scenario(
        cells=tuple(cells),
        periods=tuple(periods),
        link=FhLink(math.inf if cap is None else float(cap)),
        epsilon=float(document.get("epsilon", 2.0)),
        load_scale=float(document.get("load_scale", 1.0)),
        fh_overhead=float(document.get("fh_overhead", 1.0)),
        fixed_splits=tuple(fixed),
        description=document.get("description", ""),
    )


def default_scenario_text() -> str:
    return resources.files("dynsplit").joinpath("data/default_scenario.json").read_text()


def default_scenario() -> Scenario:
    return load_scenario(json.loads(default_scenario_text()))


@dataclass(frozen=True)
class FixedResult:
    objective_gops: float
    fh_dl_gbps: float
    fh_ul_gbps: float
    feasible: bool
    pct_diff: float | None


@dataclass(frozen=True)
class PeriodResult:
    label: str
    hours: tuple[float, float] | None
    aggregate_load: float
    occupancies: tuple[float, ...]
    splits: tuple[Split, ...]
    objective_gops: float
    bbh_gops: float
    bbl_gops: float
    fh_dl_gbps: float
    fh_ul_gbps: float
    fh_peak_dl_gbps: float
    fh_peak_ul_gbps: float
    feasible: bool
    n_optimal: int
    optimal_set: tuple[tuple[Split, ...], ...]
    fixed: Mapping[Split, FixedResult]

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "hours": list(self.hours) if self.hours else None,
            "aggregate_load": self.aggregate_load,
            "occupancies": list(self.occupancies),
            "splits": [s.value for s in self.splits],
            "objective_gops": self.objective_gops,
            "bbh_gops": self.bbh_gops,
            "bbl_gops": self.bbl_gops,
            "fh_dl_gbps": self.fh_dl_gbps,
            "fh_ul_gbps": self.fh_ul_gbps,
            "fh_peak_dl_gbps": self.fh_peak_dl_gbps,
            "fh_peak_ul_gbps": self.fh_peak_ul_gbps,
            "feasible": self.feasible,
            "n_optimal": self.n_optimal,
            "optimal_set": [[s.value for s in x] for x in self.optimal_set],
            "fixed": {
                s.value: {
                    "objective_gops": r.objective_gops,
                    "fh_dl_gbps": r.fh_dl_gbps,
                    "fh_ul_gbps": r.fh_ul_gbps,
                    "feasible": r.feasible,
                    "pct_diff": r.pct_diff,
                }
                for s, r in self.fixed.items()
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PeriodResult":
        return cls(
            label=d["label"],
            hours=tuple(d["hours"]) if d["hours"] else None,
            aggregate_load=d["aggregate_load"],
            occupancies=tuple(d["occupancies"]),
            splits=tuple(Split(s) for s in d["splits"]),
            objective_gops=d["objective_gops"],
            bbh_gops=d["bbh_gops"],
            bbl_gops=d["bbl_gops"],
            fh_dl_gbps=d["fh_dl_gbps"],
            fh_ul_gbps=d["fh_ul_gbps"],
            fh_peak_dl_gbps=d["fh_peak_dl_gbps"],
            fh_peak_ul_gbps=d["fh_peak_ul_gbps"],
            feasible=d["feasible"],
            n_optimal=d["n_optimal"],
            optimal_set=tuple(tuple(Split(s) for s in x) for x in d["optimal_set"]),
            fixed={Split(k): FixedResult(**v) for k, v in d["fixed"].items()},
        )


@dataclass(frozen=True)
class ScenarioResult:
    periods: tuple[PeriodResult, ...]
    metadata: Mapping[str, Any]

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.periods]

    def series(self, attr: str) -> list[Any]:
        return [getattr(p, attr) for p in self.periods]

    def to_dict(self) -> dict[str, Any]:
        return {"metadata": dict(self.metadata), "periods": [p.to_dict() for p in self.periods]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioResult":
        return cls(tuple(PeriodResult.from_dict(p) for p in d["periods"]), d["metadata"])


def _metadata(scenario: Scenario, method: str) -> dict[str, Any]:
    cap = scenario.link.capacity_gbps
    tdd = scenario.cells[0].tdd
    return {
        "package_version": __version__,
        "method": method,
        "epsilon": scenario.epsilon,
        "capacity_gbps": None if math.isinf(cap) else cap,
        "load_scale": scenario.load_scale,
        "fh_overhead": scenario.fh_overhead,
        "n_sectors": scenario.n_sectors,
        "n_iq_convention": "bits per complex sample (I and Q together)",
        "fh_rate_convention": "time-averaged over the TDD period; fh_peak_* are instantaneous",
        "occupancy_convention": "aggregate_load * share * n_sectors * load_scale, clamped to [0, 1]",
        "dl_duty": tdd.dl_duty,
        "ul_duty": tdd.ul_duty,
        "granularity_hash": granularity_hash(),
        "granularity": {f.value: [unit, d.value] for f, (unit, d) in GRANULARITY.items()},
        "op_counts": scenario.ops.to_dict()["functions"],
        "cost_units": "GOPS",
        "rate_units": "Gb/s",
        "description": scenario.description,
    }


def _run_period(scenario: Scenario, period: Period, method: str) -> PeriodResult:
    search = SEARCH_METHODS[method]
    cells, loads = scenario.cells, scenario.occupancies(period)
    kw = dict(objective=scenario.objective, link=scenario.link, overhead=scenario.fh_overhead, ops=scenario.ops)
    opt: Solution = search(cells, loads, **kw)
    fixed = {}
    for split in scenario.fixed_splits:
        sol = fixed_split_eval(split, cells, loads, **kw)
        pd = pct_diff(sol, opt) if opt.objective_value > 0 and sol.feasible else None
        if method == "exhaustive" and opt.feasible and sol.feasible:
            if sol.objective_value < opt.objective_value * (1 - 1e-9):
                raise RuntimeError(f"{period.label}: fixed {split.value} beats the exhaustive optimum")
        fixed[split] = FixedResult(sol.objective_value, sol.fh.dl_gbps, sol.fh.ul_gbps, sol.feasible, pd)
    peak_dl = peak_ul = 0.0
    for s, c, l in zip(opt.splits, cells, loads):
        p = sector_fh_peak(s, c, l, scenario.fh_overhead)
        peak_dl += p.dl_gbps
        peak_ul += p.ul_gbps
    return PeriodResult(
        label=period.label,
        hours=period.hours,
        aggregate_load=period.aggregate_load,
        occupancies=tuple(loads),
        splits=opt.splits,
        objective_gops=opt.objective_value,
        bbh_gops=opt.bbh_gops,
        bbl_gops=opt.bbl_gops,
        fh_dl_gbps=opt.fh.dl_gbps,
        fh_ul_gbps=opt.fh.ul_gbps,
        fh_peak_dl_gbps=peak_dl,
        fh_peak_ul_gbps=peak_ul,
        feasible=opt.feasible,
        n_optimal=opt.n_optimal,
        optimal_set=opt.optimal_set,
        fixed=fixed,
    )


def run(scenario: Scenario, method: str = "exhaustive", jobs: int = 1) -> ScenarioResult:
    if method not in SEARCH_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(SEARCH_METHODS)}")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            periods = list(pool.map(lambda p: _run_period(scenario, p, method), scenario.periods))
    else:
        periods = [_run_period(scenario, p, method) for p in scenario.periods]
    return ScenarioResult(tuple(periods), _metadata(scenario, method))


# -- export -----------------------------------------------------------------

CSV_FILES = ("splits.csv", "objective.csv", "fh_dl.csv", "fh_ul.csv", "pct_diff.csv")


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.3f}"


def _csv_text(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def csv_tables(result: ScenarioResult) -> dict[str, str]:
    """Render the five per-period CSV tables keyed by file name."""
    periods = result.periods
    n = len(periods[0].splits) if periods else 0
    fixed = list(periods[0].fixed) if periods else []
    cap = result.metadata.get("capacity_gbps")
    tables = {}
    tables["splits.csv"] = _csv_text(
        ["period", "aggregate_load"] + [f"sector_{i}" for i in range(n)] + ["feasible", "n_optimal"],
        [
            [p.label, f"{p.aggregate_load:.3f}"] + [s.value for s in p.splits] + [int(p.feasible), p.n_optimal]
            for p in periods
        ],
    )
    tables["objective.csv"] = _csv_text(
        ["period", "aggregate_load", "optimum_gops", "bbh_gops", "bbl_gops"] + [f"fixed_{s.value}_gops" for s in fixed],
        [
            [p.label, f"{p.aggregate_load:.3f}", _fmt(p.objective_gops), _fmt(p.bbh_gops), _fmt(p.bbl_gops)]
            + [_fmt(p.fixed[s].objective_gops) for s in fixed]
            for p in periods
        ],
    )
    for name, attr, peak in (("fh_dl.csv", "fh_dl_gbps", "fh_peak_dl_gbps"), ("fh_ul.csv", "fh_ul_gbps", "fh_peak_ul_gbps")):
        tables[name] = _csv_text(
            ["period", "capacity_gbps", "optimum_gbps", "optimum_peak_gbps"] + [f"fixed_{s.value}_gbps" for s in fixed],
            [
                [p.label, _fmt(cap) if cap is not None else "inf", _fmt(getattr(p, attr)), _fmt(getattr(p, peak))]
                + [_fmt(getattr(p.fixed[s], attr)) for s in fixed]
                for p in periods
            ],
        )
    tables["pct_diff.csv"] = _csv_text(
        ["period"] + [f"fixed_{s.value}_pct" for s in fixed],
        [[p.label] + [_fmt(p.fixed[s].pct_diff) for s in fixed] for p in periods],
    )
    return tables


def result_json(result: ScenarioResult) -> str:
    return json.dumps(result.to_dict(), indent=2) + "\n"


def export(result: ScenarioResult, out_dir: str | Path, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        if "csv" in formats:
            files.update(csv_tables(result))
        if "json" in formats:
            files["result.json"] = result_json(result)
        for name, text in files.items():
            path = out / name
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results to {exc.filename or out}: {exc.strerror}") from exc
    return written


def load_result(path: str | Path) -> ScenarioResult:
    return ScenarioResult.from_dict(json.loads(Path(path).read_text()))
