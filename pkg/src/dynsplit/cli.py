"""Command line entry point.

Exit codes: 0 success, 1 validation mismatch, 2 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from .complexity import ALGORITHMS, DEFAULT_OPS, REFERENCE_OPS, OpCountTable, ops_per_execution
from .control import Policy, read_counters_csv, replay, replay_counters, write_events
from .fronthaul import FhLink, sector_fh
from .model import SPLITS, CellConfig, Direction, fh_boundary
from .optimizer import Objective
from .scenario import Scenario, ScenarioError, default_scenario, export, load_scenario, run

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2

# The reference table groups FFT and IFFT on one row.
_TABLE_ROWS = [
    ("FFT/IFFT", ("FFT_UL", "IFFT_DL")),
    ("UL channel estimation", ("UL_CHAN_EST",)),
    ("MIMO detection", ("MIMO_DETECT",)),
    ("DL channel estimation", ("DL_CHAN_EST",)),
    ("Precoding matrix computation", ("PRECODE_MATRIX",)),
    ("Precoding", ("PRECODE_APPLY",)),
    ("Demodulation", ("DEMODULATION",)),
    ("Channel coding", ("CHANNEL_CODING",)),
    ("Channel decoding", ("CHANNEL_DECODING",)),
]


class InputError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _scenario(args) -> Scenario:
    if args.scenario:
        try:
            sc = load_scenario(_read_json(args.scenario))
        except ScenarioError as exc:
            raise InputError(f"{args.scenario}: {exc}") from None
    else:
        sc = default_scenario()
    if getattr(args, "epsilon", None) is not None:
        sc = dataclasses.replace(sc, epsilon=Objective(args.epsilon).epsilon)
    if getattr(args, "capacity", None) is not None:
        sc = dataclasses.replace(sc, link=FhLink(args.capacity))
    if getattr(args, "ops", None):
        sc = dataclasses.replace(sc, ops=_ops_table(args.ops))
    return sc


def _ops_table(path: str) -> OpCountTable:
    try:
        return OpCountTable.from_dict(_read_json(path))
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{path}: schema error at {loc}: {exc.message}") from None


def cmd_validate(args) -> int:
    table = _ops_table(args.ops) if args.ops else DEFAULT_OPS
    cell = CellConfig()
    ok = True
    print(f"{'BB function':30s} {'algorithm':30s} {'model':>10s} {'reference':>10s}  match")
    for label, fids in _TABLE_ROWS:
        for fid in fids:
            value = ops_per_execution(fid, cell, table)
            ref = REFERENCE_OPS[fid]
            match = value == ref
            ok &= match
            name = label if len(fids) == 1 else f"{label} ({fid})"
            print(f"{name:30s} {ALGORITHMS[fid]:30s} {value:10.0f} {ref:10d}  {'ok' if match else 'MISMATCH'}")
    print()
    print(f"TDD duty: DL {cell.tdd.dl_duty:.6f} ({cell.tdd.dl_duty * 70:.0f}/70), "
          f"UL {cell.tdd.ul_duty:.6f} ({cell.tdd.ul_duty * 70:.0f}/70)")
    print()
    print(f"{'split':6s} {'DL boundary':26s} {'UL boundary':26s} {'DL@1 Gb/s':>10s} {'UL@1 Gb/s':>10s}")
    for s in SPLITS:
        d = sector_fh(s, cell, 1.0)
        print(f"{s.value:6s} {fh_boundary(s, Direction.DL).value:26s} {fh_boundary(s, Direction.UL).value:26s} "
              f"{d.dl_gbps:10.3f} {d.ul_gbps:10.3f}")
    print()
    print("all operation counts match" if ok else "operation count mismatch")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_run(args) -> int:
    sc = _scenario(args)
    result = run(sc, args.method, jobs=args.jobs)
    formats = ("csv", "json") if args.format == "both" else (args.format,)
    export(result, args.out, formats)
    n = sc.n_sectors
    print(f"method={args.method} epsilon={sc.epsilon:g} capacity={sc.link.capacity_gbps:g} Gb/s")
    print(f"{'period':10s} {'load':>5s}  {'splits':{4 * n + 2}s} {'GOPS':>9s} {'DL Gb/s':>8s} {'UL Gb/s':>8s}  feasible")
    for p in result.periods:
        splits = " ".join(f"{s.value:4s}" for s in p.splits)
        print(f"{p.label:10s} {p.aggregate_load:5.2f}  {splits:{4 * n + 2}s} {p.objective_gops:9.1f} "
              f"{p.fh_dl_gbps:8.2f} {p.fh_ul_gbps:8.2f}  {'yes' if p.feasible else 'NO'}")
    print(f"wrote {', '.join(formats)} results to {args.out}")
    return EXIT_OK


def _parse_values(args) -> list[float]:
    if args.values:
        vals = [float(v) for v in args.values.split(",") if v.strip()]
    elif args.range:
        try:
            start, stop, step = (float(x) for x in args.range.split(":"))
        except ValueError:
            raise InputError("--range must be START:STOP:STEP") from None
        if step <= 0:
            raise InputError("--range step must be positive")
        vals = list(np.round(np.arange(start, stop + step / 2, step), 12))
    else:
        vals = []
    if not vals:
        raise InputError("empty sweep range")
    return vals


SWEEP_HEADER = ["value", "objective_gops", *[f"n_{s.value}" for s in SPLITS], "feasible_periods", "infeasible_periods", "tie_count"]


def sweep_rows(sc: Scenario, param: str, values: Sequence[float], method: str = "exhaustive") -> list[list]:
    rows = []
    for v in values:
        if param == "epsilon":
            trial = dataclasses.replace(sc, epsilon=v)
        elif param == "capacity":
            trial = dataclasses.replace(sc, link=FhLink(v))
        elif param == "load_scale":
            if not 0 < v <= 1:
                raise InputError(f"load_scale {v} outside (0, 1]")
            trial = dataclasses.replace(sc, load_scale=v)
        else:
            raise InputError(f"unknown sweep parameter {param!r}")
        res = run(trial, method)
        hist = Counter(s for p in res.periods for s in p.splits)
        feas = sum(p.feasible for p in res.periods)
        rows.append(
            [v, sum(p.objective_gops for p in res.periods)]
            + [hist.get(s, 0) for s in SPLITS]
            + [feas, len(res.periods) - feas, sum(p.n_optimal for p in res.periods)]
        )
    return rows


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    rows = sweep_rows(sc, args.param, _parse_values(args), args.method)
    lines = [",".join(SWEEP_HEADER)]
    for r in rows:
        value = "inf" if math.isinf(r[0]) else f"{r[0]:g}"
        lines.append(",".join([value, f"{r[1]:.3f}", *(str(x) for x in r[2:])]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_replay(args) -> int:
    sc = _scenario(args)
    if args.counters:
        if args.cadence is None:
            raise InputError("--cadence is required with --counters")
        try:
            records = read_counters_csv(args.counters)
        except FileNotFoundError:
            raise InputError(f"{args.counters}: no such file") from None
        if not records:
            raise InputError(f"{args.counters}: no counter records")
        t0, t1 = records[0].timestamp, max(r.timestamp for r in records)
        n = max(1, math.ceil((t1 - t0) / args.cadence + 1e-9))
        windows = [(t0 + k * args.cadence, t0 + (k + 1) * args.cadence) for k in range(n)]
        res = replay_counters(records, sc, windows, Policy(args.hysteresis, args.method))
    else:
        res = replay(sc, args.cadence, args.hysteresis, args.method)
    for t, splits in zip(res.ticks, res.timeline):
        print(f"t={t:9.0f}s  {' '.join(s.value for s in splits) if splits else '-'}")
    print(f"switches={res.switch_count} events={len(res.events)}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_events(res.events, args.out)
    return EXIT_OK


def _capacity(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("capacity must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynsplit", description="Functional split selection for a disaggregated RAN site.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check operation counts against the reference table")
    v.add_argument("--ops", help="JSON file overriding per-function operation counts")
    v.set_defaults(func=cmd_validate)

    def common(sp):
        sp.add_argument("--scenario", help="scenario JSON (default: bundled daily scenario)")
        sp.add_argument("--method", choices=["exhaustive", "greedy"], default="exhaustive")
        sp.add_argument("--epsilon", type=float, help="BBL/BBH energy cost ratio (>= 1)")
        sp.add_argument("--capacity", type=_capacity, help="FH capacity per direction in Gb/s ('inf' allowed)")
        sp.add_argument("--ops", help="JSON file overriding per-function operation counts")

    r = sub.add_parser("run", help="optimize every period of a scenario and export results")
    common(r)
    r.add_argument("--out", default="results", help="output directory")
    r.add_argument("--format", choices=["csv", "json", "both"], default="both")
    r.add_argument("--jobs", type=int, default=1, help="periods evaluated concurrently")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep one parameter over a range")
    common(s)
    s.add_argument("--param", choices=["epsilon", "capacity", "load_scale"], required=True)
    s.add_argument("--values", help="comma separated values")
    s.add_argument("--range", help="START:STOP:STEP (inclusive)")
    s.add_argument("--out", help="CSV output file (default stdout)")
    s.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("replay", help="replay the closed-loop controller")
    common(rp)
    rp.add_argument("--hysteresis", type=float, default=0.02, help="relative improvement needed to switch")
    rp.add_argument("--cadence", type=float, help="seconds between decisions (default: once per period)")
    rp.add_argument("--counters", help="PM counter CSV to replay instead of the scenario loads")
    rp.add_argument("--out", help="write reconfiguration events as JSON lines")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
