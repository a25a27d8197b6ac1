"""Baseband compute cost (GOPS) per function and per side.

Per-execution operation counts are anchored at the reference cell and scaled
to other cells by a per-function law. Execution rates follow the granularity
table below; every function only runs on occupied resources, so cost is
linear in occupancy with zero intercept.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import jsonschema

from .model import (
    SYMBOLS_PER_SLOT,
    BbFunction,
    CellConfig,
    Direction,
    LoadPoint,
    Side,
    Split,
    placement_of,
)

F = BbFunction

# Reference operation counts per execution at the default cell.
REFERENCE_OPS: dict[BbFunction, int] = {
    F.IFFT_DL: 49152,
    F.FFT_UL: 49152,
    F.UL_CHAN_EST: 297984,
    F.MIMO_DETECT: 640,
    F.DL_CHAN_EST: 727072,
    F.PRECODE_MATRIX: 151808,
    F.PRECODE_APPLY: 4096,
    F.DEMODULATION: 838,
    F.CHANNEL_CODING: 12952,
    F.CHANNEL_DECODING: 181128,
}

ALGORITHMS: dict[BbFunction, str] = {
    F.IFFT_DL: "Radix-4 IFFT",
    F.FFT_UL: "Radix-4 FFT",
    F.UL_CHAN_EST: "Beamspace local LMMSE",
    F.MIMO_DETECT: "Beamspace local LMMSE",
    F.DL_CHAN_EST: "Beamspace channel estimation",
    F.PRECODE_MATRIX: "Zero forcing",
    F.PRECODE_APPLY: "Matrix multiplication",
    F.DEMODULATION: "Maximum likelihood",
    F.CHANNEL_CODING: "Richardson-Urbanke",
    F.CHANNEL_DECODING: "Flooding",
}

SCALING_VARIABLES = (
    "n_fft", "n_ant_bs", "n_layers", "n_prb", "l_srs", "l_dmrs", "constellation", "n_coded", "i_max",
)

_DEFAULT_EXPONENTS: dict[BbFunction, dict[str, float]] = {
    F.UL_CHAN_EST: {"n_ant_bs": 1, "n_layers": 1, "l_dmrs": 1},
    F.MIMO_DETECT: {"n_ant_bs": 1, "n_layers": 1},
    F.DL_CHAN_EST: {"n_ant_bs": 1, "n_layers": 1, "l_srs": 1},
    F.PRECODE_MATRIX: {"n_ant_bs": 1, "n_layers": 2},
    F.PRECODE_APPLY: {"n_ant_bs": 1, "n_layers": 1},
    F.DEMODULATION: {"constellation": 1},
    F.CHANNEL_CODING: {"n_coded": 1},
    F.CHANNEL_DECODING: {"n_coded": 1},
}

# Execution granularity: (unit, direction whose TDD duty scales the rate).
# Units per slot at full load:
#   antenna_symbol  B * 14          re        12 * N_PRB * 14
#   prb             N_PRB           re_layer  12 * N_PRB * 14 * U
#   code_block      U * 12 * N_PRB * 14 * m / n_coded
GRANULARITY: dict[BbFunction, tuple[str, Direction]] = {
    F.IFFT_DL: ("antenna_symbol", Direction.DL),
    F.FFT_UL: ("antenna_symbol", Direction.UL),
    F.UL_CHAN_EST: ("prb", Direction.UL),
    F.DL_CHAN_EST: ("prb", Direction.UL),  # SRS-based, received on UL
    F.MIMO_DETECT: ("re", Direction.UL),
    F.PRECODE_APPLY: ("re", Direction.DL),
    F.PRECODE_MATRIX: ("prb", Direction.DL),
    F.DEMODULATION: ("re_layer", Direction.UL),
    F.CHANNEL_CODING: ("code_block", Direction.DL),
    F.CHANNEL_DECODING: ("code_block", Direction.UL),
}


def granularity_hash() -> str:
    doc = {f.value: [unit, d.value] for f, (unit, d) in GRANULARITY.items()}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _scaling_vars(cell: CellConfig) -> dict[str, float]:
    return {
        "n_fft": cell.n_fft,
        "n_ant_bs": cell.n_ant_bs,
        "n_layers": cell.n_layers,
        "n_prb": cell.n_prb,
        "l_srs": cell.l_srs,
        "l_dmrs": cell.l_dmrs,
        "constellation": 2 ** cell.mod_order,
        "n_coded": cell.ldpc.n_coded,
        "i_max": cell.ldpc.i_max,
    }


def _radix4_butterflies(n: float) -> float:
    return n / 4 * math.log(n, 4)


@dataclass(frozen=True)
class OpEntry:
    ops: float
    law: str = "power"  # "power" or "radix4"
    exponents: Mapping[str, float] = field(default_factory=dict)
    algorithm: str = ""


@dataclass(frozen=True)
class OpCountTable:
    """Per-execution operation counts anchored at a reference cell."""

    entries: Mapping[BbFunction, OpEntry]
    reference: CellConfig = field(default_factory=CellConfig)

    @classmethod
    def default(cls) -> "OpCountTable":
        entries = {}
        for f, ops in REFERENCE_OPS.items():
            law = "radix4" if f in (F.IFFT_DL, F.FFT_UL) else "power"
            entries[f] = OpEntry(ops, law, _DEFAULT_EXPONENTS.get(f, {}), ALGORITHMS[f])
        return cls(entries)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "OpCountTable":
        """Apply overrides on top of the defaults.

        Accepted form: ``{"functions": {"FFT_UL": 1, "DEMODULATION": {"ops": 900,
        "exponents": {"constellation": 1}}}}``.
        """
        jsonschema.validate(doc, OP_TABLE_SCHEMA)
        entries = dict(cls.default().entries)
        for name, entry in doc.get("functions", {}).items():
            f = BbFunction(name)
            base = entries[f]
            if not isinstance(entry, dict):
                entry = {"ops": entry}
            entries[f] = OpEntry(
                float(entry.get("ops", base.ops)),
                entry.get("law", base.law),
                dict(entry.get("exponents", base.exponents)),
                base.algorithm,
            )
        return cls(entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "functions": {
                f.value: {"ops": e.ops, "law": e.law, "exponents": dict(sorted(e.exponents.items()))}
                for f, e in self.entries.items()
            }
        }


_number = {"type": "number", "minimum": 0}
OP_TABLE_SCHEMA = {
    "type": "object",
    "properties": {
        "functions": {
            "type": "object",
            "propertyNames": {"enum": [f.value for f in BbFunction]},
            "additionalProperties": {
                "oneOf": [
                    _number,
                    {
                        "type": "object",
                        "properties": {
                            "ops": _number,
                            "law": {"enum": ["power", "radix4"]},
                            "exponents": {
                                "type": "object",
                                "propertyNames": {"enum": list(SCALING_VARIABLES)},
                                "additionalProperties": {"type": "number"},
                            },
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        }
    },
    "additionalProperties": False,
}

DEFAULT_OPS = OpCountTable.default()


def ops_per_execution(f: BbFunction, cell: CellConfig, table: OpCountTable = DEFAULT_OPS) -> float:
    try:
        entry = table.entries[BbFunction(f)]
    except (KeyError, ValueError):
        raise ValueError(f"unsupported BB function {f!r}") from None
    if entry.law == "radix4":
        return entry.ops * (_radix4_butterflies(cell.n_fft) / _radix4_butterflies(table.reference.n_fft))
    cur, ref = _scaling_vars(cell), _scaling_vars(table.reference)
    scale = 1.0
    for var, exp in entry.exponents.items():
        if cur[var] != ref[var]:
            scale *= (cur[var] / ref[var]) ** exp
    return entry.ops * scale


def granularity_count(f: BbFunction, cell: CellConfig) -> float:
    """Executions per slot at full occupancy, before TDD duty scaling."""
    unit, _ = GRANULARITY[f]
    re_per_slot = cell.n_subcarriers * SYMBOLS_PER_SLOT
    if unit == "antenna_symbol":
        return cell.n_ant_bs * SYMBOLS_PER_SLOT
    if unit == "prb":
        return cell.n_prb
    if unit == "re":
        return re_per_slot
    if unit == "re_layer":
        return re_per_slot * cell.n_layers
    if unit == "code_block":
        return re_per_slot * cell.n_layers * cell.mod_order / cell.ldpc.n_coded
    raise AssertionError(unit)


def executions_per_second(f: BbFunction, cell: CellConfig, load: LoadPoint | float) -> float:
    occ = load.occupancy if isinstance(load, LoadPoint) else float(load)
    _, duty_dir = GRANULARITY[BbFunction(f)]
    return granularity_count(f, cell) * occ * cell.tdd.duty(duty_dir) / cell.t_slot_s


@dataclass(frozen=True)
class CostBreakdown:
    split: Split
    per_function: Mapping[BbFunction, float]
    bbh_gops: float
    bbl_gops: float
    sector_id: int = 0

    @property
    def total_gops(self) -> float:
        return self.bbh_gops + self.bbl_gops

    def to_dict(self) -> dict[str, Any]:
        return {
            "sector_id": self.sector_id,
            "split": self.split.value,
            "bbh_gops": self.bbh_gops,
            "bbl_gops": self.bbl_gops,
            "per_function": {f.value: g for f, g in self.per_function.items()},
        }


def function_gops(cell: CellConfig, load: LoadPoint | float, table: OpCountTable = DEFAULT_OPS) -> dict[BbFunction, float]:
    return {f: ops_per_execution(f, cell, table) * executions_per_second(f, cell, load) / 1e9 for f in BbFunction}


def sector_cost(split: Split, cell: CellConfig, load: LoadPoint | float, table: OpCountTable = DEFAULT_OPS) -> CostBreakdown:
    per_fn = function_gops(cell, load, table)
    place = placement_of(split)
    bbh = sum(g for f, g in per_fn.items() if place[f] is Side.BBH)
    bbl = sum(g for f, g in per_fn.items() if place[f] is Side.BBL)
    sector = load.sector_id if isinstance(load, LoadPoint) else 0
    return CostBreakdown(split, per_fn, bbh, bbl, sector)
