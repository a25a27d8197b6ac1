"""Cells, splits and the PHY function chain.

Each split is a cut depth into the PHY chain measured from the antenna side:
every stage before the cut runs at the BBL (far edge), every stage after it at
the BBH (central site). Placement and fronthaul payload kind are both read off
the same cut, so they cannot disagree.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

# LDPC base-graph info bits per code block used for the default block length.
LDPC_INFO_BITS = 8424
SYMBOLS_PER_SLOT = 14


class Side(str, enum.Enum):
    BBH = "BBH"
    BBL = "BBL"


class Direction(str, enum.Enum):
    DL = "DL"
    UL = "UL"


class Split(str, enum.Enum):
    """Candidate low-layer splits, most centralized first."""

    S8 = "S8"
    S7A = "S7a"
    S7B = "S7b"
    S7C = "S7c"
    S7D = "S7d"
    S6 = "S6"

    @property
    def depth(self) -> int:
        """Number of chain stages hosted at the BBL."""
        return _SPLIT_ORDER.index(self)

    @classmethod
    def parse(cls, name: str) -> "Split":
        key = name.strip()
        for s in cls:
            if key.lower() in (s.value.lower(), s.name.lower(), s.value[1:].lower()):
                return s
        raise ValueError(f"unknown split {name!r}; expected one of {[s.value for s in cls]}")

    def more_centralized_than(self, other: "Split") -> bool:
        return self.depth < other.depth


_SPLIT_ORDER = list(Split)
SPLITS: tuple[Split, ...] = tuple(_SPLIT_ORDER)


class BbFunction(str, enum.Enum):
    IFFT_DL = "IFFT_DL"
    FFT_UL = "FFT_UL"
    UL_CHAN_EST = "UL_CHAN_EST"
    MIMO_DETECT = "MIMO_DETECT"
    DL_CHAN_EST = "DL_CHAN_EST"
    PRECODE_MATRIX = "PRECODE_MATRIX"
    PRECODE_APPLY = "PRECODE_APPLY"
    DEMODULATION = "DEMODULATION"
    CHANNEL_CODING = "CHANNEL_CODING"
    CHANNEL_DECODING = "CHANNEL_DECODING"

    @property
    def direction(self) -> Direction:
        return _FUNCTION_DIRECTION[self]

    @property
    def chain_position(self) -> int:
        """Stage index within its direction's chain, counted from the antenna."""
        for i, (funcs, _) in enumerate(CHAINS[self.direction]):
            if self in funcs:
                return i
        raise AssertionError(self)


class BoundaryKind(str, enum.Enum):
    TIME_IQ = "TIME_IQ"
    FREQ_IQ_FULLGRID_PER_ANT = "FREQ_IQ_FULLGRID_PER_ANT"
    FREQ_IQ_OCC_PER_ANT = "FREQ_IQ_OCC_PER_ANT"
    FREQ_IQ_OCC_PER_LAYER = "FREQ_IQ_OCC_PER_LAYER"
    CODED_BITS = "CODED_BITS"
    SOFTBITS = "SOFTBITS"
    INFO_BITS = "INFO_BITS"


F = BbFunction
# Stages from the antenna side: (functions in the stage, payload crossing the
# link when the cut sits right after this stage). Resource (de)mapping and DL
# modulation are zero-cost stages and carry no BbFunction.
CHAINS: dict[Direction, tuple[tuple[frozenset[BbFunction], BoundaryKind], ...]] = {
    Direction.DL: (
        (frozenset({F.IFFT_DL}), BoundaryKind.FREQ_IQ_FULLGRID_PER_ANT),
        (frozenset(), BoundaryKind.FREQ_IQ_OCC_PER_ANT),
        (frozenset({F.DL_CHAN_EST, F.PRECODE_MATRIX, F.PRECODE_APPLY}), BoundaryKind.FREQ_IQ_OCC_PER_LAYER),
        (frozenset(), BoundaryKind.CODED_BITS),
        (frozenset({F.CHANNEL_CODING}), BoundaryKind.INFO_BITS),
    ),
    Direction.UL: (
        (frozenset({F.FFT_UL}), BoundaryKind.FREQ_IQ_FULLGRID_PER_ANT),
        (frozenset(), BoundaryKind.FREQ_IQ_OCC_PER_ANT),
        (frozenset({F.UL_CHAN_EST, F.MIMO_DETECT}), BoundaryKind.FREQ_IQ_OCC_PER_LAYER),
        (frozenset({F.DEMODULATION}), BoundaryKind.SOFTBITS),
        (frozenset({F.CHANNEL_DECODING}), BoundaryKind.INFO_BITS),
    ),
}
del F

_FUNCTION_DIRECTION = {
    f: d for d, stages in CHAINS.items() for funcs, _ in stages for f in funcs
}


@dataclass(frozen=True)
class Placement:
    """Side hosting each BbFunction under one split."""

    sides: Mapping[BbFunction, Side]

    def __getitem__(self, f: BbFunction) -> Side:
        return self.sides[f]

    def at(self, side: Side) -> frozenset[BbFunction]:
        return frozenset(f for f, s in self.sides.items() if s is side)

    def moved(self, other: "Placement") -> list[tuple[BbFunction, Side, Side]]:
        """Functions hosted differently in ``other``: (function, from, to)."""
        return [
            (f, self.sides[f], other.sides[f])
            for f in BbFunction
            if self.sides[f] is not other.sides[f]
        ]


def placement_of(split: Split) -> Placement:
    depth = split.depth
    sides: dict[BbFunction, Side] = {}
    for stages in CHAINS.values():
        for i, (funcs, _) in enumerate(stages):
            for f in funcs:
                sides[f] = Side.BBL if i < depth else Side.BBH
    return Placement({f: sides[f] for f in BbFunction})


def fh_boundary(split: Split, direction: Direction) -> BoundaryKind:
    depth = split.depth
    if depth == 0:
        return BoundaryKind.TIME_IQ
    return CHAINS[Direction(direction)][depth - 1][1]


@dataclass(frozen=True)
class TddPattern:
    dl_slots: int = 3
    special_dl_syms: int = 10
    special_guard_syms: int = 2
    special_ul_syms: int = 2
    ul_slots: int = 1

    def __post_init__(self):
        counts = dataclasses.astuple(self)
        if any(c < 0 for c in counts):
            raise ValueError("TDD symbol/slot counts must be non-negative")
        if self.special_dl_syms + self.special_guard_syms + self.special_ul_syms != SYMBOLS_PER_SLOT:
            raise ValueError("special slot symbols must add up to 14")

    @property
    def period_slots(self) -> int:
        return self.dl_slots + 1 + self.ul_slots

    @property
    def period_symbols(self) -> int:
        return SYMBOLS_PER_SLOT * self.period_slots

    @property
    def dl_duty(self) -> float:
        return (SYMBOLS_PER_SLOT * self.dl_slots + self.special_dl_syms) / self.period_symbols

    @property
    def ul_duty(self) -> float:
        return (SYMBOLS_PER_SLOT * self.ul_slots + self.special_ul_syms) / self.period_symbols

    def duty(self, direction: Direction) -> float:
        return self.dl_duty if Direction(direction) is Direction.DL else self.ul_duty

    def symbol_directions(self) -> list[str]:
        """Per-symbol labels ('D', 'G', 'U') over one TDD period."""
        out = ["D"] * (SYMBOLS_PER_SLOT * self.dl_slots)
        out += ["D"] * self.special_dl_syms + ["G"] * self.special_guard_syms + ["U"] * self.special_ul_syms
        out += ["U"] * (SYMBOLS_PER_SLOT * self.ul_slots)
        return out


@dataclass(frozen=True)
class LdpcParams:
    bler: float = 0.1
    i_max: int = 10
    d_c: int = 2
    n_coded: int | None = None
    d_s: float = 0.699
    e_bits: int = 4528

    def __post_init__(self):
        if not 0 < self.bler < 1:
            raise ValueError("bler must lie in (0, 1)")
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")


def _rational(value: Any) -> float:
    if isinstance(value, str):
        return float(Fraction(value.replace(" ", "")))
    return float(value)


@dataclass(frozen=True)
class CellConfig:
    """One NR cell. Defaults are the reference massive-MIMO TDD cell.

    Units: carrier_freq GHz, scs kHz, t_slot ms, t_sym us. ``n_iq`` counts bits
    per complex (I+Q) sample.
    """

    carrier_freq: float = 3.5
    scs: float = 30.0
    n_prb: int = 273
    t_slot: float = 0.5
    t_sym: float | None = None
    n_fft: int = 4096
    n_cp: int | None = None
    n_ant_bs: int = 64
    n_layers: int = 16
    l_srs: int = 12
    l_dmrs: int = 8
    mod_order: int = 6
    code_rate: float = 666 / 1024
    tdd: TddPattern = field(default_factory=TddPattern)
    n_iq: int = 32
    n_soft: int = 8
    ldpc: LdpcParams = field(default_factory=LdpcParams)

    def __post_init__(self):
        object.__setattr__(self, "code_rate", _rational(self.code_rate))
        if self.t_sym is None:
            object.__setattr__(self, "t_sym", self.t_slot * 1e3 / SYMBOLS_PER_SLOT)
        if self.n_cp is None:
            object.__setattr__(self, "n_cp", self.n_fft // SYMBOLS_PER_SLOT)
        if self.ldpc.n_coded is None:
            object.__setattr__(
                self, "ldpc", dataclasses.replace(self.ldpc, n_coded=round(LDPC_INFO_BITS / self.code_rate))
            )
        self._check()

    def _check(self):
        if self.t_slot <= 0 or self.n_prb <= 0 or self.n_fft <= 0:
            raise ValueError("t_slot, n_prb and n_fft must be positive")
        if abs(self.t_sym - self.t_slot * 1e3 / SYMBOLS_PER_SLOT) > 1e-3 * self.t_sym:
            raise ValueError("t_sym must equal t_slot/14 within 0.1%")
        if abs(self.n_cp - self.n_fft / SYMBOLS_PER_SLOT) >= 1:
            raise ValueError("n_cp must be n_fft/14 rounded to an integer")
        if self.n_fft < 12 * self.n_prb:
            raise ValueError("occupied subcarriers (12*n_prb) exceed n_fft")
        if not 1 <= self.n_layers <= self.n_ant_bs:
            raise ValueError("need 1 <= n_layers <= n_ant_bs")
        if not 0 < self.code_rate < 1:
            raise ValueError("code_rate must lie in (0, 1)")
        if self.mod_order not in (2, 4, 6, 8):
            raise ValueError("mod_order must be one of 2, 4, 6, 8")
        if self.l_srs <= 0 or self.l_dmrs <= 0 or self.n_iq <= 0 or self.n_soft <= 0:
            raise ValueError("sequence lengths and bit widths must be positive")
        if self.ldpc.n_coded != round(LDPC_INFO_BITS / self.code_rate):
            raise ValueError("ldpc.n_coded must equal round(8424 / code_rate)")

    @property
    def n_subcarriers(self) -> int:
        return 12 * self.n_prb

    @property
    def t_slot_s(self) -> float:
        return self.t_slot * 1e-3

    @property
    def t_sym_s(self) -> float:
        return self.t_sym * 1e-6

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "CellConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown CellConfig fields: {sorted(unknown)}")
        kw = dict(doc)
        if "tdd" in kw:
            kw["tdd"] = TddPattern(**kw["tdd"])
        if "ldpc" in kw:
            kw["ldpc"] = LdpcParams(**kw["ldpc"])
        return cls(**kw)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def validate_occupancy(occupancy: float) -> float:
    occ = float(occupancy)
    if not (0.0 <= occ <= 1.0) or math.isnan(occ):
        raise ValueError(f"occupancy {occupancy!r} outside [0, 1]")
    return occ


@dataclass(frozen=True)
class LoadPoint:
    sector_id: int
    occupancy: float
    period: str = ""

    def __post_init__(self):
        object.__setattr__(self, "occupancy", validate_occupancy(self.occupancy))
