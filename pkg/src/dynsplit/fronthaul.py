"""Fronthaul demand per sector and on the shared site link."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import BoundaryKind, CellConfig, Direction, LoadPoint, Split, fh_boundary


@dataclass(frozen=True)
class FhDemand:
    dl_gbps: float = 0.0
    ul_gbps: float = 0.0

    def __post_init__(self):
        for v in (self.dl_gbps, self.ul_gbps):
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"FH demand must be finite and >= 0, got {v!r}")

    def __add__(self, other: "FhDemand") -> "FhDemand":
        return FhDemand(self.dl_gbps + other.dl_gbps, self.ul_gbps + other.ul_gbps)

    @property
    def total_gbps(self) -> float:
        return self.dl_gbps + self.ul_gbps


@dataclass(frozen=True)
class FhLink:
    """Per-direction capacity of the SXU-CXU link. ``inf`` means unconstrained."""

    capacity_gbps: float = 40.0

    def __post_init__(self):
        if not self.capacity_gbps >= 0:
            raise ValueError("capacity_gbps must be >= 0")


def payload_bits_per_symbol(kind: BoundaryKind, cell: CellConfig, occupancy: float) -> float:
    """Bits crossing the link during one symbol period in which the direction is active."""
    sc = cell.n_subcarriers
    if kind is BoundaryKind.TIME_IQ:
        return cell.n_ant_bs * (cell.n_fft + cell.n_cp) * cell.n_iq
    if kind is BoundaryKind.FREQ_IQ_FULLGRID_PER_ANT:
        return cell.n_ant_bs * sc * cell.n_iq
    if kind is BoundaryKind.FREQ_IQ_OCC_PER_ANT:
        return cell.n_ant_bs * sc * occupancy * cell.n_iq
    if kind is BoundaryKind.FREQ_IQ_OCC_PER_LAYER:
        return cell.n_layers * sc * occupancy * cell.n_iq
    coded = cell.n_layers * sc * occupancy * cell.mod_order
    if kind is BoundaryKind.CODED_BITS:
        return coded
    if kind is BoundaryKind.SOFTBITS:
        return coded * cell.n_soft
    if kind is BoundaryKind.INFO_BITS:
        return coded * cell.code_rate
    raise AssertionError(kind)


def _occ(load: LoadPoint | float) -> float:
    return load.occupancy if isinstance(load, LoadPoint) else float(load)


def sector_fh_peak(split: Split, cell: CellConfig, load: LoadPoint | float, overhead: float = 1.0) -> FhDemand:
    """Instantaneous rate while the direction is transmitting (no TDD duty averaging)."""
    occ = _occ(load)
    rates = [
        payload_bits_per_symbol(fh_boundary(split, d), cell, occ) / cell.t_sym_s * overhead / 1e9
        for d in (Direction.DL, Direction.UL)
    ]
    return FhDemand(*rates)


def sector_fh(split: Split, cell: CellConfig, load: LoadPoint | float, overhead: float = 1.0) -> FhDemand:
    """Time-averaged FH demand in Gb/s."""
    peak = sector_fh_peak(split, cell, load, overhead)
    return FhDemand(peak.dl_gbps * cell.tdd.dl_duty, peak.ul_gbps * cell.tdd.ul_duty)


def site_fh(
    splits: Sequence[Split],
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    overhead: float = 1.0,
) -> FhDemand:
    if not len(splits) == len(cells) == len(loads):
        raise ValueError(f"length mismatch: {len(splits)} splits, {len(cells)} cells, {len(loads)} loads")
    total = FhDemand()
    for s, c, l in zip(splits, cells, loads):
        total = total + sector_fh(s, c, l, overhead)
    return total


def fits(demand: FhDemand, link: FhLink) -> bool:
    return demand.dl_gbps <= link.capacity_gbps and demand.ul_gbps <= link.capacity_gbps


def feasible(
    splits: Sequence[Split],
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    link: FhLink,
    overhead: float = 1.0,
) -> bool:
    return fits(site_fh(splits, cells, loads, overhead), link)
