"""Per-sector split selection minimizing weighted compute cost under FH limits.

The objective for a split vector X is ``C_BBH(X) + epsilon * C_BBL(X)`` (GOPS),
subject to the site DL and UL demand each staying within the link capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _kernels
from .complexity import DEFAULT_OPS, CostBreakdown, OpCountTable, sector_cost
from .fronthaul import FhDemand, FhLink, fits, sector_fh
from .model import SPLITS, CellConfig, LoadPoint, Split

MAX_EXHAUSTIVE_SECTORS = 8
# Relative tolerance under which two objective values count as a tie.
TIE_RTOL = 1e-9
MAX_RECORDED_OPTIMA = 1024

UNBOUNDED = FhLink(math.inf)


@dataclass(frozen=True)
class Objective:
    epsilon: float = 2.0

    def __post_init__(self):
        if not self.epsilon >= 1:
            raise ValueError(f"epsilon must be >= 1, got {self.epsilon!r}")

    def value(self, bbh_gops: float, bbl_gops: float) -> float:
        return bbh_gops + self.epsilon * bbl_gops


@dataclass(frozen=True)
class Solution:
    splits: tuple[Split, ...]
    objective_value: float
    fh: FhDemand
    feasible: bool
    breakdowns: tuple[CostBreakdown, ...]
    n_optimal: int = 1
    optimal_set: tuple[tuple[Split, ...], ...] = ()
    n_feasible: int | None = None
    method: str = "evaluate"

    @property
    def bbh_gops(self) -> float:
        return sum(b.bbh_gops for b in self.breakdowns)

    @property
    def bbl_gops(self) -> float:
        return sum(b.bbl_gops for b in self.breakdowns)

    def to_dict(self) -> dict[str, Any]:
        return {
            "splits": [s.value for s in self.splits],
            "objective_gops": self.objective_value,
            "bbh_gops": self.bbh_gops,
            "bbl_gops": self.bbl_gops,
            "fh_dl_gbps": self.fh.dl_gbps,
            "fh_ul_gbps": self.fh.ul_gbps,
            "feasible": self.feasible,
            "n_optimal": self.n_optimal,
            "optimal_set": [[s.value for s in x] for x in self.optimal_set],
        }


@dataclass
class SiteTables:
    """Per-sector, per-split cost and FH tables shared by all search methods."""

    cells: Sequence[CellConfig]
    loads: Sequence[LoadPoint | float]
    objective: Objective
    overhead: float = 1.0
    ops: OpCountTable = DEFAULT_OPS
    breakdowns: list[list[CostBreakdown]] = field(init=False)
    fh: list[list[FhDemand]] = field(init=False)

    def __post_init__(self):
        if len(self.cells) != len(self.loads):
            raise ValueError(f"length mismatch: {len(self.cells)} cells vs {len(self.loads)} loads")
        self.breakdowns = [[sector_cost(s, c, l, self.ops) for s in SPLITS] for c, l in zip(self.cells, self.loads)]
        self.fh = [[sector_fh(s, c, l, self.overhead) for s in SPLITS] for c, l in zip(self.cells, self.loads)]

    @property
    def n_sectors(self) -> int:
        return len(self.cells)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        eps = self.objective.epsilon
        cost = np.array([[b.bbh_gops + eps * b.bbl_gops for b in row] for row in self.breakdowns])
        dl = np.array([[d.dl_gbps for d in row] for row in self.fh])
        ul = np.array([[d.ul_gbps for d in row] for row in self.fh])
        return cost, dl, ul

    def solution(self, idx: Sequence[int], link: FhLink, method: str = "evaluate", **extra) -> Solution:
        bds = tuple(self.breakdowns[s][i] for s, i in enumerate(idx))
        fh = FhDemand()
        for s, i in enumerate(idx):
            fh = fh + self.fh[s][i]
        value = self.objective.value(sum(b.bbh_gops for b in bds), sum(b.bbl_gops for b in bds))
        return Solution(
            tuple(SPLITS[i] for i in idx), value, fh, fits(fh, link), bds, method=method, **extra
        )


def _indices(splits: Sequence[Split]) -> list[int]:
    return [Split(s).depth for s in splits]


def _digits(code: int, n_sectors: int) -> list[int]:
    out = []
    for _ in range(n_sectors):
        code, d = divmod(code, len(SPLITS))
        out.append(d)
    return out[::-1]


def evaluate(
    splits: Sequence[Split],
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    objective: Objective = Objective(),
    link: FhLink = UNBOUNDED,
    overhead: float = 1.0,
    ops: OpCountTable = DEFAULT_OPS,
) -> Solution:
    if len(splits) != len(cells):
        raise ValueError(f"length mismatch: {len(splits)} splits vs {len(cells)} cells")
    tables = SiteTables(cells, loads, objective, overhead, ops)
    return tables.solution(_indices(splits), link)


def exhaustive_search(
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    objective: Objective = Objective(),
    link: FhLink = FhLink(),
    overhead: float = 1.0,
    ops: OpCountTable = DEFAULT_OPS,
) -> Solution:
    """Minimize over all ``6**S`` split vectors.

    Ties within ``TIE_RTOL`` go to the lexicographically most centralized
    vector. That order is total, so the secondary lower-FH rule never fires;
    all tied vectors are still recorded in ``optimal_set``. When nothing is
    feasible the vector with least total capacity violation is returned,
    flagged infeasible.
    """
    n_sectors = len(cells)
    if n_sectors > MAX_EXHAUSTIVE_SECTORS:
        raise ValueError(
            f"exhaustive search limited to {MAX_EXHAUSTIVE_SECTORS} sectors (got {n_sectors}); use greedy_search"
        )
    if n_sectors == 0:
        raise ValueError("need at least one sector")
    tables = SiteTables(cells, loads, objective, overhead, ops)
    val, dl, ul = _kernels.enumerate_combos(*tables.arrays())
    cap = link.capacity_gbps
    ok = (dl <= cap) & (ul <= cap)
    n_feasible = int(ok.sum())
    if n_feasible:
        vmin = val[ok].min()
        tied = ok & (val <= vmin + TIE_RTOL * abs(vmin) + 1e-12)
    else:
        violation = np.maximum(dl - cap, 0) + np.maximum(ul - cap, 0)
        least = violation <= violation.min() * (1 + TIE_RTOL)
        vmin = val[least].min()
        tied = least & (val <= vmin + TIE_RTOL * abs(vmin) + 1e-12)
    winners = np.flatnonzero(tied)
    best = int(winners[0])
    optimal_set = tuple(
        tuple(SPLITS[i] for i in _digits(int(c), n_sectors)) for c in winners[:MAX_RECORDED_OPTIMA]
    )
    return tables.solution(
        _digits(best, n_sectors),
        link,
        method="exhaustive",
        n_optimal=len(winners),
        optimal_set=optimal_set,
        n_feasible=n_feasible,
    )


def _better(score: float, increase: float, best_score: float, best_increase: float) -> bool:
    if math.isinf(score) or math.isinf(best_score):
        return score > best_score or (score == best_score and increase < best_increase)
    tol = TIE_RTOL * max(abs(score), abs(best_score))
    if abs(score - best_score) <= tol:
        return increase < best_increase
    return score > best_score


def greedy_search(
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    objective: Objective = Objective(),
    link: FhLink = FhLink(),
    overhead: float = 1.0,
    ops: OpCountTable = DEFAULT_OPS,
) -> Solution:
    """Demote from all-S8 until feasible, then try feasibility-preserving promotions.

    Each demotion moves one sector one step toward S6, choosing the sector
    with the largest FH reduction (DL+UL) per unit of objective increase.
    """
    tables = SiteTables(cells, loads, objective, overhead, ops)
    cost, dl, ul = tables.arrays()
    n = tables.n_sectors
    cap = link.capacity_gbps
    x = [0] * n
    last = len(SPLITS) - 1

    def totals(v):
        return sum(dl[s, v[s]] for s in range(n)), sum(ul[s, v[s]] for s in range(n))

    def ok(v):
        d, u = totals(v)
        return d <= cap and u <= cap

    while not ok(x) and any(i < last for i in x):
        # Equal ratios are common (costs and loaded FH both scale with occupancy);
        # then the smaller step wins.
        best, best_key = None, None
        for s in range(n):
            if x[s] == last:
                continue
            i = x[s]
            reduction = (dl[s, i] + ul[s, i]) - (dl[s, i + 1] + ul[s, i + 1])
            increase = cost[s, i + 1] - cost[s, i]
            if reduction > 0:
                score = reduction / increase if increase > 0 else math.inf
            else:
                score = -math.inf
            if best_key is None or _better(score, increase, *best_key):
                best, best_key = s, (score, increase)
        x[best] += 1

    if ok(x):
        improved = True
        while improved:
            improved = False
            best_move, best_gain = None, 0.0
            for s in range(n):
                for j in range(x[s]):
                    trial = x.copy()
                    trial[s] = j
                    gain = cost[s, x[s]] - cost[s, j]
                    if gain > best_gain * (1 + TIE_RTOL) + 1e-12 and ok(trial):
                        best_move, best_gain = (s, j), gain
            if best_move is not None:
                x[best_move[0]] = best_move[1]
                improved = True
    return tables.solution(x, link, method="greedy")


def fixed_split_eval(
    split: Split,
    cells: Sequence[CellConfig],
    loads: Sequence[LoadPoint | float],
    objective: Objective = Objective(),
    link: FhLink = FhLink(),
    overhead: float = 1.0,
    ops: OpCountTable = DEFAULT_OPS,
) -> Solution:
    tables = SiteTables(cells, loads, objective, overhead, ops)
    return tables.solution([Split(split).depth] * len(cells), link, method=f"fixed-{Split(split).value}")


def pct_diff(solution: Solution, reference: Solution) -> float:
    if not reference.objective_value > 0:
        raise ValueError("reference objective must be > 0")
    return 100.0 * (solution.objective_value - reference.objective_value) / reference.objective_value


SEARCH_METHODS = {"exhaustive": exhaustive_search, "greedy": greedy_search}
