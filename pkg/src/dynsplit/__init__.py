"""Dynamic low-layer functional split selection for a disaggregated RAN site."""

from .model import (
    BbFunction,
    BoundaryKind,
    CellConfig,
    Direction,
    LdpcParams,
    LoadPoint,
    Placement,
    Side,
    Split,
    TddPattern,
    fh_boundary,
    placement_of,
)
from .complexity import OpCountTable, executions_per_second, ops_per_execution, sector_cost
from .fronthaul import FhDemand, FhLink, feasible, sector_fh, site_fh
from .optimizer import (
    Objective,
    Solution,
    evaluate,
    exhaustive_search,
    fixed_split_eval,
    greedy_search,
    pct_diff,
)

__version__ = "0.1.0"
