"""Combination enumeration kernels.

Both paths compute, for every split vector in lexicographic order (sector 0
is the most significant digit), the weighted cost and the site DL/UL demand.
Summation order over sectors is identical in both, so results are bitwise
equal.

Set ``DYNSPLIT_NUMBA=0`` to force the pure-numpy path.
"""

from __future__ import annotations

import os

import numpy as np

N_SPLITS = 6

_WANT_NUMBA = os.environ.get("DYNSPLIT_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    import numba as nb
except ImportError:  # pragma: no cover
    nb = None

HAVE_NUMBA = nb is not None


def enumerate_numpy(cost: np.ndarray, dl: np.ndarray, ul: np.ndarray):
    n_sectors, n_opts = cost.shape
    n = n_opts ** n_sectors
    idx = np.arange(n, dtype=np.int64)
    val = np.zeros(n)
    tot_dl = np.zeros(n)
    tot_ul = np.zeros(n)
    for s in range(n_sectors):
        digit = (idx // n_opts ** (n_sectors - 1 - s)) % n_opts
        val += cost[s, digit]
        tot_dl += dl[s, digit]
        tot_ul += ul[s, digit]
    return val, tot_dl, tot_ul


if HAVE_NUMBA:

    @nb.njit(cache=True, nogil=True)
    def _enumerate_jit(cost, dl, ul):
        n_sectors, n_opts = cost.shape
        n = n_opts ** n_sectors
        val = np.zeros(n)
        tot_dl = np.zeros(n)
        tot_ul = np.zeros(n)
        for c in range(n):
            v = 0.0
            d = 0.0
            u = 0.0
            for s in range(n_sectors):
                digit = (c // n_opts ** (n_sectors - 1 - s)) % n_opts
                v += cost[s, digit]
                d += dl[s, digit]
                u += ul[s, digit]
            val[c] = v
            tot_dl[c] = d
            tot_ul[c] = u
        return val, tot_dl, tot_ul

    def enumerate_numba(cost: np.ndarray, dl: np.ndarray, ul: np.ndarray):
        return _enumerate_jit(
            np.ascontiguousarray(cost, dtype=np.float64),
            np.ascontiguousarray(dl, dtype=np.float64),
            np.ascontiguousarray(ul, dtype=np.float64),
        )

else:  # pragma: no cover
    enumerate_numba = None


BACKEND = "numba" if (HAVE_NUMBA and _WANT_NUMBA) else "numpy"


def enumerate_combos(cost: np.ndarray, dl: np.ndarray, ul: np.ndarray):
    """Return (weighted cost, site DL, site UL) for all ``6**S`` split vectors."""
    if BACKEND == "numba":
        return enumerate_numba(cost, dl, ul)
    return enumerate_numpy(cost, dl, ul)
