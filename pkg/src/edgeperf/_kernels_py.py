"""Pure numpy selection kernels; the fallback for the compiled ``_kernels``.

Both functions take flattened ``total`` and ``precision`` arrays (one entry
per decision point, in tie-break order) and return, per threshold, the index
of the selected point or -1 when no point is feasible.
"""

from __future__ import annotations

import numpy as np


def select_p1(total, precision, limits):
    """Max precision s.t. ``total <= limit``; ties: lower total, lower index."""
    total = np.asarray(total, dtype=np.float64)
    precision = np.asarray(precision, dtype=np.float64)
    out = np.full(len(limits), -1, dtype=np.int64)
    for t, lim in enumerate(np.asarray(limits, dtype=np.float64)):
        feas = total <= lim
        if not feas.any():
            continue
        best = precision[feas].max()
        cand = feas & (precision == best)
        low = total[cand].min()
        out[t] = np.flatnonzero(cand & (total == low))[0]
    return out


def select_p2(total, precision, floors):
    """Min total s.t. ``precision >= floor``; ties: higher precision, lower index."""
    total = np.asarray(total, dtype=np.float64)
    precision = np.asarray(precision, dtype=np.float64)
    out = np.full(len(floors), -1, dtype=np.int64)
    for t, floor in enumerate(np.asarray(floors, dtype=np.float64)):
        feas = precision >= floor
        if not feas.any():
            continue
        low = total[feas].min()
        cand = feas & (total == low)
        best = precision[cand].max()
        out[t] = np.flatnonzero(cand & (precision == best))[0]
    return out
