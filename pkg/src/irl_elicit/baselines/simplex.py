"""Dense tableau simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with b >= 0.

The origin is feasible under ``b >= 0``, so the slack basis starts the
method and no phase one is needed. Pivoting follows Bland's rule, which
cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-11


class LPError(RuntimeError):
    pass


class UnboundedError(LPError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    n_pivots: int
    objective_history: list


def simplex_max(c, a_ub, b_ub, max_pivots=50_000) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a_ub, dtype=np.float64)
    b = np.asarray(b_ub, dtype=np.float64)
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    if np.any(b < 0):
        raise LPError("right-hand side must be non-negative")

    # rows 0..m-1: constraints; last row: reduced costs (c - z), rhs = -objective
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = c
    basis = np.arange(n, n + m)
    history = [0.0]

    for pivots in range(max_pivots + 1):
        reduced = tab[m, :-1]
        entering = np.flatnonzero(reduced > PIVOT_EPS)
        if entering.size == 0:
            x = np.zeros(n + m)
            x[basis] = tab[:m, -1]
            return LPResult(x[:n], -tab[m, -1], pivots, history)
        if pivots == max_pivots:
            break
        j = entering[0]
        col = tab[:m, j]
        rows = np.flatnonzero(col > PIVOT_EPS)
        if rows.size == 0:
            raise UnboundedError(f"objective unbounded along variable {j}")
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_EPS * max(1.0, abs(best))]
        i = ties[np.argmin(basis[ties])]

        tab[i] /= tab[i, j]
        for r in range(m + 1):
            if r != i and tab[r, j] != 0.0:
                tab[r] -= tab[r, j] * tab[i]
        # keep the rhs non-negative against round-off
        np.maximum(tab[:m, -1], 0.0, out=tab[:m, -1])
        basis[i] = j
        history.append(-tab[m, -1])
    raise LPError(f"simplex pivot cap ({max_pivots}) reached")
