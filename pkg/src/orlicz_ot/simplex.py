"""Exact transportation simplex (MODI / stepping-stone) for small dense problems.

Forbidden arcs are handled with a two-level lexicographic cost
``(is_forbidden, cost)``: the solver first minimises the mass put on
forbidden arcs and then the ordinary cost among plans that achieve that
minimum.  A positive first level at the optimum means that every coupling
charges a forbidden arc.

Reduced costs are computed from node potentials.  When potentials are large
compared with a reduced cost the sign is re-decided by an exactly rounded
(``math.fsum``) sum around the pivot cycle, so plans stay optimal to
rounding even when a few arcs carry huge costs.
"""

from __future__ import annotations

import math
from collections import deque
from typing import NamedTuple

import numpy as np

__all__ = ["TransportSolution", "solve_transport", "DEFAULT_SIZE_CAP"]

DEFAULT_SIZE_CAP = 512
_EPS = np.finfo(float).eps
# absolute cost resolution below which sign ambiguities are not worth resolving
_ABS_RESOLUTION = 1e-14
# flows this small relative to their row/column mass are rounding residue
_RESIDUE = 16.0 * _EPS
# degenerate pivots in a row before switching to Bland's rule
_BLAND_AFTER = 50


class TransportSolution(NamedTuple):
    flow: np.ndarray | None  # None when infeasible
    value: float  # +inf when infeasible
    pivots: int


def solve_transport(supply, demand, cost, forbidden=None, size_cap: int = DEFAULT_SIZE_CAP) -> TransportSolution:
    """Minimise ``sum(cost * flow)`` over flows with the given row/column sums.

    ``cost`` entries that are +inf are treated as forbidden, as are entries
    flagged in ``forbidden``.  Ties are broken toward the lowest row-major
    index, so results are deterministic.
    """
    a = np.asarray(supply, dtype=float).ravel()
    b = np.asarray(demand, dtype=float).ravel()
    c = np.array(cost, dtype=float)
    m, n = a.size, b.size
    if c.shape != (m, n):
        raise ValueError(f"cost shape {c.shape} does not match ({m}, {n})")
    if max(m, n) > size_cap:
        raise ValueError(f"transport problem {m}x{n} exceeds the size cap {size_cap}")
    if m == 0 or n == 0:
        raise ValueError("empty marginal")
    if (a < 0).any() or (b < 0).any():
        raise ValueError("marginals must be nonnegative")
    if np.isnan(c).any():
        raise ValueError("cost contains NaN")
    forb = np.isinf(c)
    if forbidden is not None:
        forb |= np.asarray(forbidden, dtype=bool)
    c[forb] = 0.0
    f = forb.astype(float)

    b = b.copy()
    b[-1] += a.sum() - b.sum()  # absorb rounding so both sides balance
    if b[-1] < 0:
        b[-1] = 0.0

    x, basic = _least_cost_start(a, b, f, c)
    pivots = 0
    degenerate_run = 0
    limit = 50 * (m + n) ** 2 + 1000
    while True:
        adj = _adjacency(basic, m, n)
        uf, vf = _potentials(adj, f, m, n)
        uc, vc = _potentials(adj, c, m, n)
        enter = _entering(x, basic, f, c, uf, vf, uc, vc, adj, bland=degenerate_run >= _BLAND_AFTER)
        if enter is None:
            break
        cycle = _cycle(adj, enter, m)
        minus = cycle[1::2]
        theta = min(x[i, j] for i, j in minus)
        leave = min((cell for cell in minus if x[cell] == theta), key=lambda ij: ij[0] * n + ij[1])
        for k, (i, j) in enumerate(cycle):
            if k % 2 == 0:
                x[i, j] += theta
            else:
                x[i, j] -= theta
        x[leave] = 0.0
        basic[enter] = True
        basic[leave] = False
        pivots += 1
        degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
        if pivots > limit:
            raise RuntimeError("transportation simplex failed to terminate")

    # pivots of the form (q + theta) - theta leave rounding residue on cells
    # that should be empty; on a huge-cost arc such residue dominates the value
    x[x <= _RESIDUE * np.maximum(a[:, None], b[None, :])] = 0.0

    bad = float(np.sum(x[forb]))
    if bad > 1e-12 * max(1.0, a.sum()):
        return TransportSolution(None, math.inf, pivots)
    x[forb] = 0.0
    value = math.fsum((c[~forb] * x[~forb]).tolist())
    return TransportSolution(x, value, pivots)


def _least_cost_start(a, b, f, c):
    """Matrix-minimum initial basis; yields exactly m + n - 1 basic cells forming a tree."""
    m, n = a.size, b.size
    s, d = a.copy(), b.copy()
    x = np.zeros((m, n))
    basic = np.zeros((m, n), dtype=bool)
    row_open = np.ones(m, dtype=bool)
    col_open = np.ones(n, dtype=bool)
    # order by (forbidden, cost, row-major index)
    order = np.lexsort((np.arange(m * n), c.ravel(), f.ravel()))
    rows_left, cols_left = m, n
    for flat in order:
        i, j = divmod(int(flat), n)
        if not (row_open[i] and col_open[j]):
            continue
        q = min(s[i], d[j])
        x[i, j] = q
        basic[i, j] = True
        s[i] -= q
        d[j] -= q
        if rows_left == 1 and cols_left == 1:
            break
        # cross out exactly one line per allocation
        if (s[i] <= d[j] and rows_left > 1) or cols_left == 1:
            row_open[i] = False
            rows_left -= 1
            d[j] = max(d[j], 0.0)
        else:
            col_open[j] = False
            cols_left -= 1
    return x, basic


def _adjacency(basic, m, n):
    # nodes 0..m-1 are rows, m..m+n-1 columns
    adj = [[] for _ in range(m + n)]
    for i, j in zip(*np.nonzero(basic)):
        i, j = int(i), int(j)
        adj[i].append(m + j)
        adj[m + j].append(i)
    return adj


def _potentials(adj, cost, m, n):
    u = np.zeros(m)
    v = np.zeros(n)
    seen = [False] * (m + n)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if seen[nb]:
                continue
            seen[nb] = True
            if node < m:
                v[nb - m] = cost[node, nb - m] - u[node]
            else:
                u[nb] = cost[nb, node - m] - v[node - m]
            queue.append(nb)
    if not all(seen):
        raise RuntimeError("basis is not a spanning tree")
    return u, v


def _tree_path(adj, start, goal):
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb in adj[node]:
            if nb not in prev:
                prev[nb] = node
                queue.append(nb)
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def _cycle(adj, enter, m):
    """Cells of the pivot cycle, entering cell first, alternating +/-."""
    i, j = enter
    path = _tree_path(adj, m + j, i)  # column j ... row i through the tree
    cells = [enter]
    for a, b in zip(path[:-1], path[1:]):
        r, col = (b, a - m) if a >= m else (a, b - m)
        cells.append((r, col))
    # path runs col j -> row i; reverse so signs alternate starting from (i, j)
    return [cells[0]] + cells[1:][::-1]


def _exact_reduced_cost(adj, enter, cost, m):
    cyc = _cycle(adj, enter, m)
    terms = [cost[cell] if k % 2 == 0 else -cost[cell] for k, cell in enumerate(cyc)]
    return math.fsum(terms)


def _entering(x, basic, f, c, uf, vf, uc, vc, adj, bland):
    m, n = x.shape
    nonbasic = ~basic
    rf = f - uf[:, None] - vf[None, :]
    cand = nonbasic & (rf < -0.5)
    if cand.any():
        return _pick(rf, cand, bland)
    level = nonbasic & (np.abs(rf) < 0.5)
    rc = c - uc[:, None] - vc[None, :]
    err = 16.0 * _EPS * (np.abs(uc)[:, None] + np.abs(vc)[None, :] + np.abs(c))
    cand = level & (rc < -err)
    if cand.any():
        return _pick(rc, cand, bland)
    unsure = level & (np.abs(rc) <= err) & (err > _ABS_RESOLUTION)
    for i, j in zip(*np.nonzero(unsure)):
        cell = (int(i), int(j))
        if _exact_reduced_cost(adj, cell, c, m) < 0.0:
            return cell
    return None


def _pick(red, cand, bland):
    flat = np.flatnonzero(cand)
    if bland:
        k = int(flat[0])
    else:
        vals = red.ravel()[flat]
        k = int(flat[int(np.argmin(vals))])  # argmin returns the first minimum
    n = red.shape[1]
    return divmod(k, n)
