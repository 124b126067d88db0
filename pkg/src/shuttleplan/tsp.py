"""Open-path traveling-salesman solvers over Manhattan grid distances.

The exact solver is a Held-Karp bitmask DP; beyond ``exact_limit`` stops it
falls back to nearest-neighbor + 2-opt and flags the result as inexact
(the route is still valid, only the lower-bound guarantee is lost).
"""

from __future__ import annotations

from dataclasses import dataclass

from .chip import Cell

EXACT_LIMIT = 12


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass
class TourResult:
    order: list[Cell]  # visit order, origin excluded
    distance: int
    exact: bool


def solve_tsp(origin: Cell, pending: set[Cell] | list[Cell],
              exact_limit: int = EXACT_LIMIT) -> TourResult:
    """Minimum open path from origin through all pending cells (no return)."""
    cells = sorted(set(pending))
    if not cells:
        return TourResult(order=[], distance=0, exact=True)
    if len(cells) > exact_limit:
        return _nearest_neighbor_2opt(origin, cells)

    m = len(cells)
    dist = [[manhattan(a, b) for b in cells] for a in cells]
    from_origin = [manhattan(origin, c) for c in cells]
    full = (1 << m) - 1

    # dp[mask][last] = shortest path from origin covering mask, ending at last
    dp = [[None] * m for _ in range(1 << m)]
    parent: list[list[int | None]] = [[None] * m for _ in range(1 << m)]
    for j in range(m):
        dp[1 << j][j] = from_origin[j]
    for mask in range(1, full + 1):
        row = dp[mask]
        for last in range(m):
            cur = row[last]
            if cur is None:
                continue
            rest = full & ~mask
            nxt = rest
            while nxt:
                j = (nxt & -nxt).bit_length() - 1
                nxt &= nxt - 1
                cand = cur + dist[last][j]
                nm = mask | (1 << j)
                if dp[nm][j] is None or cand < dp[nm][j]:
                    dp[nm][j] = cand
                    parent[nm][j] = last

    best_last = min(range(m), key=lambda j: dp[full][j])
    best = dp[full][best_last]
    order_idx = []
    mask, last = full, best_last
    while last is not None:
        order_idx.append(last)
        prev = parent[mask][last]
        mask &= ~(1 << last)
        last = prev
    order_idx.reverse()
    return TourResult(order=[cells[j] for j in order_idx],
                      distance=int(best), exact=True)


def path_distance(origin: Cell, order: list[Cell]) -> int:
    total = 0
    cur = origin
    for cell in order:
        total += manhattan(cur, cell)
        cur = cell
    return total


def _nearest_neighbor_2opt(origin: Cell, cells: list[Cell]) -> TourResult:
    remaining = list(cells)
    order: list[Cell] = []
    cur = origin
    while remaining:
        nxt = min(remaining, key=lambda c: (manhattan(cur, c), c))
        remaining.remove(nxt)
        order.append(nxt)
        cur = nxt

    improved = True
    while improved:
        improved = False
        for i in range(len(order) - 1):
            for j in range(i + 1, len(order)):
                trial = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
                if path_distance(origin, trial) < path_distance(origin, order):
                    order = trial
                    improved = True
    return TourResult(order=order, distance=path_distance(origin, order),
                      exact=False)


class OpenPathTable:
    """Precomputed Held-Karp table for one fixed target set.

    Route planning evaluates the remaining-tour cost for many (position,
    pending-subset) pairs of the same ancilla; the subset DP is shared so
    each query is a single O(|pending|) minimization.

    ``best[mask][j]`` is the cheapest open path visiting exactly the targets
    in ``mask`` when entered at target j (j must be in mask).
    """

    def __init__(self, targets: list[Cell], exact_limit: int = EXACT_LIMIT):
        self.targets = list(targets)
        self.exact = len(targets) <= exact_limit
        m = len(targets)
        if not self.exact:
            return
        dist = [[manhattan(a, b) for b in targets] for a in targets]
        best = [[None] * m for _ in range(1 << m)]
        for j in range(m):
            best[1 << j][j] = 0
        for mask in range(1, 1 << m):
            for j in range(m):
                if not mask & (1 << j):
                    continue
                rest = mask & ~(1 << j)
                if rest == 0:
                    continue
                acc = None
                sub = rest
                while sub:
                    t = (sub & -sub).bit_length() - 1
                    sub &= sub - 1
                    prev = best[rest][t]
                    if prev is None:
                        continue
                    cand = dist[j][t] + prev
                    if acc is None or cand < acc:
                        acc = cand
                best[mask][j] = acc
        self._best = best

    def min_distance(self, origin: Cell, mask: int) -> int:
        """Shortest open-path distance from origin over the masked targets."""
        if mask == 0:
            return 0
        if not self.exact:
            cells = [self.targets[j] for j in range(len(self.targets))
                     if mask & (1 << j)]
            return _nearest_neighbor_2opt(origin, cells).distance
        cand = None
        sub = mask
        while sub:
            j = (sub & -sub).bit_length() - 1
            sub &= sub - 1
            val = manhattan(origin, self.targets[j]) + self._best[mask][j]
            if cand is None or val < cand:
                cand = val
        return cand
