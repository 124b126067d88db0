"""Independent reference implementations the test suite checks against.

Everything here deliberately avoids the package's search machinery: the
route oracle walks a fully time-discretized graph at 100 ns grain, the
static oracle is a plain Dijkstra over (component, done-mask) with no
reservations, and the tour oracle enumerates permutations.
"""

from __future__ import annotations

import heapq
from collections import deque
from itertools import permutations

from shuttleplan.chip import (ChipLayout, Kind, TimingConfig, channel_id,
                              interaction_id, intersection_id, readout_id)
from shuttleplan.planner import PlanRequest

GRAIN = 100

_LAYERS = (intersection_id, interaction_id, readout_id)


def bfs_hops(layout: ChipLayout, a, b) -> int:
    """Hop count between intersections by breadth-first search."""
    seen = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        if cur == b:
            return seen[cur]
        for nb in layout.neighbors(cur):
            if nb not in seen:
                seen[nb] = seen[cur] + 1
                queue.append(nb)
    raise AssertionError(f"{b} unreachable from {a}")


def brute_force_open_path(origin, cells) -> int:
    """Minimum open-path Manhattan distance over all visit permutations."""
    best = None
    for perm in permutations(cells):
        total = 0
        cur = origin
        for cell in perm:
            total += abs(cur[0] - cell[0]) + abs(cur[1] - cell[1])
            cur = cell
        if best is None or total < best:
            best = total
    return 0 if best is None else best


def bitmap_safe_intervals(reservations, horizon: int):
    """Safe intervals up to `horizon`, recovered from a 100 ns bitmap."""
    slots = horizon // GRAIN
    busy = [False] * slots
    for start, end in reservations:
        stop = slots if end == float("inf") else min(slots, int(end) // GRAIN)
        for s in range(int(start) // GRAIN, stop):
            busy[s] = True
    spans = []
    s = 0
    while s < slots:
        if busy[s]:
            s += 1
            continue
        e = s
        while e < slots and not busy[e]:
            e += 1
        spans.append((s * GRAIN, e * GRAIN))
        s = e
    return spans


class RouteOracle:
    """Time-discretized single-ancilla route search (Dijkstra at 100 ns).

    Mirrors the occupancy rules exactly: the qubit holds its component while
    waiting, a channel for a full traversal, and both layers of a displace
    for its whole duration; arrivals must land on a free slot.
    """

    def __init__(self, layout: ChipLayout, reservations: dict,
                 timing: TimingConfig, request: PlanRequest):
        for value in vars(timing).values():
            assert value % GRAIN == 0, "oracle needs 100 ns aligned timing"
        self.layout = layout
        self.res = {comp: sorted(spans) for comp, spans in reservations.items()}
        self.t = timing
        self.req = request
        self.full = (1 << len(request.targets)) - 1
        self.target_index = {c: j for j, c in enumerate(request.targets)}

    def free(self, comp, start: int, end: int) -> bool:
        for a, b in self.res.get(comp, ()):
            if a < end and start < b:
                return False
        return True

    def solve(self, horizon: int) -> int | None:
        """Earliest time parked in a readout with all targets done."""
        t = self.t
        req = self.req
        builder = {Kind.INTERSECTION: intersection_id,
                   Kind.INTERACTION: interaction_id,
                   Kind.READOUT: readout_id}[req.start_kind]
        start_comp = builder(req.start_cell)
        start = (req.start_time, start_comp, 0)
        heap = [start]
        seen = {(start_comp, 0, req.start_time)}
        while heap:
            now, comp, mask = heapq.heappop(heap)
            if (mask == self.full and comp[0] == Kind.READOUT.value
                    and self.free(comp, now, now + req.terminal_pad)):
                return now
            if now > horizon:
                return None
            cell = (comp[1], comp[2])
            moves = []
            # wait one slot in place
            if self.free(comp, now, now + GRAIN):
                moves.append((now + GRAIN, comp, mask))
            # shuttle
            if comp[0] == Kind.INTERSECTION.value:
                for nb in self.layout.neighbors(cell):
                    ch = channel_id(cell, nb)
                    dest = intersection_id(nb)
                    arr = now + t.t_shuttle
                    if (self.free(ch, now, arr)
                            and self.free(dest, arr, arr + GRAIN)):
                        moves.append((arr, dest, mask))
            # displace between layers of this cell
            for build in _LAYERS:
                dest = build(cell)
                if dest == comp:
                    continue
                arr = now + t.t_displace
                if (self.free(comp, now, arr)
                        and self.free(dest, now, arr + GRAIN)):
                    moves.append((arr, dest, mask))
            # gate (waiting in place until any per-cell window opens)
            j = self.target_index.get(cell)
            if (comp[0] == Kind.INTERACTION.value and j is not None
                    and not mask & (1 << j)
                    and (not req.ordered or j == bin(mask).count("1"))
                    and now >= req.gate_windows.get(cell, 0)
                    and self.free(comp, now, now + req.gate_duration)):
                moves.append((now + req.gate_duration, comp, mask | (1 << j)))

            for arr, dest, nmask in moves:
                key = (dest, nmask, arr)
                if arr <= horizon + GRAIN and key not in seen:
                    seen.add(key)
                    heapq.heappush(heap, (arr, dest, nmask))
        return None


def static_remaining_cost(layout: ChipLayout, timing: TimingConfig,
                          request: PlanRequest, start_comp, start_mask: int) -> int:
    """Exact cost-to-goal with no reservations (Dijkstra, no waiting)."""
    t = timing
    full = (1 << len(request.targets)) - 1
    target_index = {c: j for j, c in enumerate(request.targets)}
    dist = {(start_comp, start_mask): 0}
    heap = [(0, start_comp, start_mask)]
    while heap:
        d, comp, mask = heapq.heappop(heap)
        if d > dist.get((comp, mask), float("inf")):
            continue
        if mask == full and comp[0] == Kind.READOUT.value:
            return d
        cell = (comp[1], comp[2])
        steps = []
        if comp[0] == Kind.INTERSECTION.value:
            steps += [(intersection_id(nb), mask, t.t_shuttle)
                      for nb in layout.neighbors(cell)]
        for build in _LAYERS:
            dest = build(cell)
            if dest != comp:
                steps.append((dest, mask, t.t_displace))
        j = target_index.get(cell)
        if (comp[0] == Kind.INTERACTION.value and j is not None
                and not mask & (1 << j)
                and (not request.ordered or j == bin(mask).count("1"))):
            steps.append((comp, mask | (1 << j), request.gate_duration))
        for dest, nmask, cost in steps:
            nd = d + cost
            if nd < dist.get((dest, nmask), float("inf")):
                dist[(dest, nmask)] = nd
                heapq.heappush(heap, (nd, dest, nmask))
    raise AssertionError("goal unreachable in static oracle")
