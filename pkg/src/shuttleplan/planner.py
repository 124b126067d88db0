"""Time-optimal single-ancilla route search over safe intervals.

States are (component, safe-interval index, done-mask); time is tracked as
the earliest known arrival g per state, so waiting never has to be encoded
as an explicit transition. Transitions are

  * shuttle: intersection -> adjacent intersection, feasible only when the
    connecting channel has a safe interval covering the whole traversal and
    the destination interval contains the arrival, one successor per
    reachable destination interval;
  * displace: between the component layers of one cell, occupying both
    endpoints for the full displace duration;
  * gate: in an interaction zone that is a pending target, when the current
    interval still admits the full gate time.

The goal is a readout state with all targets done whose interval admits the
terminal pad (measurement and any trailing basis-change gate). The search is
A* with an admissible traveling-salesman lower bound, re-expanding any state
reached by a strictly earlier arrival, so the returned route is time-optimal
for the reservations it was planned against.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from .chip import (Cell, ChipLayout, ComponentId, Kind, TimingConfig,
                   channel_id, component_cell, interaction_id,
                   intersection_id, readout_id)
from .intervals import ReservationTable, SafeInterval
from .tsp import OpenPathTable, manhattan

_LAYER_BUILDERS = (intersection_id, interaction_id, readout_id)


class PlanFailure(RuntimeError):
    """No collision-free route exists under the given reservations."""


@dataclass(frozen=True, order=True)
class SearchState:
    """Keyed (comp, interval, mask); ordering gives deterministic tie-breaks."""

    comp: ComponentId
    interval: int
    mask: int  # bit j set once target j has been gated


@dataclass(frozen=True)
class PathStep:
    kind: str  # SHUTTLE | DISPLACE | GATE | WAIT
    start: int
    duration: int
    comp: ComponentId            # channel / source layer / zone / wait spot
    dest: Optional[ComponentId] = None  # displace destination layer
    target: Optional[int] = None        # gated target index into task.targets

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass
class PlanRequest:
    start_cell: Cell
    start_kind: Kind
    start_time: int
    targets: list[Cell]          # task target cells, canonical order
    ordered: bool
    gate_duration: int           # t_cx, or t_cx + 2 t_h under tailoring
    terminal_pad: int            # readout time needed after parking
    # earliest allowed gate start per target cell; used to keep every data
    # qubit's X-check gates ahead of its Z-check gates within a round, the
    # interleaving rule that keeps detectors deterministic
    gate_windows: dict[Cell, int] = None

    def __post_init__(self):
        if self.gate_windows is None:
            self.gate_windows = {}


@dataclass
class PlanResult:
    steps: list[PathStep]
    parked: ComponentId          # terminal readout
    parked_time: int             # g at the goal (terminal pad not included)
    start_comp: ComponentId


class _Search:
    def __init__(self, layout: ChipLayout, table: ReservationTable,
                 timing: TimingConfig, req: PlanRequest):
        self.layout = layout
        self.table = table
        self.timing = timing
        self.req = req
        self.full = (1 << len(req.targets)) - 1
        self.cell_of = {cell: j for j, cell in enumerate(req.targets)}
        if len(self.cell_of) != len(req.targets):
            raise ValueError("duplicate target cells in one task")
        self._intervals: dict[ComponentId, list[SafeInterval]] = {}
        self._tours = OpenPathTable(req.targets)
        self._h_cache: dict[tuple[ComponentId, int], int] = {}

    def intervals(self, comp: ComponentId) -> list[SafeInterval]:
        cached = self._intervals.get(comp)
        if cached is None:
            cached = self.table.safe_intervals(comp)
            self._intervals[comp] = cached
        return cached

    # -- successor generation ------------------------------------------------

    def successors(self, state: SearchState, g: int):
        """Yield (state, arrival, action) for all reachable transitions."""
        t = self.timing
        comp = state.comp
        kind = Kind(comp[0])
        hi = self.intervals(comp)[state.interval].span.end
        cell = component_cell(comp)

        if kind is Kind.INTERSECTION:
            for nb in self.layout.neighbors(cell):
                ch = channel_id(cell, nb)
                dest = intersection_id(nb)
                for dj, dsi in enumerate(self.intervals(dest)):
                    lo_dep = max(g, dsi.span.start - t.t_shuttle)
                    for csi in self.intervals(ch):
                        dep = max(lo_dep, csi.span.start)
                        arr = dep + t.t_shuttle
                        if dep > hi or arr >= dsi.span.end:
                            break  # later channel intervals only delay further
                        if arr > csi.span.end:
                            continue  # channel window too short, try the next
                        yield (SearchState(dest, dj, state.mask), arr,
                               ("shuttle", ch, dep))
                        break

        for build in _LAYER_BUILDERS:
            dest = build(cell)
            if dest == comp:
                continue
            for dj, dsi in enumerate(self.intervals(dest)):
                dep = max(g, dsi.span.start)
                arr = dep + t.t_displace
                if arr > hi:
                    break  # source must stay safe through the displace
                if arr >= dsi.span.end:
                    continue  # interval too short to arrive inside it
                yield (SearchState(dest, dj, state.mask), arr,
                       ("displace", comp, dest, dep))

        if kind is Kind.INTERACTION and self._gate_allowed(state, cell):
            start = max(g, self.req.gate_windows.get(cell, 0))
            done = start + self.req.gate_duration
            if done <= hi:
                j = self.cell_of[cell]
                yield (SearchState(comp, state.interval, state.mask | (1 << j)),
                       done, ("gate", comp, start, j))

    def _gate_allowed(self, state: SearchState, cell: Cell) -> bool:
        j = self.cell_of.get(cell)
        if j is None or state.mask & (1 << j):
            return False
        if self.req.ordered:
            return j == bin(state.mask).count("1")
        return True

    # -- heuristic -----------------------------------------------------------

    def heuristic(self, state: SearchState) -> int:
        key = (state.comp, state.mask)
        cached = self._h_cache.get(key)
        if cached is None:
            cached = self._heuristic(state)
            self._h_cache[key] = cached
        return cached

    def _heuristic(self, state: SearchState) -> int:
        t = self.timing
        kind = Kind(state.comp[0])
        pending = self.full & ~state.mask
        if pending == 0:
            return 0 if kind is Kind.READOUT else t.t_displace
        cell = component_cell(state.comp)
        stop_cost = self.req.gate_duration + 2 * t.t_displace
        cost = 0

        if self.req.ordered:
            seq = self.req.targets[bin(state.mask).count("1"):]
            if kind is Kind.INTERACTION and cell == seq[0]:
                cost += self.req.gate_duration + t.t_displace
                seq = seq[1:]
            elif kind is Kind.READOUT and (not seq or cell != seq[0]):
                cost += t.t_displace
            cur = cell
            for nxt in seq:
                cost += manhattan(cur, nxt) * t.t_shuttle + stop_cost
                cur = nxt
            return cost

        j = self.cell_of.get(cell)
        at_pending = j is not None and pending & (1 << j)
        if kind is Kind.INTERACTION and at_pending:
            cost += self.req.gate_duration + t.t_displace
            pending &= ~(1 << j)
            if pending == 0:
                return cost
        elif kind is Kind.READOUT and not at_pending:
            cost += t.t_displace
        cost += self._tours.min_distance(cell, pending) * t.t_shuttle
        cost += bin(pending).count("1") * stop_cost
        return cost

    # -- A* ------------------------------------------------------------------

    def run(self) -> PlanResult:
        req = self.req
        builder = {Kind.INTERSECTION: intersection_id,
                   Kind.INTERACTION: interaction_id,
                   Kind.READOUT: readout_id}[req.start_kind]
        start_comp = builder(req.start_cell)
        start_si = self.table.interval_containing(start_comp, req.start_time)
        if start_si is None:
            raise PlanFailure(f"start {start_comp} occupied at t={req.start_time}")
        start = SearchState(start_comp, start_si.index, 0)

        g_best: dict[SearchState, int] = {start: req.start_time}
        parents: dict[SearchState, tuple[SearchState, tuple]] = {}
        h0 = self.heuristic(start)
        open_heap: list[tuple] = [(req.start_time + h0, h0, start)]
        while open_heap:
            f, h, state = heapq.heappop(open_heap)
            g = g_best[state]
            if f - h != g:
                continue  # stale entry, a cheaper arrival was queued later
            if self._is_goal(state, g):
                return self._extract(state, parents, g_best)
            for nxt, arr, action in self.successors(state, g):
                if arr < g_best.get(nxt, _INFINITE):
                    g_best[nxt] = arr
                    parents[nxt] = (state, action)
                    nh = self.heuristic(nxt)
                    heapq.heappush(open_heap, (arr + nh, nh, nxt))
        raise PlanFailure(
            f"no route from {start_comp} over {len(req.targets)} targets")

    def _is_goal(self, state: SearchState, g: int) -> bool:
        if state.mask != self.full or state.comp[0] != Kind.READOUT.value:
            return False
        hi = self.intervals(state.comp)[state.interval].span.end
        return g + self.req.terminal_pad <= hi

    def _extract(self, goal: SearchState, parents, g_best) -> PlanResult:
        t = self.timing
        chain = []
        state = goal
        while state in parents:
            prev, action = parents[state]
            chain.append((action, g_best[state]))
            state = prev
        chain.reverse()

        steps: list[PathStep] = []
        rest_comp = state.comp  # where the ancilla is resting between actions
        cursor = self.req.start_time
        for action, arrival in chain:
            if action[0] == "shuttle":
                _, ch, dep = action
                if dep > cursor:
                    steps.append(PathStep("WAIT", cursor, dep - cursor, rest_comp))
                steps.append(PathStep("SHUTTLE", dep, t.t_shuttle, ch))
                dest_cell = _other_end(ch, component_cell(rest_comp))
                rest_comp = intersection_id(dest_cell)
            elif action[0] == "displace":
                _, src, dst, dep = action
                if dep > cursor:
                    steps.append(PathStep("WAIT", cursor, dep - cursor, rest_comp))
                steps.append(PathStep("DISPLACE", dep, t.t_displace, src, dest=dst))
                rest_comp = dst
            else:
                _, comp, start, j = action
                if start > cursor:
                    steps.append(PathStep("WAIT", cursor, start - cursor, rest_comp))
                steps.append(PathStep("GATE", start, self.req.gate_duration,
                                      comp, target=j))
            cursor = arrival
        return PlanResult(steps=steps, parked=goal.comp, parked_time=cursor,
                          start_comp=state.comp)


_INFINITE = float("inf")


def _other_end(channel: ComponentId, cell: Cell) -> Cell:
    a = (channel[1], channel[2])
    b = (channel[3], channel[4])
    if cell == a:
        return b
    if cell == b:
        return a
    raise ValueError(f"{cell} is not an endpoint of {channel}")


def plan_route(layout: ChipLayout, table: ReservationTable,
               timing: TimingConfig, request: PlanRequest) -> PlanResult:
    """Search a time-optimal route for one ancilla; raises PlanFailure."""
    return _Search(layout, table, timing, request).run()


def route_successors(layout: ChipLayout, table: ReservationTable,
                     timing: TimingConfig, request: PlanRequest,
                     state: SearchState, g: int):
    """Successor states with earliest arrivals, exposed for inspection."""
    search = _Search(layout, table, timing, request)
    return [(nxt, arr) for nxt, arr, _ in search.successors(state, g)]


def route_heuristic(layout: ChipLayout, table: ReservationTable,
                    timing: TimingConfig, request: PlanRequest,
                    state: SearchState) -> int:
    """Admissible remaining-cost estimate for a search state."""
    return _Search(layout, table, timing, request).heuristic(state)
