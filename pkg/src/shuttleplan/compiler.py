"""Full syndrome-extraction scheduling for one CSS code on one chip.

Ancillae are planned one at a time in a configurable priority order; each
committed route becomes a reservation the remaining searches must avoid.
Unplanned ancillae block their home readout for all time so nobody routes
through a qubit that has not moved yet; the block is released the moment
that ancilla is planned.

The one-round schedule is replicated by pure time translation: round r is
round 0 shifted by r times the round makespan, which stays collision-free
because every occupancy of round r lies inside [r*M, (r+1)*M).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .chip import (Cell, ChipLayout, ComponentId, Kind, TimingConfig,
                   build_grid, component_cell, intersection_id, readout_id)
from .css import CheckTask, CssCode, DataLayout, tasks_from_code
from .intervals import INF, ReservationTable, TimeInterval
from .planner import (PlanFailure, PlanRequest, PlanResult, SearchState,
                      plan_route, route_heuristic)

ORDER_POLICIES = ("longest", "index", "random")


class CompileError(RuntimeError):
    def __init__(self, message: str, ancilla: Optional[int] = None):
        super().__init__(message)
        self.ancilla = ancilla


@dataclass(frozen=True)
class Event:
    qubit: str   # "a<i>"
    kind: str    # INIT DISPLACE SHUTTLE H CX WAIT MEASURE
    t: int
    duration: int
    comp: ComponentId
    dest: Optional[ComponentId] = None  # displace target layer
    partner: Optional[int] = None       # data index for CX

    @property
    def end(self) -> int:
        return self.t + self.duration


@dataclass
class Schedule:
    events: dict[int, list[Event]]  # ancilla -> time-ordered events
    tasks: list[CheckTask]
    data_cells: dict[int, Cell]     # chip coordinates (margin applied)
    homes: dict[int, Cell]
    chip: ChipLayout
    timing: TimingConfig
    tailored: bool
    rounds: int
    round_makespan: int
    makespan: int
    provenance: dict = field(default_factory=dict)

    def all_events(self) -> list[Event]:
        merged = [ev for evs in self.events.values() for ev in evs]
        merged.sort(key=lambda e: (e.t, int(e.qubit[1:]), e.kind))
        return merged

    def ancilla_basis(self, ancilla: int) -> str:
        return self.tasks[ancilla].basis

    # -- serialization -------------------------------------------------------

    def header_lines(self) -> list[str]:
        lines = ["shuttleplan schedule v1"]
        for key in sorted(self.provenance):
            lines.append(f"{key} = {self.provenance[key]}")
        lines.append(f"rounds = {self.rounds}")
        lines.append(f"round_makespan_ns = {self.round_makespan}")
        lines.append(f"makespan_ns = {self.makespan}")
        return lines

    def to_text(self) -> str:
        out = [f"# {line}" for line in self.header_lines()]
        for ev in self.all_events():
            comp = comp_str(ev.comp)
            if ev.dest is not None:
                comp = f"{comp}>{comp_str(ev.dest)}"
            fields = [ev.qubit, ev.kind, str(ev.t), str(ev.duration), comp]
            if ev.partner is not None:
                fields.append(f"d{ev.partner}")
            out.append(" ".join(fields))
        return "\n".join(out) + "\n"

    def to_json(self) -> str:
        events = []
        for ev in self.all_events():
            events.append({
                "qubit": ev.qubit, "kind": ev.kind, "t": ev.t,
                "duration": ev.duration, "comp": comp_str(ev.comp),
                "dest": comp_str(ev.dest) if ev.dest is not None else None,
                "partner": ev.partner,
            })
        doc = {
            "format": "shuttleplan schedule v1",
            "provenance": self.provenance,
            "rounds": self.rounds,
            "round_makespan_ns": self.round_makespan,
            "makespan_ns": self.makespan,
            "events": events,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def comp_str(comp: ComponentId) -> str:
    if comp[0] == Kind.CHANNEL.value:
        return f"channel:{comp[1]},{comp[2]}-{comp[3]},{comp[4]}"
    return f"{comp[0]}:{comp[1]},{comp[2]}"


# ---------------------------------------------------------------------------
# home assignment and planning order


def assign_homes(tasks: list[CheckTask], chip: ChipLayout,
                 data_cells: dict[int, Cell]) -> dict[int, Cell]:
    """Distinct home cells, greedily nearest each task's target centroid."""
    cells = list(chip.cells())
    if len(tasks) > len(cells):
        raise CompileError(
            f"{len(tasks)} ancillae need homes but the chip has {len(cells)} cells")
    taken: set[Cell] = set()
    homes: dict[int, Cell] = {}
    for task in sorted(tasks, key=lambda t: t.ancilla):
        pts = [data_cells[i] for i in task.targets]
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        best = min((c for c in cells if c not in taken),
                   key=lambda c: ((c[0] - cx) ** 2 + (c[1] - cy) ** 2, c))
        homes[task.ancilla] = best
        taken.add(best)
    return homes


def _single_agent_bound(chip: ChipLayout, timing: TimingConfig,
                        request: PlanRequest, home: Cell) -> int:
    state = SearchState(readout_id(home), 0, 0)
    return route_heuristic(chip, ReservationTable(), timing, request, state)


def planning_order(ids: list[int], bounds: dict[int, int],
                   policy: str, rng) -> list[int]:
    ids = sorted(ids)
    if policy == "index":
        return ids
    if policy == "longest":
        return sorted(ids, key=lambda a: (-bounds[a], a))
    if policy == "random":
        rng.shuffle(ids)
        return ids
    raise CompileError(f"unknown order policy {policy!r}")


# ---------------------------------------------------------------------------
# per-ancilla circuit shape


def _flanked(task: CheckTask, tailored: bool) -> bool:
    """Whether the ancilla circuit opens and closes with an H at the readout."""
    return task.basis == "X" or (task.basis == "Z" and tailored)


def _gate_duration(task: CheckTask, timing: TimingConfig, tailored: bool) -> int:
    if task.basis == "Z" and tailored:
        return timing.t_cx + 2 * timing.t_h
    return timing.t_cx


def _tailored_gates(task: CheckTask, tailored: bool) -> bool:
    return task.basis == "Z" and tailored


def build_request(task: CheckTask, home: Cell, data_cells: dict[int, Cell],
                  timing: TimingConfig, tailored: bool,
                  gate_windows: Optional[dict[Cell, int]] = None) -> PlanRequest:
    start_time = timing.t_init + (timing.t_h if _flanked(task, tailored) else 0)
    pad = timing.t_meas + (timing.t_h if _flanked(task, tailored) else 0)
    return PlanRequest(
        start_cell=home, start_kind=Kind.READOUT, start_time=start_time,
        targets=[data_cells[i] for i in task.targets], ordered=task.ordered,
        gate_duration=_gate_duration(task, timing, tailored), terminal_pad=pad,
        gate_windows=gate_windows or {})


def _events_for(task: CheckTask, home: Cell, result: PlanResult,
                timing: TimingConfig, tailored: bool) -> list[Event]:
    q = f"a{task.ancilla}"
    flank = _flanked(task, tailored)
    sandwich = _tailored_gates(task, tailored)
    home_ro = readout_id(home)
    events = [Event(q, "INIT", 0, timing.t_init, home_ro)]
    cursor = timing.t_init
    if flank:
        events.append(Event(q, "H", cursor, timing.t_h, home_ro))
        cursor += timing.t_h
    for step in result.steps:
        if step.kind == "WAIT":
            events.append(Event(q, "WAIT", step.start, step.duration, step.comp))
        elif step.kind == "SHUTTLE":
            events.append(Event(q, "SHUTTLE", step.start, step.duration, step.comp))
        elif step.kind == "DISPLACE":
            events.append(Event(q, "DISPLACE", step.start, step.duration,
                                step.comp, dest=step.dest))
        else:  # GATE
            data = task.targets[step.target]
            if sandwich:
                events.append(Event(q, "H", step.start, timing.t_h, step.comp))
                events.append(Event(q, "CX", step.start + timing.t_h,
                                    timing.t_cx, step.comp, partner=data))
                events.append(Event(q, "H", step.start + timing.t_h + timing.t_cx,
                                    timing.t_h, step.comp))
            else:
                events.append(Event(q, "CX", step.start, timing.t_cx,
                                    step.comp, partner=data))
    cursor = result.parked_time
    if flank:
        events.append(Event(q, "H", cursor, timing.t_h, result.parked))
        cursor += timing.t_h
    events.append(Event(q, "MEASURE", cursor, timing.t_meas, result.parked))
    return events


def ancilla_occupancy(events: list[Event]) -> list[tuple[ComponentId, TimeInterval]]:
    """Component occupancies implied by one ancilla's event list.

    The ancilla holds its component from arrival until departure, a channel
    for the whole traversal, and both layers of a displace for its whole
    duration.
    """
    out: list[tuple[ComponentId, TimeInterval]] = []
    current = events[0].comp
    r0 = events[0].t
    for ev in events:
        if ev.kind == "SHUTTLE":
            if ev.t > r0:
                out.append((current, TimeInterval(r0, ev.t)))
            out.append((ev.comp, TimeInterval(ev.t, ev.end)))
            a = (ev.comp[1], ev.comp[2])
            b = (ev.comp[3], ev.comp[4])
            here = component_cell(current)
            current = intersection_id(b if here == a else a)
            r0 = ev.end
        elif ev.kind == "DISPLACE":
            out.append((current, TimeInterval(r0, ev.end)))
            current = ev.dest
            r0 = ev.t
    out.append((current, TimeInterval(r0, events[-1].end)))
    return out


# ---------------------------------------------------------------------------
# compilation


def place_on_chip(data_layout: DataLayout, margin: int) -> tuple[ChipLayout, dict[int, Cell]]:
    """Chip sized to the data bounding box plus margin; shifted placement."""
    if margin < 0:
        raise CompileError("margin must be >= 0")
    xs = [c[0] for c in data_layout.values()]
    ys = [c[1] for c in data_layout.values()]
    dx, dy = margin - min(xs), margin - min(ys)
    width = max(xs) - min(xs) + 1 + 2 * margin
    height = max(ys) - min(ys) + 1 + 2 * margin
    chip = build_grid(width, height)
    return chip, {i: (c[0] + dx, c[1] + dy) for i, c in data_layout.items()}


def schedule_round(code: CssCode, data_layout: DataLayout,
                   timing: TimingConfig, *, margin: int = 1,
                   order_policy: str = "longest", tailored: bool = True,
                   seed: int = 0) -> Schedule:
    """Plan one syndrome-extraction round for every check of the code.

    Planning runs in two phases, all X checks before all Z checks, and each
    Z ancilla may gate a data qubit only after that qubit's last X-check
    gate. Every data qubit therefore sees its X CNOTs strictly before its Z
    CNOTs, which keeps every overlapping X/Z check pair's shared-qubit
    crossing count even; an odd crossing leaks an ancilla Pauli into the
    other check's measured operator and randomizes its outcome. Within each
    phase the configured priority order applies.
    """
    import random as _random

    if order_policy not in ORDER_POLICIES:
        raise CompileError(f"order policy must be one of {ORDER_POLICIES}")
    tasks = tasks_from_code(code, data_layout)
    chip, data_cells = place_on_chip(data_layout, margin)
    homes = assign_homes(tasks, chip, data_cells)
    rng = _random.Random(seed)

    table = ReservationTable()
    home_blocks = {}
    for task in tasks:
        block = TimeInterval(0, INF)
        table.reserve(readout_id(homes[task.ancilla]), block)
        home_blocks[task.ancilla] = block

    events: dict[int, list[Event]] = {}
    order: list[int] = []
    gate_windows: dict[Cell, int] = {}
    for basis in ("X", "Z"):
        ids = [t.ancilla for t in tasks if t.basis == basis]
        windows = gate_windows if basis == "Z" else None
        requests = {a: build_request(tasks[a], homes[a], data_cells, timing,
                                     tailored, windows) for a in ids}
        bounds = {a: _single_agent_bound(chip, timing, requests[a], homes[a])
                  for a in ids}
        for aid in planning_order(ids, bounds, order_policy, rng):
            order.append(aid)
            table.release(readout_id(homes[aid]), home_blocks[aid])
            try:
                result = plan_route(chip, table, timing, requests[aid])
            except PlanFailure as exc:
                raise CompileError(f"ancilla a{aid}: {exc}", ancilla=aid) from exc
            evs = _events_for(tasks[aid], homes[aid], result, timing, tailored)
            for comp, span in ancilla_occupancy(evs):
                table.reserve(comp, span)
            events[aid] = evs
            if basis == "X":
                for ev in evs:
                    if ev.kind == "CX":
                        cell = data_cells[ev.partner]
                        gate_windows[cell] = max(gate_windows.get(cell, 0),
                                                 ev.end)

    makespan = max(ev.end for evs in events.values() for ev in evs)
    provenance = {
        "code": code.name, "params": code.params(),
        "chip": f"{chip.width}x{chip.height}", "margin": margin,
        "order_policy": order_policy, "seed": seed, "tailored": tailored,
        "ancilla_order": ",".join(f"a{a}" for a in order),
        "timing": ",".join(f"{k}={v}" for k, v in
                           sorted(vars(timing).items())),
    }
    return Schedule(events=events, tasks=tasks, data_cells=data_cells,
                    homes=homes, chip=chip, timing=timing, tailored=tailored,
                    rounds=1, round_makespan=makespan, makespan=makespan,
                    provenance=provenance)


def replicate_rounds(schedule: Schedule, rounds: int) -> Schedule:
    """Repeat the round pattern back to back, one period per round."""
    if rounds < 1:
        raise CompileError("rounds must be >= 1")
    if schedule.rounds != 1:
        raise CompileError("replicate_rounds expects a single-round schedule")
    if rounds == 1:
        return schedule
    period = schedule.round_makespan
    events: dict[int, list[Event]] = {}
    for aid, evs in schedule.events.items():
        shifted: list[Event] = []
        for r in range(rounds):
            offset = r * period
            shifted.extend(replace(ev, t=ev.t + offset) for ev in evs)
        events[aid] = shifted
    return replace(schedule, events=events, rounds=rounds,
                   makespan=rounds * period)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)


def validate_schedule(schedule: Schedule) -> ValidationReport:
    """Independent sweep: collisions, completion, order, contiguity, timing."""
    report = ValidationReport()
    period = schedule.round_makespan
    occupancies: dict[ComponentId, list[tuple[TimeInterval, str]]] = {}

    for aid, events in schedule.events.items():
        task = schedule.tasks[aid]
        q = f"a{aid}"
        if not events:
            report.add(f"{q}: no events")
            continue
        for rnd in range(schedule.rounds):
            lo, hi = rnd * period, (rnd + 1) * period
            round_events = [ev for ev in events if lo <= ev.t < hi]
            _check_round(report, schedule, task, round_events, rnd, lo)
        # occupancy built per round so residencies never span a round boundary
        for rnd in range(schedule.rounds):
            lo, hi = rnd * period, (rnd + 1) * period
            round_events = [ev for ev in events if lo <= ev.t < hi]
            if not round_events:
                continue
            try:
                spans = ancilla_occupancy(round_events)
            except Exception as exc:  # chained event defects surface here
                report.add(f"{q} round {rnd}: cannot derive occupancy: {exc}")
                continue
            for comp, span in spans:
                occupancies.setdefault(comp, []).append((span, f"{q} round {rnd}"))

    for comp, spans in occupancies.items():
        spans.sort(key=lambda item: (item[0].start, item[0].end))
        for (a, owner_a), (b, owner_b) in zip(spans, spans[1:]):
            if a.overlaps(b):
                report.add(
                    f"collision on {comp_str(comp)}: {owner_a} "
                    f"[{a.start},{a.end}) vs {owner_b} [{b.start},{b.end})")

    _check_gate_phases(report, schedule)
    return report


def _check_gate_phases(report: ValidationReport, schedule: Schedule) -> None:
    """Per data qubit and round, every X-check CX must precede every Z CX.

    A Z gate landing between two X gates of an overlapping check (or vice
    versa) injects the other ancilla's Pauli into the measured operator and
    makes the outcome non-deterministic.
    """
    period = schedule.round_makespan
    for rnd in range(schedule.rounds):
        last_x: dict[int, int] = {}
        first_z: dict[int, int] = {}
        for aid, events in schedule.events.items():
            basis = schedule.tasks[aid].basis
            for ev in events:
                if ev.kind != "CX" or not rnd * period <= ev.t < (rnd + 1) * period:
                    continue
                if basis == "X":
                    last_x[ev.partner] = max(last_x.get(ev.partner, 0), ev.end)
                else:
                    first_z[ev.partner] = min(first_z.get(ev.partner, ev.t), ev.t)
        for data, t_z in first_z.items():
            if data in last_x and t_z < last_x[data]:
                report.add(f"round {rnd}: d{data} receives a Z-check CX at "
                           f"{t_z} before its last X-check CX ends at "
                           f"{last_x[data]}")


def _check_round(report: ValidationReport, schedule: Schedule, task: CheckTask,
                 events: list[Event], rnd: int, t0: int) -> None:
    q = f"a{task.ancilla}"
    where = f"{q} round {rnd}"
    timing = schedule.timing
    if not events:
        report.add(f"{where}: empty round")
        return
    if events[0].kind != "INIT" or events[-1].kind != "MEASURE":
        report.add(f"{where}: round must run INIT..MEASURE")
        return
    if events[0].t != t0:
        report.add(f"{where}: INIT at {events[0].t}, expected {t0}")

    cursor = events[0].t
    current = events[0].comp
    gated: list[int] = []
    for ev in events:
        if ev.t < cursor:
            report.add(f"{where}: {ev.kind} at {ev.t} overlaps previous event")
        cursor = max(cursor, ev.end)
        if ev.kind == "SHUTTLE":
            if ev.duration != timing.t_shuttle:
                report.add(f"{where}: shuttle duration {ev.duration}")
            a = (ev.comp[1], ev.comp[2])
            b = (ev.comp[3], ev.comp[4])
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                report.add(f"{where}: channel {comp_str(ev.comp)} spans more "
                           f"than one edge")
            if current[0] != Kind.INTERSECTION.value:
                report.add(f"{where}: shuttle from {comp_str(current)}")
                continue
            here = component_cell(current)
            if here == a:
                current = intersection_id(b)
            elif here == b:
                current = intersection_id(a)
            else:
                report.add(f"{where}: shuttle on {comp_str(ev.comp)} does not "
                           f"touch {comp_str(current)}")
        elif ev.kind == "DISPLACE":
            if ev.duration != timing.t_displace:
                report.add(f"{where}: displace duration {ev.duration}")
            if ev.comp != current:
                report.add(f"{where}: displace leaves {comp_str(ev.comp)} but "
                           f"ancilla rests at {comp_str(current)}")
            if ev.dest is None or component_cell(ev.dest) != component_cell(ev.comp):
                report.add(f"{where}: displace must stay within one cell")
            else:
                current = ev.dest
        elif ev.kind == "CX":
            if ev.comp != current or current[0] != Kind.INTERACTION.value:
                report.add(f"{where}: CX outside the interaction zone")
            elif ev.partner is None:
                report.add(f"{where}: CX without a data partner")
            else:
                cell = schedule.data_cells.get(ev.partner)
                if cell != component_cell(current):
                    report.add(f"{where}: CX with d{ev.partner} at "
                               f"{cell}, ancilla at {component_cell(current)}")
                gated.append(ev.partner)
        elif ev.kind in ("INIT", "MEASURE", "H", "WAIT"):
            if ev.comp != current:
                report.add(f"{where}: {ev.kind} at {comp_str(ev.comp)} but "
                           f"ancilla rests at {comp_str(current)}")
            if ev.kind in ("INIT", "MEASURE") and current[0] != Kind.READOUT.value:
                report.add(f"{where}: {ev.kind} outside a readout zone")
        else:
            report.add(f"{where}: unknown event kind {ev.kind}")

    if sorted(gated) != sorted(task.targets):
        missing = set(task.targets) - set(gated)
        extra = set(gated) - set(task.targets)
        report.add(f"{where}: incomplete check, missing={sorted(missing)} "
                   f"extra={sorted(extra)}")
    elif task.ordered and gated != list(task.targets):
        report.add(f"{where}: CX order {gated} != required {list(task.targets)}")

    if schedule.tailored and task.basis == "Z":
        _check_tailoring(report, where, events)


def _check_tailoring(report: ValidationReport, where: str,
                     events: list[Event]) -> None:
    """Every movement period of a tailored Z ancilla is flanked by H gates."""
    kinds = [ev.kind for ev in events]
    moves = {"SHUTTLE", "DISPLACE", "WAIT"}
    for i, kind in enumerate(kinds):
        if kind not in moves:
            continue
        prev = next((k for k in reversed(kinds[:i]) if k not in moves), None)
        nxt = next((k for k in kinds[i + 1:] if k not in moves), None)
        if prev not in ("H",) or nxt not in ("H",):
            report.add(f"{where}: movement at index {i} not flanked by H "
                       f"(prev={prev}, next={nxt})")
            return
