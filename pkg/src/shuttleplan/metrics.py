"""Schedule quality statistics: shuttle counts, ideal bounds, overheads.

The ideal bound assumes ancillae pass freely through each other (no
reservations) and is the exact minimum open-path edge count over each
ancilla's targets. Two counting conventions exist because the edge-count
anchor in the literature does not state one; the default "from-home"
convention includes the home-to-first-target leg and ignores the final
parking leg, the alternative "targets-only" convention counts only travel
between targets. Reports state which convention is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .compiler import Schedule
from .css import CheckTask, CssCode
from .tsp import manhattan, solve_tsp

CONVENTIONS = ("from-home", "targets-only")


@dataclass
class ShuttleStats:
    per_ancilla: dict[int, float]  # mean unit edges per round
    mean: float
    max: float
    makespan: int
    rounds: int
    overhead: float | None = None  # achieved mean / ideal mean, when known

    def __post_init__(self):
        if self.per_ancilla:
            assert self.mean <= self.max + 1e-12


def shuttle_stats(schedule: Schedule,
                  ideal: dict[int, float] | None = None) -> ShuttleStats:
    """Count unit-edge shuttles per ancilla per round."""
    per = {}
    for aid, events in schedule.events.items():
        edges = sum(1 for ev in events if ev.kind == "SHUTTLE")
        per[aid] = edges / schedule.rounds
    mean = sum(per.values()) / len(per) if per else 0.0
    peak = max(per.values()) if per else 0.0
    overhead = None
    if ideal is not None:
        ideal_mean = sum(ideal.values()) / len(ideal) if ideal else 0.0
        overhead = mean / ideal_mean if ideal_mean else math.inf
    return ShuttleStats(per_ancilla=per, mean=mean, max=peak,
                        makespan=schedule.makespan, rounds=schedule.rounds,
                        overhead=overhead)


def ideal_lower_bound(tasks: list[CheckTask], data_cells: dict[int, tuple],
                      homes: dict[int, tuple], *,
                      convention: str = "from-home",
                      exact_limit: int = 12) -> dict[int, int]:
    """Collision-free minimal edge count per ancilla.

    Ordered tasks use their forced visit sequence; unordered tasks get the
    exact open-path optimum (bitmask DP up to `exact_limit` targets).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    out: dict[int, int] = {}
    for task in tasks:
        cells = [data_cells[i] for i in task.targets]
        if task.ordered:
            legs = [manhattan(a, b) for a, b in zip(cells, cells[1:])]
            between = sum(legs)
            home_leg = manhattan(homes[task.ancilla], cells[0])
        else:
            from_home = solve_tsp(homes[task.ancilla], set(cells),
                                  exact_limit=exact_limit)
            if convention == "from-home":
                out[task.ancilla] = from_home.distance
                continue
            best = None
            for first in cells:
                tour = solve_tsp(first, set(cells) - {first},
                                 exact_limit=exact_limit)
                if best is None or tour.distance < best:
                    best = tour.distance
            out[task.ancilla] = best or 0
            continue
        if convention == "from-home":
            out[task.ancilla] = home_leg + between
        else:
            out[task.ancilla] = between
    return out


def ideal_for_schedule(schedule: Schedule, *,
                       convention: str = "from-home") -> dict[int, int]:
    return ideal_lower_bound(schedule.tasks, schedule.data_cells,
                             schedule.homes, convention=convention)


@dataclass
class OverheadReport:
    per_code: dict[str, float]
    geomean: float
    convention: str


def overhead_report(entries: dict[str, tuple[ShuttleStats, dict[int, float]]],
                    convention: str = "from-home") -> OverheadReport:
    """Geometric mean of achieved/ideal mean-shuttle ratios across codes."""
    ratios: dict[str, float] = {}
    for name, (stats, ideal) in entries.items():
        ideal_mean = sum(ideal.values()) / len(ideal) if ideal else 0.0
        ratios[name] = stats.mean / ideal_mean if ideal_mean else math.inf
    finite = [r for r in ratios.values() if math.isfinite(r) and r > 0]
    if finite:
        geomean = math.exp(sum(math.log(r) for r in finite) / len(finite))
    else:
        geomean = math.nan
    return OverheadReport(per_code=ratios, geomean=geomean,
                          convention=convention)


def efficiency_factor(code: CssCode) -> float:
    """k d^2 / n, the encoding-efficiency figure of merit (surface code: 1)."""
    if code.d_claimed is None:
        raise ValueError(f"{code.name}: no distance recorded")
    return code.k * code.d_claimed ** 2 / code.n


@dataclass
class CodeStats:
    name: str
    n: int
    k: int
    d: int | None
    check_weight: int
    mean_shuttles: float
    max_shuttles: float
    ideal_mean: float
    overhead: float
    efficiency: float | None
    makespan: int

    ROW_FIELDS = ("name", "n", "k", "d", "check_weight", "mean_shuttles",
                  "max_shuttles", "ideal_mean", "overhead", "efficiency",
                  "makespan")

    def row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return "-"
            if isinstance(v, float):
                return f"{v:.3f}"
            return str(v)
        return [fmt(getattr(self, f)) for f in self.ROW_FIELDS]


def code_stats(code: CssCode, schedule: Schedule, *,
               convention: str = "from-home") -> CodeStats:
    ideal = ideal_for_schedule(schedule, convention=convention)
    stats = shuttle_stats(schedule, ideal)
    ideal_mean = sum(ideal.values()) / len(ideal) if ideal else 0.0
    try:
        eff = efficiency_factor(code)
    except ValueError:
        eff = None
    return CodeStats(name=code.name, n=code.n, k=code.k, d=code.d_claimed,
                     check_weight=code.check_weight, mean_shuttles=stats.mean,
                     max_shuttles=stats.max, ideal_mean=ideal_mean,
                     overhead=stats.overhead, efficiency=eff,
                     makespan=schedule.makespan)


def stats_table(rows: list[CodeStats], fmt: str = "text") -> str:
    header = list(CodeStats.ROW_FIELDS)
    table = [header] + [r.row() for r in rows]
    if fmt == "csv":
        return "\n".join(",".join(row) for row in table) + "\n"
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
             for row in table]
    return "\n".join(lines) + "\n"
