"""CSS code definitions, validation, logical operators and chip placement.

A code file is plain text: a header line ``n k d name`` (d may be '-' when
unknown), an ``HX`` section with one row of n space-separated bits per X
check, an ``HZ`` section likewise, an optional ``LAYOUT`` section with one
``x y`` line per data qubit and an optional ``ORDER`` section with one line
per check row (X rows first) listing that check's data indices in visit
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gf2
from .chip import Cell, ChipLayout


class CodeError(ValueError):
    """Raised for malformed or inconsistent code definitions."""


@dataclass
class CssCode:
    hx: np.ndarray
    hz: np.ndarray
    name: str = "unnamed"
    d_claimed: Optional[int] = None
    ordered: bool = False
    # explicit per-row visit orders; populated for codes with fixed CNOT order
    x_orders: Optional[list[list[int]]] = None
    z_orders: Optional[list[list[int]]] = None
    # explicit data placement from the file's LAYOUT section
    file_layout: Optional[dict[int, Cell]] = None

    def __post_init__(self):
        self.hx = (np.atleast_2d(np.asarray(self.hx)) & 1).astype(np.uint8)
        self.hz = (np.atleast_2d(np.asarray(self.hz)) & 1).astype(np.uint8)
        if self.hx.size == 0:
            self.hx = self.hx.reshape(0, self.hz.shape[1])
        if self.hz.size == 0:
            self.hz = self.hz.reshape(0, self.hx.shape[1])
        if self.hx.shape[1] != self.hz.shape[1]:
            raise CodeError("Hx and Hz must have the same number of columns")
        bad = np.nonzero(gf2.matmul(self.hx, self.hz.T))
        if bad[0].size:
            i, j = int(bad[0][0]), int(bad[1][0])
            raise CodeError(
                f"Hx row {i} anticommutes with Hz row {j} (odd overlap)")
        for mat, label in ((self.hx, "Hx"), (self.hz, "Hz")):
            empty = np.nonzero(~mat.any(axis=1))[0] if mat.shape[0] else []
            if len(empty):
                raise CodeError(f"{label} row {int(empty[0])} has no support")
        for mat, orders, label in ((self.hx, self.x_orders, "X"),
                                   (self.hz, self.z_orders, "Z")):
            if orders is None:
                continue
            if len(orders) != mat.shape[0]:
                raise CodeError(f"{label} orders: expected {mat.shape[0]} rows")
            for row, seq in enumerate(orders):
                support = np.nonzero(mat[row])[0].tolist()
                if sorted(seq) != support:
                    raise CodeError(
                        f"{label} row {row}: ORDER entries do not match support")

    @property
    def n(self) -> int:
        return self.hx.shape[1]

    @property
    def k(self) -> int:
        return self.n - gf2.rank(self.hx) - gf2.rank(self.hz)

    @property
    def check_weight(self) -> int:
        weights = [0]
        if self.hx.shape[0]:
            weights.append(int(self.hx.sum(axis=1).max()))
        if self.hz.shape[0]:
            weights.append(int(self.hz.sum(axis=1).max()))
        return max(weights)

    def params(self) -> str:
        d = self.d_claimed if self.d_claimed is not None else "?"
        return f"[[{self.n},{self.k},{d}]]"


DataLayout = dict[int, Cell]


@dataclass
class CheckTask:
    """One parity-check row to be collected by one mobile ancilla."""

    ancilla: int
    basis: str  # "X" or "Z"
    targets: list[int]  # data-qubit indices, in visit order when ordered
    ordered: bool = False

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise CodeError(f"bad basis {self.basis!r}")
        if not self.targets:
            raise CodeError(f"ancilla {self.ancilla}: empty target list")
        if len(set(self.targets)) != len(self.targets):
            raise CodeError(f"ancilla {self.ancilla}: duplicate targets")


@dataclass
class LogicalOperators:
    """k symplectic pairs of logical X/Z representatives (rows, length n)."""

    x: np.ndarray
    z: np.ndarray

    @property
    def k(self) -> int:
        return self.x.shape[0]


def default_layout(code: CssCode, layout: ChipLayout) -> DataLayout:
    """Row-major square placement: qubit i at (i mod side, i // side)."""
    side = math.isqrt(code.n)
    if side * side < code.n:
        side += 1
    if layout.width < side or layout.height < math.ceil(code.n / side):
        raise CodeError(
            f"layout {layout.width}x{layout.height} too small for side {side}")
    return {i: (i % side, i // side) for i in range(code.n)}


def compute_logicals(code: CssCode) -> LogicalOperators:
    """Symplectic logical basis via GF(2) elimination.

    Logical X representatives span ker(Hz) modulo rowspace(Hx); logical Z
    likewise with the roles swapped. The two sets are then paired so that
    x[i] . z[j] = delta_ij.
    """
    n = code.n
    k = code.k
    if k == 0:
        empty = np.zeros((0, n), dtype=np.uint8)
        return LogicalOperators(x=empty, z=empty)

    def quotient_basis(kernel_of: np.ndarray, modulo: np.ndarray) -> np.ndarray:
        candidates = gf2.nullspace(kernel_of)
        chosen: list[np.ndarray] = []
        base = modulo if modulo.shape[0] else np.zeros((0, n), dtype=np.uint8)
        base_rank = gf2.rank(base)
        stack = base
        for cand in candidates:
            trial = np.vstack([stack, cand.reshape(1, -1)])
            if gf2.rank(trial) > base_rank + len(chosen):
                chosen.append(cand)
                stack = trial
            if len(chosen) == k:
                break
        return np.array(chosen, dtype=np.uint8)

    lx = quotient_basis(code.hz, code.hx)
    lz = quotient_basis(code.hx, code.hz)
    if lx.shape[0] != k or lz.shape[0] != k:
        raise CodeError("failed to extract a full logical basis")

    # pairing matrix M[i, j] = lx_i . lz_j; transform lz so M becomes identity
    m = gf2.matmul(lx, lz.T)
    lz = gf2.matmul(gf2.inverse(m).T, lz).astype(np.uint8)
    assert np.array_equal(gf2.matmul(lx, lz.T), np.eye(k, dtype=np.int64) % 2)
    return LogicalOperators(x=lx, z=lz)


def tasks_from_code(code: CssCode, data_layout: DataLayout) -> list[CheckTask]:
    """One task per check row; X rows first, matching measurement bookkeeping."""
    for i in range(code.n):
        if i not in data_layout:
            raise CodeError(f"data qubit {i} missing from layout")
    tasks: list[CheckTask] = []
    aid = 0
    for basis, mat, orders in (("X", code.hx, code.x_orders),
                               ("Z", code.hz, code.z_orders)):
        for row in range(mat.shape[0]):
            if orders is not None:
                support = list(orders[row])  # validated at construction
            else:
                support = [int(i) for i in np.nonzero(mat[row])[0]]
            tasks.append(CheckTask(ancilla=aid, basis=basis,
                                   targets=support, ordered=code.ordered))
            aid += 1
    return tasks


# ---------------------------------------------------------------------------
# rotated surface code family [[d^2, 1, d]]


def surface_code(d: int) -> tuple[CssCode, DataLayout]:
    """Rotated surface code with the hook-avoiding CNOT visit order.

    Data qubit r*d + c sits at cell (c, r). Plaquettes live on the (d+1)^2
    corner grid; the checkerboard puts X half-plaquettes on the top/bottom
    boundary and Z half-plaquettes on the left/right boundary. X checks
    visit NW, NE, SW, SE ("Z" sweep) and Z checks NW, SW, NE, SE ("N"
    sweep), the standard ordering that keeps hook errors off the logicals.
    """
    if d < 3 or d % 2 == 0:
        raise CodeError(f"surface code distance must be odd and >= 3, got {d}")
    n = d * d

    def qubit(r: int, c: int) -> int:
        return r * d + c

    x_rows: list[np.ndarray] = []
    z_rows: list[np.ndarray] = []
    x_orders: list[list[int]] = []
    z_orders: list[list[int]] = []
    for i in range(d + 1):       # row boundary index
        for j in range(d + 1):   # column boundary index
            cells = [(r, c)
                     for r in (i - 1, i) for c in (j - 1, j)
                     if 0 <= r < d and 0 <= c < d]
            if len(cells) not in (2, 4):
                continue  # corners of the corner grid
            is_x = (i + j) % 2 == 1
            if len(cells) == 2:
                on_top_bottom = i in (0, d)
                if is_x and not on_top_bottom:
                    continue
                if not is_x and on_top_bottom:
                    continue
            row = np.zeros(n, dtype=np.uint8)
            for r, c in cells:
                row[qubit(r, c)] = 1
            nw, ne = (i - 1, j - 1), (i - 1, j)
            sw, se = (i, j - 1), (i, j)
            sweep = (nw, ne, sw, se) if is_x else (nw, sw, ne, se)
            order = [qubit(r, c) for r, c in sweep if (r, c) in cells]
            if is_x:
                x_rows.append(row)
                x_orders.append(order)
            else:
                z_rows.append(row)
                z_orders.append(order)

    code = CssCode(hx=np.array(x_rows), hz=np.array(z_rows),
                   name=f"surface_d{d}", d_claimed=d, ordered=True,
                   x_orders=x_orders, z_orders=z_orders)
    layout = {qubit(r, c): (c, r) for r in range(d) for c in range(d)}
    return code, layout


# ---------------------------------------------------------------------------
# file IO


def load_css(path: str) -> CssCode:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    return parse_css(lines, name_hint=path)


def parse_css(lines: list[str], name_hint: str = "<string>") -> CssCode:
    content = [ln.strip() for ln in lines
               if ln.strip() and not ln.lstrip().startswith("#")]
    if not content:
        raise CodeError(f"{name_hint}: empty code file")
    header = content[0].split()
    if len(header) < 4:
        raise CodeError(f"{name_hint}: header must be 'n k d name'")
    try:
        n, k_claim = int(header[0]), int(header[1])
        d_claimed = None if header[2] in ("-", "?") else int(header[2])
    except ValueError as exc:
        raise CodeError(f"{name_hint}: bad header numbers: {exc}") from exc
    name = " ".join(header[3:])

    sections: dict[str, list[str]] = {}
    current: Optional[str] = None
    for line in content[1:]:
        if line.upper() in ("HX", "HZ", "LAYOUT", "ORDER"):
            current = line.upper()
            sections[current] = []
        elif current is None:
            raise CodeError(f"{name_hint}: data before any section header")
        else:
            sections[current].append(line)
    if "HX" not in sections or "HZ" not in sections:
        raise CodeError(f"{name_hint}: HX and HZ sections are required")

    def parse_matrix(rows: list[str], label: str) -> np.ndarray:
        parsed = []
        for line in rows:
            bits = line.split()
            if len(bits) != n:
                raise CodeError(f"{name_hint}: {label} row has {len(bits)} "
                                f"entries, expected {n}")
            if any(b not in ("0", "1") for b in bits):
                raise CodeError(f"{name_hint}: {label} entries must be 0/1")
            parsed.append([int(b) for b in bits])
        arr = np.array(parsed, dtype=np.uint8)
        return arr.reshape(len(parsed), n)

    hx = parse_matrix(sections["HX"], "HX")
    hz = parse_matrix(sections["HZ"], "HZ")

    x_orders = z_orders = None
    ordered = False
    if "ORDER" in sections:
        rows = sections["ORDER"]
        if len(rows) != hx.shape[0] + hz.shape[0]:
            raise CodeError(f"{name_hint}: ORDER needs one line per check row")
        seqs = [[int(t) for t in line.split()] for line in rows]
        x_orders = seqs[:hx.shape[0]]
        z_orders = seqs[hx.shape[0]:]
        ordered = True

    code = CssCode(hx=hx, hz=hz, name=name, d_claimed=d_claimed,
                   ordered=ordered, x_orders=x_orders, z_orders=z_orders)
    if code.k != k_claim:
        raise CodeError(f"{name_hint}: header claims k={k_claim} "
                        f"but rank computation gives k={code.k}")

    if "LAYOUT" in sections:
        rows = sections["LAYOUT"]
        if len(rows) != n:
            raise CodeError(f"{name_hint}: LAYOUT needs one line per data qubit")
        coords = []
        for line in rows:
            parts = line.split()
            if len(parts) != 2:
                raise CodeError(f"{name_hint}: LAYOUT lines are 'x y'")
            coords.append((int(parts[0]), int(parts[1])))
        if len(set(coords)) != n:
            raise CodeError(f"{name_hint}: LAYOUT coordinates must be distinct")
        code.file_layout = {i: coords[i] for i in range(n)}
    return code


def layout_for(code: CssCode, chip: ChipLayout) -> DataLayout:
    """The code file's LAYOUT section when present, else the row-major rule."""
    explicit = code.file_layout
    if explicit is not None:
        for i, cell in explicit.items():
            if not chip.in_bounds(cell):
                raise CodeError(f"layout places qubit {i} at {cell}, "
                                f"outside {chip.width}x{chip.height}")
        return dict(explicit)
    return default_layout(code, chip)
