import random

from shuttleplan.tsp import OpenPathTable, manhattan, path_distance, solve_tsp
from oracles import brute_force_open_path


def test_empty_pending():
    result = solve_tsp((0, 0), set())
    assert result.order == [] and result.distance == 0 and result.exact


def test_collinear_pair():
    result = solve_tsp((0, 0), {(0, 1), (0, 2)})
    assert result.order == [(0, 1), (0, 2)]
    assert result.distance == 2


def test_square_block_from_corner():
    cells = {(0, 0), (1, 0), (0, 1), (1, 1)}
    result = solve_tsp((0, 0), cells)
    assert result.distance == 3


def test_matches_brute_force_on_8_targets():
    rng = random.Random(11)
    for _ in range(100):
        origin = (rng.randrange(10), rng.randrange(10))
        cells = set()
        while len(cells) < 8:
            cells.add((rng.randrange(10), rng.randrange(10)))
        cells.discard(origin)
        result = solve_tsp(origin, cells)
        assert result.exact
        assert result.distance == brute_force_open_path(origin, sorted(cells))
        assert sorted(result.order) == sorted(cells)
        assert path_distance(origin, result.order) == result.distance


def test_fallback_beyond_exact_limit():
    rng = random.Random(2)
    cells = set()
    while len(cells) < 15:
        cells.add((rng.randrange(12), rng.randrange(12)))
    result = solve_tsp((0, 0), cells)
    assert not result.exact
    assert sorted(result.order) == sorted(cells)
    assert path_distance((0, 0), result.order) == result.distance


def test_open_path_table_matches_solver():
    rng = random.Random(5)
    for _ in range(25):
        targets = []
        seen = set()
        while len(targets) < 6:
            cell = (rng.randrange(8), rng.randrange(8))
            if cell not in seen:
                seen.add(cell)
                targets.append(cell)
        table = OpenPathTable(targets)
        full = (1 << 6) - 1
        for mask in (full, 0b010101, 0b000011, 0):
            cells = {targets[j] for j in range(6) if mask & (1 << j)}
            origin = (rng.randrange(8), rng.randrange(8))
            assert table.min_distance(origin, mask) == solve_tsp(origin, cells).distance


def test_manhattan():
    assert manhattan((0, 0), (2, 3)) == 5
