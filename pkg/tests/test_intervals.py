import random

import pytest
from hypothesis import given, settings, strategies as st

from shuttleplan.intervals import (INF, ReservationError, ReservationTable,
                                   TimeInterval)
from oracles import bitmap_safe_intervals


def spans(table, comp):
    return [(si.span.start, si.span.end) for si in table.safe_intervals(comp)]


def test_empty_component_is_one_unbounded_interval():
    table = ReservationTable()
    assert spans(table, "c") == [(0, INF)]
    si = table.interval_containing("c", 12345)
    assert si.index == 0


def test_complement_of_single_reservation():
    table = ReservationTable()
    table.reserve("c", TimeInterval(100, 200))
    assert spans(table, "c") == [(0, 100), (200, INF)]


def test_adjacent_reservations_leave_no_gap():
    table = ReservationTable()
    table.reserve("c", TimeInterval(0, 50))
    table.reserve("c", TimeInterval(50, 80))
    assert spans(table, "c") == [(80, INF)]


def test_double_reserve_is_an_error():
    table = ReservationTable()
    table.reserve("c", TimeInterval(0, 100))
    with pytest.raises(ReservationError, match=r"\[0, 100\)"):
        table.reserve("c", TimeInterval(0, 100))


def test_partial_overlap_is_an_error():
    table = ReservationTable()
    table.reserve("c", TimeInterval(0, 100))
    with pytest.raises(ReservationError):
        table.reserve("c", TimeInterval(99, 150))


def test_reserve_to_infinity_blocks_tail():
    table = ReservationTable()
    table.reserve("c", TimeInterval(500, INF))
    assert spans(table, "c") == [(0, 500)]
    assert table.interval_containing("c", 600) is None


def test_release_restores_infinite_interval():
    table = ReservationTable()
    block = TimeInterval(0, INF)
    table.reserve("c", block)
    assert spans(table, "c") == []
    table.release("c", block)
    assert spans(table, "c") == [(0, INF)]
    with pytest.raises(ReservationError):
        table.release("c", block)


def test_interval_containing_boundaries():
    table = ReservationTable()
    table.reserve("c", TimeInterval(100, 200))
    assert table.interval_containing("c", 50).span == TimeInterval(0, 100)
    assert table.interval_containing("c", 100) is None  # inside occupancy
    assert table.interval_containing("c", 150) is None
    assert table.interval_containing("c", 200).span == TimeInterval(200, INF)
    assert table.interval_containing("c", 10**9).index == 1


def test_indices_enumerate_in_start_order():
    table = ReservationTable()
    table.reserve("c", TimeInterval(300, 400))
    table.reserve("c", TimeInterval(100, 200))
    intervals = table.safe_intervals("c")
    assert [si.index for si in intervals] == [0, 1, 2]
    starts = [si.span.start for si in intervals]
    assert starts == sorted(starts)


def test_random_reservations_match_bitmap_oracle():
    rng = random.Random(7)
    table = ReservationTable()
    horizon = 2_000_000
    committed = []
    attempts = 0
    while len(committed) < 1000 and attempts < 20_000:
        attempts += 1
        start = rng.randrange(0, horizon - 100, 100)
        end = start + rng.randrange(100, 2000, 100)
        interval = TimeInterval(start, end)
        if table.is_free("c", interval):
            table.reserve("c", interval)
            committed.append((start, end))
    assert len(committed) == 1000

    expected = bitmap_safe_intervals(committed, horizon)
    got = []
    for si in table.safe_intervals("c"):
        end = min(si.span.end, horizon)
        if si.span.start < horizon:
            got.append((si.span.start, end))
    assert got == expected


def test_partition_property():
    """Safe and occupied intervals partition [0, inf) with no gap or overlap."""
    rng = random.Random(3)
    table = ReservationTable()
    for _ in range(200):
        start = rng.randrange(0, 50_000, 100)
        interval = TimeInterval(start, start + rng.randrange(100, 900, 100))
        if table.is_free("c", interval):
            table.reserve("c", interval)
    pieces = [(si.span.start, si.span.end) for si in table.safe_intervals("c")]
    pieces += [(occ.start, occ.end) for occ in table.occupied("c")]
    pieces.sort()
    cursor = 0
    for start, end in pieces:
        assert start == cursor
        cursor = end
    assert cursor == INF


interval_sets = st.lists(
    st.integers(0, 40).flatmap(
        lambda s: st.tuples(st.just(s * 100), st.integers(1, 5).map(
            lambda w: s * 100 + w * 100))),
    min_size=1, max_size=12)


@given(interval_sets, st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_reserve_order_independent(raw, rng):
    disjoint = []
    for start, end in sorted(set(raw)):
        if all(end <= s or e <= start for s, e in disjoint):
            disjoint.append((start, end))
    reference = None
    for _ in range(3):
        shuffled = list(disjoint)
        rng.shuffle(shuffled)
        table = ReservationTable()
        for start, end in shuffled:
            table.reserve("c", TimeInterval(start, end))
        result = spans(table, "c")
        if reference is None:
            reference = result
        assert result == reference
