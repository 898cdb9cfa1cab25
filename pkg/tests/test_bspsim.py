"""Simulator unit tests: cost arithmetic, delivery rules, determinism."""

import numpy as np
import pytest

from dcsa.bspsim import (
    BspConfig,
    DistArray,
    Machine,
    block_ranges,
    ledger_cost,
    run_bsp,
)


# ---------------------------------------------------------------- block_ranges

def test_block_ranges_uneven():
    assert block_ranges(10, 3) == [(0, 4), (4, 8), (8, 10)]


def test_block_ranges_even():
    assert block_ranges(12, 4) == [(0, 3), (3, 6), (6, 9), (9, 12)]


def test_block_ranges_degenerate_tail():
    got = block_ranges(5, 8)
    assert got[:5] == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    assert got[5:] == [(5, 5), (5, 5), (5, 5)]


def test_block_ranges_partitions():
    for n in (0, 1, 7, 16, 100):
        for p in (1, 2, 3, 5, 13):
            ranges = block_ranges(n, p)
            assert len(ranges) == p
            b = -(-n // p) if n else 0
            flat = []
            for i, (lo, hi) in enumerate(ranges):
                assert lo <= hi
                # every range but the last is the full ceil(n/p) block
                if hi < n:
                    assert (lo, hi) == (b * i, b * (i + 1))
                flat.extend(range(lo, hi))
            assert flat == list(range(n))


def test_block_ranges_bad_p():
    with pytest.raises(ValueError):
        block_ranges(4, 0)


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ValueError):
        BspConfig(p=0)
    with pytest.raises(ValueError):
        BspConfig(p=2, g=-1.0)
    with pytest.raises(ValueError):
        BspConfig(p=2, L=-0.5)


# ---------------------------------------------------------------- cost ledger

def test_run_bsp_two_step_example():
    # each processor: 5 work per superstep; 3 words to its peer, sent once
    # in the first superstep and consumed in the second
    payload = np.arange(3, dtype=np.int64)

    def step_send(pid, u, inbox):
        return u, [(1 - pid, payload)], 5

    def step_recv(pid, u, inbox):
        assert [src for src, _ in inbox] == [1 - pid]
        np.testing.assert_array_equal(inbox[0][1], payload)
        return u, [], 5

    _, ledger = run_bsp([step_send, step_recv], BspConfig(p=2), [None, None])
    assert ledger["S"] == 2
    assert ledger["W"] == 10
    assert ledger["H"] == 6
    assert [s["w"] for s in ledger["supersteps"]] == [5, 5]
    assert [s["h"] for s in ledger["supersteps"]] == [6, 0]


def test_run_bsp_empty_program():
    _, ledger = run_bsp([], BspConfig(p=3), [None] * 3)
    assert ledger == {"p": 3, "supersteps": [], "W": 0, "H": 0, "S": 0}


def test_broadcast_h():
    # 1 word from processor 0 to every other: max out p-1, max in 1
    for p in (2, 4, 8):
        m = Machine(BspConfig(p=p))

        def step(pid, ctx):
            if pid == 0:
                for dst in range(1, ctx.p):
                    ctx.send(dst, 7)

        rec = m.superstep(step)
        assert rec.h == (p - 1) + 1


def test_h_charged_in_sending_superstep():
    m = Machine(BspConfig(p=2))
    m.superstep(lambda pid, ctx: ctx.send(1 - pid, [1, 2, 3, 4]))
    m.superstep(lambda pid, ctx: None)
    assert [s.h for s in m.steps] == [8, 0]


def test_ledger_cost_arithmetic():
    assert ledger_cost({"W": 10, "H": 6, "S": 2}, g=2, L=100) == 222
    assert ledger_cost({"W": 0, "H": 0, "S": 0}, g=5, L=9) == 0
    assert ledger_cost({"W": 0, "H": 1, "S": 1}, g=3, L=5) == 8


def test_work_and_words_are_separate_channels():
    # moving words never inflates the work ledger; it lands in comm_work
    m = Machine(BspConfig(p=2))

    def step(pid, ctx):
        ctx.charge(2)
        ctx.send(1 - pid, np.zeros(50, dtype=np.int64))

    m.superstep(step)
    m.drain()
    assert m.ledger()["W"] == 2
    assert m.steps[0].comm_work == 100  # 50 out per proc, charged at each end
    assert m.steps[1].comm_work == 100


# ---------------------------------------------------------------- delivery

def test_isolation_canary():
    # a message must be invisible in the superstep that sends it
    m = Machine(BspConfig(p=2))

    def step0(pid, ctx):
        if pid == 0:
            ctx.send(1, 99, tag="canary")
        assert ctx.inbox() == []

    def step1(pid, ctx):
        if pid == 1:
            assert ctx.inbox("canary") == [(0, 99)]
        else:
            assert ctx.inbox() == []

    m.superstep(step0)
    m.superstep(step1)


def test_word_conservation():
    rng = np.random.default_rng(5)
    m = Machine(BspConfig(p=4))

    def step(pid, ctx):
        for _ in range(int(rng.integers(0, 4))):
            dst = int(rng.integers(0, 4))
            ctx.send(dst, np.arange(int(rng.integers(1, 9))))

    for _ in range(6):
        m.superstep(step)
    m.drain()
    # words leaving superstep s all arrive in superstep s+1, none elsewhere
    for s in range(len(m.steps) - 1):
        assert m.steps[s].out_words.sum() == m.steps[s + 1].in_words.sum()
    assert m.steps[-1].out_words.sum() == 0
    sent = sum(s.out_words.sum() for s in m.steps)
    recv = sum(s.in_words.sum() for s in m.steps)
    assert sent == recv


def test_inbox_sorted_by_source_then_sequence():
    m = Machine(BspConfig(p=3))

    def step0(pid, ctx):
        if pid == 2:
            ctx.send(0, "x")
            ctx.send(0, "y")
        if pid == 1:
            ctx.send(0, "a")

    seen = {}

    def step1(pid, ctx):
        seen[pid] = ctx.inbox()

    m.superstep(step0)
    m.superstep(step1)
    assert seen[0] == [(1, "a"), (2, "x"), (2, "y")]


def test_bad_destination():
    m = Machine(BspConfig(p=2))
    with pytest.raises(ValueError):
        m.superstep(lambda pid, ctx: ctx.send(5, 1))


def test_tag_filtering():
    m = Machine(BspConfig(p=2))

    def step0(pid, ctx):
        if pid == 0:
            ctx.send(1, 1, tag="a")
            ctx.send(1, 2, tag="b")

    def step1(pid, ctx):
        if pid == 1:
            assert ctx.inbox("a") == [(0, 1)]
            assert ctx.inbox("b") == [(0, 2)]
            assert ctx.inbox() == [(0, 1), (0, 2)]

    m.superstep(step0)
    m.superstep(step1)


# ---------------------------------------------------------------- determinism

def _ring_program(p, rounds):
    """Each processor keeps a running sum and passes its block around a ring."""
    def make_step():
        def step(pid, u, inbox):
            arr, acc = u
            for _, data in inbox:
                arr = data
            acc = acc + int(arr.sum())
            return (arr, acc), [((pid + 1) % p, arr)], len(arr)
        return step
    return [make_step() for _ in range(rounds)]


def test_determinism_across_schedules():
    p = 4
    base = np.arange(20, dtype=np.int64)
    dist = DistArray.scatter(base, p)

    def run(seed):
        parts = [(part.copy(), 0) for part in dist.parts]
        states, ledger = run_bsp(_ring_program(p, 5), BspConfig(p=p), parts,
                                 schedule_seed=seed)
        return [acc for _, acc in states], ledger

    ref_states, ref_ledger = run(None)
    for seed in (0, 1, 17, 12345):
        states, ledger = run(seed)
        assert states == ref_states
        assert ledger == ref_ledger


def test_run_bsp_seeds_state_from_distarray():
    arr = np.arange(10, dtype=np.int64)
    dist = DistArray.scatter(arr, 3)

    def step(pid, u, inbox):
        return int(u.sum()), [], 0

    states, _ = run_bsp([step], BspConfig(p=3), dist)
    assert states == [int(part.sum()) for part in dist.parts]


def test_run_bsp_part_count_mismatch():
    with pytest.raises(ValueError):
        run_bsp([], BspConfig(p=2), [None, None, None])


# ---------------------------------------------------------------- DistArray

def test_distarray_scatter_gather_roundtrip():
    arr = np.arange(11, dtype=np.int64)
    d = DistArray.scatter(arr, 4)
    assert d.sizes() == [3, 3, 3, 2]
    np.testing.assert_array_equal(d.gather(), arr)
    assert len(d) == 11


def test_distarray_scatter_matches_block_ranges():
    arr = np.arange(23, dtype=np.int64)
    for p in (1, 2, 5, 8, 30):
        d = DistArray.scatter(arr, p)
        assert d.sizes() == [hi - lo for lo, hi in block_ranges(23, p)]


def test_distarray_rejects_ragged_parts():
    with pytest.raises(ValueError):
        DistArray([np.zeros((2, 3)), np.zeros((2, 4))])


def test_distarray_2d_parts():
    rows = np.arange(12, dtype=np.int64).reshape(6, 2)
    d = DistArray.scatter(rows, 4)
    assert d.sizes() == [2, 2, 2, 0]
    np.testing.assert_array_equal(d.gather(), rows)
