"""Parallel sorting tests: oracle equivalence, balance, cost shape."""

import numpy as np
import pytest

from dcsa.bspsim import BspConfig, DistArray, block_ranges
from dcsa.parsort import SORT_SUPERSTEPS, SlackError, bsp_string_sort


def _oracle(rows: np.ndarray) -> np.ndarray:
    """Stable lexicographic sort: ties stay in original (index) order."""
    return rows[np.lexsort(rows.T[::-1])]


def _random_rows(rng, m, kappa, hi=50):
    return rng.integers(0, hi, size=(m, kappa)).astype(np.int64)


def test_matches_oracle_at_slack():
    rng = np.random.default_rng(1)
    for p in (2, 4, 8):
        for kappa in (1, 2, 3):
            rows = _random_rows(rng, p ** 3, kappa, hi=7)
            out, ledger = bsp_string_sort(
                DistArray.scatter(rows, p), kappa, BspConfig(p=p))
            np.testing.assert_array_equal(out.gather(), _oracle(rows))
            assert ledger["S"] == SORT_SUPERSTEPS


def test_superstep_count_is_fixed():
    rng = np.random.default_rng(2)
    seen = set()
    for p in (2, 4, 8):
        for m in (p ** 3, 4 * p ** 3):
            rows = _random_rows(rng, m, 2)
            _, ledger = bsp_string_sort(
                DistArray.scatter(rows, p), 2, BspConfig(p=p))
            seen.add(ledger["S"])
    assert seen == {SORT_SUPERSTEPS}
    assert SORT_SUPERSTEPS <= 6


def test_single_processor_degenerate():
    rng = np.random.default_rng(3)
    rows = _random_rows(rng, 40, 2)
    out, ledger = bsp_string_sort(DistArray.scatter(rows, 1), 2, BspConfig(p=1))
    np.testing.assert_array_equal(out.gather(), _oracle(rows))
    assert ledger["S"] <= 1


def test_output_block_balanced():
    rng = np.random.default_rng(4)
    for p, m in ((2, 9), (4, 70), (8, 513)):
        rows = _random_rows(rng, m, 2)
        out, _ = bsp_string_sort(DistArray.scatter(rows, p), 2,
                                 BspConfig(p=p), slack_policy="relaxed")
        assert out.sizes() == [hi - lo for lo, hi in block_ranges(m, p)]
        np.testing.assert_array_equal(out.gather(), _oracle(rows))


def test_identical_rows_keep_index_order():
    rows = np.full((64, 2), 9, dtype=np.int64)
    out, _ = bsp_string_sort(DistArray.scatter(rows, 4), 2, BspConfig(p=4))
    np.testing.assert_array_equal(out.gather(), rows)


def test_duplicate_keys_stable():
    # heavy duplication: ties must come out in original index order, which
    # the oracle's stable sort encodes
    rng = np.random.default_rng(5)
    rows = rng.integers(0, 2, size=(4 ** 3, 2)).astype(np.int64)
    out, _ = bsp_string_sort(DistArray.scatter(rows, 4), 2, BspConfig(p=4))
    np.testing.assert_array_equal(out.gather(), _oracle(rows))


def test_sentinel_cells_sort_low():
    rows = np.array([[0, 5], [-1, 9], [0, -1], [-1, -1]], dtype=np.int64)
    out, _ = bsp_string_sort(DistArray.scatter(rows, 2), 2, BspConfig(p=2),
                             slack_policy="relaxed")
    np.testing.assert_array_equal(out.gather(), _oracle(rows))


def test_slack_policy():
    rows = np.zeros((7, 1), dtype=np.int64)
    with pytest.raises(SlackError):
        bsp_string_sort(DistArray.scatter(rows, 2), 1, BspConfig(p=2))
    out, ledger = bsp_string_sort(DistArray.scatter(rows, 2), 1,
                                  BspConfig(p=2), slack_policy="relaxed")
    assert out.gather().shape == (7, 1)
    assert any("slack" in w for w in ledger["warnings"])


def test_input_validation():
    rows = np.zeros((8, 2), dtype=np.int64)
    with pytest.raises(ValueError):
        bsp_string_sort(DistArray.scatter(rows, 2), 3, BspConfig(p=2))
    with pytest.raises(ValueError):
        bsp_string_sort(DistArray.scatter(rows, 3), 2, BspConfig(p=2),
                        slack_policy="relaxed")
    with pytest.raises(ValueError):
        bsp_string_sort(DistArray.scatter(rows, 2), 2, BspConfig(p=2),
                        slack_policy="sometimes")


def test_unbalanced_input_partition():
    # all rows on one processor: output still sorted and rebalanced
    rng = np.random.default_rng(6)
    rows = _random_rows(rng, 60, 2)
    parts = [rows, np.zeros((0, 2), dtype=np.int64),
             np.zeros((0, 2), dtype=np.int64), np.zeros((0, 2), dtype=np.int64)]
    out, _ = bsp_string_sort(DistArray(parts), 2, BspConfig(p=4),
                             slack_policy="relaxed")
    np.testing.assert_array_equal(out.gather(), _oracle(rows))
    assert out.sizes() == [15, 15, 15, 15]


def test_designated_processor_parameter():
    rng = np.random.default_rng(7)
    rows = _random_rows(rng, 4 ** 3, 2)
    ref, _ = bsp_string_sort(DistArray.scatter(rows, 4), 2, BspConfig(p=4))
    for designated in (1, 3):
        out, ledger = bsp_string_sort(DistArray.scatter(rows, 4), 2,
                                      BspConfig(p=4), designated=designated)
        np.testing.assert_array_equal(out.gather(), ref.gather())
        assert ledger["S"] == SORT_SUPERSTEPS


def test_determinism_across_schedules():
    rng = np.random.default_rng(8)
    rows = _random_rows(rng, 2 * 4 ** 3, 2)
    ref_out, ref_ledger = bsp_string_sort(DistArray.scatter(rows, 4), 2,
                                          BspConfig(p=4))
    for seed in (0, 9, 1234):
        out, ledger = bsp_string_sort(DistArray.scatter(rows, 4), 2,
                                      BspConfig(p=4), schedule_seed=seed)
        np.testing.assert_array_equal(out.gather(), ref_out.gather())
        assert ledger == ref_ledger


def test_communication_within_sampling_bound():
    # per-processor words over the whole run, bounded via H <= c*kappa*ceil(m/p)
    rng = np.random.default_rng(9)
    for p in (2, 4, 8):
        for kappa in (1, 3):
            m = p ** 3
            rows = _random_rows(rng, m, kappa)
            _, ledger = bsp_string_sort(DistArray.scatter(rows, p), kappa,
                                        BspConfig(p=p))
            bound = 24 * kappa * (-(-m // p))
            assert ledger["H"] <= bound, (p, kappa, ledger["H"], bound)


def test_empty_input_relaxed():
    rows = np.zeros((0, 2), dtype=np.int64)
    out, _ = bsp_string_sort(DistArray.scatter(rows, 2), 2, BspConfig(p=2),
                             slack_policy="relaxed")
    assert len(out) == 0
