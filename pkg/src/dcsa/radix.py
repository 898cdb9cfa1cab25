"""Stable integer sorting primitives.

Everything downstream sorts either integer keys in [-1, upper) or fixed-width
rows of such keys. All entry points return permutations (argsort style), since
callers almost always need to move satellite data along with the keys.

The single-column primitive validates the key range and then defers to
numpy's stable argsort. Multi-column row sorting is LSD: one stable pass per
column from least to most significant, which is the classic linear-time
construction when the number of columns is fixed.
"""

from __future__ import annotations

import numpy as np


def stable_counting_sort(keys: np.ndarray, upper: int) -> np.ndarray:
    """Stable argsort of integer keys, each in [-1, upper).

    Returns perm such that keys[perm] is non-decreasing and equal keys keep
    their input order. The range check is the point of this wrapper: a key
    outside [-1, upper) means a rank table was corrupted upstream, and that
    should fail loudly here rather than produce a subtly wrong order.
    """
    keys = np.asarray(keys)
    if keys.ndim != 1:
        raise ValueError(f"keys must be 1-D, got shape {keys.shape}")
    if keys.size:
        lo = int(keys.min())
        hi = int(keys.max())
        if lo < -1 or hi >= upper:
            raise ValueError(f"key out of range [-1, {upper}): saw [{lo}, {hi}]")
    return np.argsort(keys, kind="stable")


def lex_sort_rows(rows: np.ndarray, upper: int) -> np.ndarray:
    """Stable argsort of rows (2-D, entries in [-1, upper)) in row-lex order.

    LSD over columns: sorting by the last column first and working left, each
    pass stable, yields full lexicographic order. Ties between identical rows
    keep their original relative order.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2:
        raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
    m, k = rows.shape
    perm = np.arange(m, dtype=np.int64)
    for col in range(k - 1, -1, -1):
        perm = perm[stable_counting_sort(rows[perm, col], upper)]
    return perm


def radix_rank_rows(rows: np.ndarray, upper: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sort rows and assign dense ranks: equal rows share a rank, ranks are
    consecutive from 0 in sorted order.

    Returns (perm, ranks) where perm lex-sorts the rows and ranks[i] is the
    dense rank of original row i. upper defaults to a bound derived from the
    data (max entry + 1).
    """
    rows = np.asarray(rows)
    if rows.ndim != 2:
        raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
    m = rows.shape[0]
    if upper is None:
        upper = int(rows.max()) + 1 if m else 1
    perm = lex_sort_rows(rows, upper)
    ranks = np.zeros(m, dtype=np.int64)
    if m:
        ordered = rows[perm]
        # rank increments exactly where adjacent sorted rows differ
        bump = np.any(ordered[1:] != ordered[:-1], axis=1)
        dense = np.concatenate(([0], np.cumsum(bump)))
        ranks[perm] = dense
    return perm, ranks
