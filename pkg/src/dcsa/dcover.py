"""Difference covers of Z_v.

A set D of residues modulo v is a difference cover when every residue d has a
representation d = (a - b) mod v with a, b in D. The suffix algorithms in this
package sample text positions whose index mod v lands in D; the cover property
is what guarantees any two positions can be shifted by a common small amount
into the sample.

Covers produced here always exclude residue 0 and satisfy |D| < v (so the
sample is a proper subset of positions, v >= 3). Since all suffix-sampling
uses are shift-invariant, any cover can be normalized that way: shifting D by
a constant keeps the difference multiset intact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

_EXHAUSTIVE_LIMIT = 12
_GREEDY_LIMIT = 64


@dataclass(frozen=True)
class DifferenceCover:
    """A difference cover D of Z_v with precomputed pair-shift tables.

    elements     sorted int64 residues, 0 excluded
    member       bool mask over [0, v)
    pair_first   for each residue d: the smallest a in D with (a + d) % v in D
    pair_second  the matching (a + d) % v

    The pair tables witness the cover property: for every d there is a pair of
    cover elements at circular distance d.
    """

    v: int
    elements: np.ndarray
    member: np.ndarray
    pair_first: np.ndarray
    pair_second: np.ndarray

    @property
    def size(self) -> int:
        return int(self.elements.shape[0])


def is_cover(candidate, v: int) -> bool:
    """True when candidate covers all residues of Z_v as pairwise differences."""
    elems = np.asarray(sorted(set(int(c) % v for c in candidate)), dtype=np.int64)
    if elems.size == 0:
        return False
    diffs = (elems[:, None] - elems[None, :]) % v
    return bool(np.unique(diffs).size == v)


def _pair_tables(elems: np.ndarray, v: int) -> tuple[np.ndarray, np.ndarray]:
    # all ordered pairs (a, b) at once; keep the smallest a per difference
    a = np.repeat(elems, elems.size)
    b = np.tile(elems, elems.size)
    diff = (b - a) % v
    order = np.lexsort((a, diff))
    diffs_sorted = diff[order]
    residues, starts = np.unique(diffs_sorted, return_index=True)
    if residues.size != v:
        raise ValueError("pair table construction on a non-cover")
    first = a[order][starts]
    second = b[order][starts]
    return first, second


def _finish(elems: list[int] | np.ndarray, v: int) -> DifferenceCover:
    elems = np.asarray(sorted(int(e) for e in elems), dtype=np.int64)
    if elems.size and elems[0] == 0:
        # shift-invariance: map by e -> (e - z) with z outside the set, so
        # residue 0 (which would need e == z) cannot survive
        taken = set(int(e) for e in elems)
        z = 1
        while z in taken:
            z += 1
        elems = np.asarray(sorted((int(e) - z) % v for e in elems), dtype=np.int64)
    member = np.zeros(v, dtype=bool)
    member[elems] = True
    first, second = _pair_tables(elems, v)
    for arr in (elems, member, first, second):
        arr.flags.writeable = False
    return DifferenceCover(v=v, elements=elems, member=member,
                           pair_first=first, pair_second=second)


def _exhaustive(v: int) -> list[int]:
    # smallest size first, lexicographically smallest within a size; DFS with
    # a coverage-count prune. Only run for tiny v; the search is exponential.
    full = (1 << v) - 1

    def diffs_mask(elems: tuple[int, ...]) -> int:
        mask = 0
        for a in elems:
            for b in elems:
                mask |= 1 << ((a - b) % v)
        return mask

    for size in range(1, v):
        # elements drawn from [1, v) so covers never contain 0
        stack: list[tuple[tuple[int, ...], int]] = [((), 1)]
        found: list[int] | None = None

        def dfs(elems: tuple[int, ...], start: int) -> list[int] | None:
            mask = diffs_mask(elems)
            remaining = size - len(elems)
            if remaining == 0:
                return list(elems) if mask == full else None
            # each new element can cover at most 2*|elems|+1 new differences
            need = v - bin(mask).count("1")
            cap = 0
            k = len(elems)
            for _ in range(remaining):
                cap += 2 * k + 1
                k += 1
            if cap < need:
                return None
            for nxt in range(start, v):
                if v - nxt < remaining:
                    break
                got = dfs(elems + (nxt,), nxt + 1)
                if got is not None:
                    return got
            return None

        found = dfs((), 1)
        if found is not None:
            return found
    raise ValueError(f"no proper difference cover of Z_{v}")  # unreachable for v >= 3


def _greedy(v: int) -> list[int]:
    # deterministic greedy: repeatedly add the element (smallest on ties)
    # covering the most missing differences. Always terminates with a cover.
    elems: list[int] = [1]
    covered = {0}
    while len(covered) < v:
        best, best_gain = -1, -1
        for cand in range(1, v):
            if cand in elems:
                continue
            gain = 0
            for e in elems + [cand]:
                if (cand - e) % v not in covered:
                    gain += 1
                if (e - cand) % v not in covered:
                    gain += 1
            if gain > best_gain:
                best, best_gain = cand, gain
        elems.append(best)
        covered = set()
        for a in elems:
            for b in elems:
                covered.add((a - b) % v)
    return elems


def _sqrt_construction(v: int) -> list[int]:
    # classic O(sqrt(v)) cover: {0..r-1} plus {0, r, 2r, ...} for
    # r = ceil(sqrt(v)). Contains 0; _finish normalizes that away.
    r = isqrt(v - 1) + 1
    base = set(range(r)) | {(j * r) % v for j in range(r + 1)}
    return sorted(base)


@lru_cache(maxsize=None)
def build_cover(v: int) -> DifferenceCover:
    """Construct a difference cover of Z_v (v >= 3), deterministic in v.

    Small v get a provably minimum cover; mid-size v a greedy one; large v the
    sqrt construction, whose size stays within 3*sqrt(v) + 6. All results
    exclude 0 and have fewer than v elements.
    """
    if v < 3:
        raise ValueError(f"v must be >= 3, got {v}")
    if v <= _EXHAUSTIVE_LIMIT:
        elems = _exhaustive(v)
    elif v <= _GREEDY_LIMIT:
        elems = _greedy(v)
    else:
        elems = _sqrt_construction(v)
    dc = _finish(elems, v)
    assert 0 < dc.size < v
    assert not dc.member[0]
    return dc


def shift_for_pair(dc: DifferenceCover, k1: int, k2: int) -> int:
    """Smallest-witness shift λ with (k1 + λ) % v and (k2 + λ) % v both in D.

    This is the workhorse of sample-based suffix comparison: suffixes at
    positions i = k1 (mod v) and j = k2 (mod v) can both be advanced by the
    same λ < v to land in the sample.
    """
    v = dc.v
    d = (k2 - k1) % v
    a = int(dc.pair_first[d])
    lam = (a - k1) % v
    # hint, not proof: both landings are cover members by construction
    return lam
