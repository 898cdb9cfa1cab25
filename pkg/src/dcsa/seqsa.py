"""Sequential suffix-array construction by difference-cover sampling.

The recursion, per level on a text x of length n over [0, n):

  0. Pick a period v and a difference cover D of Z_v; split positions into
     residue classes mod v. Classes landing in D form the sample C.
  1. Concatenate the v-grams of the sampled positions, class by class, into
     the sample string X' (length |D| * ceil(n/v) < n).
  2. Recurse on X' to rank every sampled suffix; non-sample classes then
     sort directly by a few literal characters plus one sample rank.
  3. Bucket all suffixes by their v-gram.
  4. Resolve each bucket with sample ranks: any two members can be shifted
     by a common amount below v so both land in the sample (the cover
     property), making rank comparison decisive.

Each class block of X' is padded with all-sentinel rows to exactly
ceil(n/v) rows. The padding keeps block sizes uniform and guarantees every
class block ends in a row containing the sentinel, which is what stops
suffix comparisons of X' from leaking across class boundaries; without it,
classes congruent to n mod v lose their terminator and can misorder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dcover import DifferenceCover, build_cover
from .radix import lex_sort_rows, radix_rank_rows
from .textcodec import Text

# below this, direct comparison sort; the recursion needs room to shrink
_TINY = 8


class RankCorruptionError(RuntimeError):
    """Two distinct suffixes compared equal through sample ranks.

    Sample ranks are a bijection onto [0, sample size), so an equality during
    a merge means a rank table was corrupted upstream.
    """


def _pow54_ceil(v: int) -> int:
    """Exact ceil(v ** (5/4)): the smallest t with t**4 >= v**5."""
    target = v ** 5
    t = max(1, int(round(v ** 1.25)))
    while t ** 4 < target:
        t += 1
    while t > 1 and (t - 1) ** 4 >= target:
        t -= 1
    return t


@dataclass(frozen=True)
class VSchedule:
    """Per-level choice of the sampling period v.

    kinds:
      fixed        every level proposes the same start value
      accelerated  level i+1 proposes ceil(v_i ** (5/4))
      custom       explicit per-level values, last value repeating

    Proposals are clamped by the driver to keep each level legal, so a
    schedule is a sequence of requests, not guarantees.
    """

    kind: str
    start: int = 3
    values: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "accelerated", "custom"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "custom" and not self.values:
            raise ValueError("custom schedule needs at least one value")
        if self.start < 3:
            raise ValueError("period must be at least 3")

    @classmethod
    def fixed(cls, v: int) -> "VSchedule":
        return cls("fixed", start=v)

    @classmethod
    def accelerated(cls, start: int = 3) -> "VSchedule":
        return cls("accelerated", start=start)

    @classmethod
    def custom(cls, values) -> "VSchedule":
        vals = tuple(int(v) for v in values)
        if not vals:
            raise ValueError("custom schedule needs at least one value")
        return cls("custom", start=vals[0], values=vals)

    @classmethod
    def parse(cls, text: str) -> "VSchedule":
        """Parse CLI syntax: 'accel', 'accelerated', 'fixed:V', 'custom:a,b,c'."""
        text = text.strip()
        if text in ("accel", "accelerated"):
            return cls.accelerated()
        if text.startswith("fixed:"):
            return cls.fixed(int(text.split(":", 1)[1]))
        if text.startswith("custom:"):
            return cls.custom(int(s) for s in text.split(":", 1)[1].split(","))
        raise ValueError(f"cannot parse schedule {text!r}")

    def propose(self, level: int, v_prev: int) -> int:
        """Requested v for `level`, given the previous level ran with v_prev."""
        if level == 0:
            return self.start
        if self.kind == "fixed":
            return self.start
        if self.kind == "accelerated":
            return _pow54_ceil(v_prev)
        return int(self.values[min(level, len(self.values) - 1)])


def naive_suffix_array(t: Text | np.ndarray) -> np.ndarray:
    """Suffix array by direct comparison sort of suffix slices.

    Quadratic in the worst case; used as the oracle and for tiny inputs.
    """
    x = t.chars if isinstance(t, Text) else np.asarray(t)
    lst = x.tolist()
    order = sorted(range(len(lst)), key=lambda i: lst[i:])
    return np.asarray(order, dtype=np.int64)


def verify_suffix_array(t: Text | np.ndarray, sa: np.ndarray) -> bool:
    """Linear-time check that sa is the suffix array of t.

    sa must be a permutation of [0, n) and every adjacent pair must be in
    strictly increasing suffix order. The pair check compares first
    characters, then falls back to the inverse permutation at the successor
    positions; an out-of-text successor ranks below every in-text one.
    """
    x = t.chars if isinstance(t, Text) else np.asarray(t)
    n = x.shape[0]
    sa = np.asarray(sa)
    if sa.shape != (n,):
        return False
    if n == 0:
        return True
    if sa.min() < 0 or sa.max() >= n:
        return False
    if not np.array_equal(np.bincount(sa, minlength=n), np.ones(n, dtype=np.int64)):
        return False
    isa = np.empty(n, dtype=np.int64)
    isa[sa] = np.arange(n)
    nxt = np.full(n, -1, dtype=np.int64)
    nxt[: n - 1] = isa[1:]
    a, b = sa[:-1], sa[1:]
    ok = (x[a] < x[b]) | ((x[a] == x[b]) & (nxt[a] < nxt[b]))
    return bool(ok.all())


@dataclass
class SampleDecomposition:
    """Step 0 bookkeeping: residue classes, the sample, and the rank store.

    classes[k] holds the positions congruent to k mod v; the sample C is the
    concatenation of classes over cover elements. rank has n + v slots so
    shifted lookups never need bounds checks; slots at or beyond n stay -1
    forever (an out-of-text suffix ranks below every real one).
    """

    dc: DifferenceCover
    n: int
    classes: list[np.ndarray]
    sample_indices: np.ndarray
    rank: np.ndarray

    @property
    def sample_size(self) -> int:
        return self.sample_indices.shape[0]


def sample_decomposition(n: int, dc: DifferenceCover) -> SampleDecomposition:
    classes = [np.arange(k, n, dc.v, dtype=np.int64) for k in range(dc.v)]
    sample = np.concatenate([classes[int(k)] for k in dc.elements])
    rank = np.full(n + dc.v, -1, dtype=np.int64)
    return SampleDecomposition(dc=dc, n=n, classes=classes,
                               sample_indices=sample, rank=rank)


@dataclass(frozen=True)
class SuperString:
    """The sample string X': one v-gram row per sampled position.

    Classes appear in ascending cover order, each padded to rows_per_class
    rows; a row with origin >= n is padding (all sentinel). encoded holds the
    dense rank of each row among all rows and is the recursion text.
    """

    dc: DifferenceCover
    n: int
    rows_per_class: int
    rows: np.ndarray
    origins: np.ndarray
    encoded: np.ndarray

    def __len__(self) -> int:
        return self.origins.shape[0]

    @property
    def real_mask(self) -> np.ndarray:
        return self.origins < self.n

    @property
    def dummy_count(self) -> int:
        return int((self.origins >= self.n).sum())


def build_sample_string(x: np.ndarray, dc: DifferenceCover) -> SuperString:
    """Step 1: materialize the padded v-gram rows of all sampled positions."""
    n = x.shape[0]
    v = dc.v
    rpc = -(-n // v)  # ceil(n / v)
    origins = (dc.elements[:, None] + v * np.arange(rpc, dtype=np.int64)[None, :]).reshape(-1)
    pos = origins[:, None] + np.arange(v, dtype=np.int64)[None, :]
    valid = pos < n
    rows = np.full(pos.shape, -1, dtype=np.int64)
    rows[valid] = x[pos[valid]]
    _, encoded = radix_rank_rows(rows, upper=n)
    return SuperString(dc=dc, n=n, rows_per_class=rpc,
                       rows=rows, origins=origins, encoded=encoded)


def order_nonsample(x: np.ndarray, decomp: SampleDecomposition) -> dict[int, np.ndarray]:
    """Step 2 (non-sample side): sort each class outside the cover.

    For class k, let l_k be the smallest shift with (k + l_k) mod v in the
    cover. The sort key is the l_k literal characters followed by the rank
    of the suffix l_k ahead; character cells beyond the text read as the
    sentinel. Requires decomp.rank to be filled for the sample.
    """
    n = decomp.n
    v = decomp.dc.v
    out: dict[int, np.ndarray] = {}
    for k in range(v):
        if decomp.dc.member[k]:
            continue
        lk = 1
        while not decomp.dc.member[(k + lk) % v]:
            lk += 1
        starts = decomp.classes[k]
        pos = starts[:, None] + np.arange(lk, dtype=np.int64)[None, :]
        key = np.full((starts.shape[0], lk + 1), -1, dtype=np.int64)
        valid = pos < n
        key[:, :lk][valid] = x[pos[valid]]
        key[:, lk] = decomp.rank[starts + lk]
        out[k] = starts[lex_sort_rows(key, upper=n)]
    return out


@dataclass(frozen=True)
class GroupPartition:
    """Step 3 output: suffixes bucketed by their padded v-gram.

    gram_rank[i] is the dense rank of suffix i's v-gram; counts[a] the size
    of bucket a. Buckets are numbered in ascending gram order, so
    concatenating resolved buckets yields the suffix array.
    """

    v: int
    gram_rank: np.ndarray
    counts: np.ndarray

    @property
    def n(self) -> int:
        return self.gram_rank.shape[0]

    def groups(self):
        """Yield member arrays bucket by bucket (test/debug helper)."""
        order = np.argsort(self.gram_rank, kind="stable")
        lo = 0
        for c in self.counts:
            yield order[lo: lo + int(c)]
            lo += int(c)


def prefix_partition(x: np.ndarray, v: int) -> GroupPartition:
    """Step 3: bucket every suffix by its first v characters (padded)."""
    n = x.shape[0]
    pos = np.arange(n, dtype=np.int64)[:, None] + np.arange(v, dtype=np.int64)[None, :]
    valid = pos < n
    grams = np.full(pos.shape, -1, dtype=np.int64)
    grams[valid] = x[pos[valid]]
    _, gram_rank = radix_rank_rows(grams, upper=n)
    counts = np.bincount(gram_rank, minlength=int(gram_rank.max()) + 1 if n else 0)
    return GroupPartition(v=v, gram_rank=gram_rank, counts=counts)


def _order_within_groups(gids: np.ndarray, classes: np.ndarray,
                         rankvec: np.ndarray, dc: DifferenceCover,
                         stream_pos: np.ndarray | None = None) -> np.ndarray:
    """Order members within equal-gram groups using carried sample ranks.

    gids      group id per member (0-based, need not be dense)
    classes   member position mod v
    rankvec   per member, the sample ranks at the |D| cover landings:
              rankvec[m, a] = rank of (position + ((D[a] - class) mod v))
    stream_pos optional within-class order hints (smaller = earlier);
              defaults to rankvec[:, 0], the landing on the smallest cover
              element, which is valid inside a shared-gram group.

    Returns a permutation of member indices ordering by (gid, suffix order).
    Groups admitting one common shift that lands every present class in the
    cover are sorted in a single vectorized pass; the rest fall back to a
    per-group k-way merge with pairwise shifts. Equal keys inside a group
    raise RankCorruptionError: distinct suffixes never share a sample rank.
    """
    m = gids.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    v = dc.v
    ngroups = int(gids.max()) + 1

    present = np.zeros((ngroups, v), dtype=np.int8)
    present[gids, classes] = 1
    # ok[k, lam]: shifting class k by lam lands in the cover
    shifts = (np.arange(v)[:, None] + np.arange(v)[None, :]) % v
    ok = dc.member[shifts]
    violations = present @ (~ok).astype(np.int8)
    admits = violations == 0
    has_common = admits.any(axis=1)
    lam = np.where(has_common, np.argmax(admits, axis=1), 0)

    elem_index = np.full(v, -1, dtype=np.int64)
    elem_index[dc.elements] = np.arange(dc.size)

    counts = np.bincount(gids, minlength=ngroups)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    out = np.empty(m, dtype=np.int64)

    good = has_common[gids]
    good_idx = np.flatnonzero(good)
    if good_idx.size:
        g = gids[good_idx]
        land = elem_index[(classes[good_idx] + lam[g]) % v]
        key = rankvec[good_idx, land]
        order = np.lexsort((key, g))
        seq = good_idx[order]
        kk = key[order]
        same = gids[seq[1:]] == gids[seq[:-1]]
        if np.any(same & (kk[1:] == kk[:-1])):
            raise RankCorruptionError("equal sample ranks inside a gram bucket")
        # good groups fill their slots in (gid, key) order
        slot_gid = np.repeat(np.arange(ngroups), counts)
        out[has_common[slot_gid]] = seq

    if np.all(has_common):
        return out

    if stream_pos is None:
        stream_pos = rankvec[:, 0]

    for g in np.flatnonzero(~has_common):
        sel = np.flatnonzero(gids == g)
        streams: dict[int, list[int]] = {}
        for mi in sel.tolist():
            streams.setdefault(int(classes[mi]), []).append(mi)
        for k in streams:
            streams[k].sort(key=lambda mi: int(stream_pos[mi]))
        heads = dict.fromkeys(streams, 0)
        merged = []
        while len(merged) < sel.shape[0]:
            best_k = -1
            best_mi = -1
            for k, at in heads.items():
                if at >= len(streams[k]):
                    continue
                mi = streams[k][at]
                if best_k < 0:
                    best_k, best_mi = k, mi
                    continue
                a = int(dc.pair_first[(k - best_k) % v])
                lam_pair = (a - best_k) % v
                ra = rankvec[best_mi, elem_index[a]]
                rb = rankvec[mi, elem_index[(k + lam_pair) % v]]
                if ra == rb:
                    raise RankCorruptionError("equal sample ranks in merge fallback")
                if rb < ra:
                    best_k, best_mi = k, mi
            merged.append(best_mi)
            heads[best_k] += 1
        out[offsets[g]: offsets[g] + sel.shape[0]] = merged

    return out


def merge_groups(partition: GroupPartition, class_orders: list[np.ndarray],
                 rank: np.ndarray, dc: DifferenceCover) -> np.ndarray:
    """Step 4: resolve every bucket and concatenate into the suffix array.

    The comparator between members of classes k' and k'' is rank[i + lam]
    vs rank[j + lam] with lam the cover's pair shift; buckets whose present
    classes admit one common shift avoid per-pair comparisons entirely.
    """
    n = partition.n
    v = dc.v
    members = np.arange(n, dtype=np.int64)
    classes = members % v
    lam_table = (dc.elements[None, :] - np.arange(v)[:, None]) % v
    rankvec = rank[members[:, None] + lam_table[classes]]
    stream_pos = np.empty(n, dtype=np.int64)
    for k in range(v):
        stream_pos[class_orders[k]] = np.arange(class_orders[k].shape[0])
    perm = _order_within_groups(partition.gram_rank, classes, rankvec, dc,
                                stream_pos=stream_pos)
    sa_slots = np.argsort(partition.gram_rank[perm], kind="stable")
    return perm[sa_slots]


def _dc_level(x: np.ndarray, v_req: int, schedule: VSchedule, level: int,
              on_level: Callable | None) -> np.ndarray:
    n = x.shape[0]
    if n < _TINY:
        return naive_suffix_array(x)

    v = min(max(v_req, 3), n)
    while v > 3:
        dc = build_cover(v)
        if dc.size * (-(-n // v)) < n:
            break
        v -= 1
    else:
        dc = build_cover(3)
    assert dc.size * (-(-n // v)) < n, "sample string failed to shrink"

    decomp = sample_decomposition(n, dc)
    ss = build_sample_string(x, dc)
    m = len(ss)
    d = dc.size
    touches = ss.rows.size + m

    if int(ss.encoded.max()) == m - 1:
        # every super-character distinct: first characters already decide
        rank_x = ss.encoded
    else:
        proposal = schedule.propose(level + 1, v)
        upper = min((v * v - d) // d, m)
        v_next = max(3, min(proposal, upper))
        sa_x = _dc_level(ss.encoded, v_next, schedule, level + 1, on_level)
        rank_x = np.empty(m, dtype=np.int64)
        rank_x[sa_x] = np.arange(m)

    real = ss.real_mask
    nd = ss.dummy_count
    if nd:
        # padding rows are all-sentinel, hence strictly smallest as suffixes
        assert np.array_equal(np.sort(rank_x[~real]), np.arange(nd)), \
            "padding rows did not occupy the lowest ranks"

    decomp.rank[ss.origins[real]] = rank_x[real] - nd
    touches += m
    # sample ranks are a bijection onto [0, |C|)
    assert decomp.rank[decomp.sample_indices].min() == 0
    assert decomp.rank[decomp.sample_indices].max() == decomp.sample_size - 1

    class_orders: list[np.ndarray] = [None] * v  # type: ignore[list-item]
    nonsample = order_nonsample(x, decomp)
    for k in range(v):
        starts = decomp.classes[k]
        if dc.member[k]:
            class_orders[k] = starts[np.argsort(decomp.rank[starts], kind="stable")]
            touches += starts.shape[0]
        else:
            class_orders[k] = nonsample[k]
            touches += starts.shape[0] * (v + 1)

    partition = prefix_partition(x, v)
    sa = merge_groups(partition, class_orders, decomp.rank, dc)
    touches += n * v + n * (d + 1) + 2 * n

    if on_level is not None:
        on_level(level, v, n, d, touches)
    return sa


def dc_suffix_array(t: Text, schedule: VSchedule | None = None,
                    on_level: Callable | None = None) -> np.ndarray:
    """Suffix array of t by the difference-cover recursion.

    schedule picks the per-level sampling period (accelerated by default);
    on_level(level, v, n, d, touches), when given, observes each recursion
    level bottom-up with its period, text length, cover size, and a count of
    array cells touched by that level's major passes.
    """
    if schedule is None:
        schedule = VSchedule.accelerated()
    x = t.chars
    n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    v0 = min(max(schedule.start, 3), n)
    return _dc_level(x, v0, schedule, 0, on_level)
