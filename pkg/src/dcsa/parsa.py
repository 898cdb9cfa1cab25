"""Parallel suffix array construction with accelerated sampling.

The sequential difference-cover recursion, restated as a bulk-synchronous
program. Each descend round ell holds x_ell block-distributed and:

  builds the sampled v-gram rows, routes them to block owners of the sample
  string, sorts them with one parallel string-sort instance, turns
  equal-gram flags into dense ranks (the flag at a block edge needs one
  neighbor message), and routes the ranks back as the next text x_{ell+1}.

The recursion bottoms out two ways: the freshly built text has all-distinct
characters (then it is its own suffix rank table), or it has shrunk to at
most n/p characters and one processor finishes it sequentially. Then the
unwind walks back up; level ell turns suffix ranks of x_{ell+1} into suffix
ranks of x_ell:

  sample positions get their rank from the recursion (one routing step plus
  a rank halo to the predecessor processors), the v - |D| non-sample residue
  classes are each sorted by an independent sort instance keyed on a few
  literal characters plus one sample rank, all n suffixes are bucketed by
  their v-gram with one more sort instance carrying |D| sample ranks per
  suffix, and equal-gram buckets are resolved through those rank vectors.

Buckets living on one processor resolve locally; a bucket straddling two
processors is shipped to the lower one; a bucket spanning three or more is
merged by regular sampling among exactly its span (a processor overlaps at
most two such buckets). All concurrent sort instances of a phase share
supersteps through disjoint message tags.

Cost accounting: every superstep charges work proportional to the words it
touches (sorting charges key passes, partitioning charges a binary-search
depth), so the ledger's W tracks the work term of the cost model while h
counts exactly the words crossing processor boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil, log2

import numpy as np

from .bspsim import BspConfig, Machine, block_ranges
from .dcover import DifferenceCover, build_cover
from .parsort import SlackError, SortInstance, instance_steps
from .seqsa import (
    RankCorruptionError,
    VSchedule,
    _order_within_groups,
    _pow54_ceil,
    dc_suffix_array,
)
from .textcodec import Text


def next_v(v: int, xlen: int) -> int:
    """Sampling period for the next round: min(ceil(v^(5/4)), xlen), >= 3."""
    return max(3, min(_pow54_ceil(v), xlen))


@dataclass
class RoundMetrics:
    """Per-round periods, sizes, and ledger slices of one parallel run.

    rounds[i] describes recursion level i (descend plus its unwind share):
    {"v", "d", "n", "supersteps", "w", "h"}. The sequential handoff and the
    final assembly are counted only in total. warnings carries degraded-mode
    notes (slack, designated-processor collisions).
    """

    rounds: list[dict] = field(default_factory=list)
    total: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"rounds": self.rounds, "total": self.total},
                          indent=2)


@dataclass(frozen=True)
class _LevelPlan:
    """Host-side constants of one recursion level (data-independent)."""

    level: int
    n: int
    v: int
    dc: DifferenceCover
    rpc: int                    # rows per residue class: ceil(n / v)
    m: int                      # |X'| = |D| * rpc
    nd: int                     # all-sentinel padding rows in X'
    ranges: tuple               # block_ranges(n, p)
    xranges: tuple              # block_ranges(m, p)

    @property
    def d(self) -> int:
        return self.dc.size


def _make_plan(level: int, n: int, v: int, p: int) -> _LevelPlan:
    dc = build_cover(v)
    rpc = -(-n // v)
    real = sum(-(-(n - int(k)) // v) for k in dc.elements)
    m = dc.size * rpc
    return _LevelPlan(level=level, n=n, v=v, dc=dc, rpc=rpc, m=m,
                      nd=m - real, ranges=tuple(block_ranges(n, p)),
                      xranges=tuple(block_ranges(m, p)))


# ------------------------------------------------------------ routing helpers

def _owner_of(pos: np.ndarray, ranges) -> np.ndarray:
    los = np.asarray([lo for lo, _ in ranges], dtype=np.int64)
    return np.searchsorted(los, pos, side="right") - 1


def _route_rows(ctx, ids: np.ndarray, rows: np.ndarray, ranges, tag: str):
    """Send each row to the range owner of its id; return the self-kept part.

    rows must be 2-D with the id recoverable by the receiver (a column).
    """
    owner = _owner_of(ids, ranges)
    order = np.argsort(owner, kind="stable")
    owner_sorted = owner[order]
    bounds = np.searchsorted(owner_sorted, np.arange(len(ranges) + 1))
    keep = None
    for dst in range(len(ranges)):
        seg = rows[order[bounds[dst]: bounds[dst + 1]]]
        if dst == ctx.pid:
            keep = seg
        elif seg.shape[0]:
            ctx.send(dst, seg, tag=tag)
    if keep is None:
        keep = rows[:0]
    return keep


def _halo_sends(ctx, values: np.ndarray, my_range, ranges, width: int, tag: str):
    """Ship slices of my block to predecessors whose width-window covers them.

    Processor pi's window is [hi_pi, hi_pi + width); empty blocks only trail,
    so windows of live processors are always served.
    """
    lo, hi = my_range
    for dst, (dlo, dhi) in enumerate(ranges):
        if dst == ctx.pid or dlo == dhi:
            continue
        wlo, whi = dhi, dhi + width
        cut_lo, cut_hi = max(wlo, lo), min(whi, hi)
        if cut_lo < cut_hi:
            ctx.send(dst, values[cut_lo - lo: cut_hi - lo], tag=tag)


def _assemble_halo(ctx, my_hi: int, n: int, width: int, tag: str) -> np.ndarray:
    """Receive window slices (in src order = position order), pad with -1."""
    parts = [data for _, data in ctx.inbox(tag)]
    got = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    halo = np.full(width, -1, dtype=np.int64)
    halo[: got.shape[0]] = got
    assert got.shape[0] == max(0, min(my_hi + width, n) - my_hi)
    return halo


# ------------------------------------------------------- group order algebra

def _order_single_group(classes: np.ndarray, rankvec: np.ndarray,
                        dc: DifferenceCover) -> np.ndarray:
    """Suffix-order the members of one shared-gram bucket, vectorized.

    classes[i] is member i's position mod v; rankvec[i, a] the sample rank
    at landing D[a]. Every member's final ordinal is its position within its
    own class stream plus, for every other class, how many of that stream's
    members precede it under the pairwise cover shift. All counts come from
    searchsorted on monotone rank columns, so no per-member python loop.
    """
    s = classes.shape[0]
    if s <= 1:
        return np.arange(s, dtype=np.int64)
    v = dc.v
    elem_index = np.full(v, -1, dtype=np.int64)
    elem_index[dc.elements] = np.arange(dc.size)

    present = np.unique(classes)
    streams = {int(k): np.flatnonzero(classes == k) for k in present}
    ordinal = np.zeros(s, dtype=np.int64)
    keys0 = rankvec[:, 0]  # landing on D[0]: monotone within each stream
    for k, idx in streams.items():
        order = np.argsort(keys0[idx], kind="stable")
        streams[k] = idx = idx[order]
        ordinal[idx] += np.arange(idx.shape[0])

    for ka, ia in streams.items():
        for kb, ib in streams.items():
            if ka == kb:
                continue
            a = int(dc.pair_first[(kb - ka) % v])
            lam = (a - ka) % v
            keys_a = rankvec[ia, elem_index[a]]
            keys_b = rankvec[ib, elem_index[(kb + lam) % v]]
            # keys_b is ascending along the stream; count strict predecessors
            left = np.searchsorted(keys_b, keys_a, side="left")
            if not np.array_equal(left, np.searchsorted(keys_b, keys_a,
                                                        side="right")):
                raise RankCorruptionError("equal sample ranks across streams")
            ordinal[ia] += left

    out = np.empty(s, dtype=np.int64)
    if np.bincount(ordinal, minlength=s).max() != 1:
        raise RankCorruptionError("group ordinals are not a permutation")
    out[ordinal] = np.arange(s)
    return out


def _split_against(classes: np.ndarray, rankvec: np.ndarray,
                   s_class: int, s_rank: np.ndarray,
                   dc: DifferenceCover) -> np.ndarray:
    """members-less-than-splitter mask under the pairwise cover shift."""
    v = dc.v
    elem_index = np.full(v, -1, dtype=np.int64)
    elem_index[dc.elements] = np.arange(dc.size)
    ks = np.arange(v)
    a = dc.pair_first[(s_class - ks) % v]
    lam = (a - ks) % v
    my_col = elem_index[(ks + lam) % v]
    sp_col = elem_index[(s_class + lam) % v]
    mine = rankvec[np.arange(classes.shape[0]), my_col[classes]]
    target = s_rank[sp_col[classes]]
    return mine < target


# ----------------------------------------------------- span classification

@dataclass(frozen=True)
class _Chain:
    """A gram bucket crossing processor boundaries: who holds it and where."""

    procs: tuple[int, ...]
    start: int            # global sorted position of the first member
    sizes: tuple[int, ...]  # member count held by each proc in procs

    @property
    def total(self) -> int:
        return int(sum(self.sizes))


def _classify_chains(summaries: dict[int, dict], ranges) -> list[_Chain]:
    """Replicated boundary-bucket analysis from per-processor summaries.

    summaries[pi] = {"first": gram, "flen": run length, "last": gram,
    "llen": run length, "size": rows}; blocks after the first empty one are
    empty too and never appear. A chain is a maximal run of processors
    linked by equal grams across their shared boundary.
    """
    live = sorted(pi for pi, s in summaries.items() if s["size"] > 0)
    chains: list[_Chain] = []
    i = 0
    while i < len(live) - 1:
        a, b = live[i], live[i + 1]
        if not np.array_equal(summaries[a]["last"], summaries[b]["first"]):
            i += 1
            continue
        procs = [a, b]
        sizes = [int(summaries[a]["llen"]), int(summaries[b]["flen"])]
        # extend right while the bucket swallows whole blocks
        while (sizes[-1] == summaries[procs[-1]]["size"]
               and procs[-1] != live[-1]):
            nxt = live[live.index(procs[-1]) + 1]
            if not np.array_equal(summaries[procs[-1]]["last"],
                                  summaries[nxt]["first"]):
                break
            procs.append(nxt)
            sizes.append(int(summaries[nxt]["flen"]))
        start = ranges[procs[0]][1] - sizes[0]
        chains.append(_Chain(procs=tuple(procs), start=start,
                             sizes=tuple(sizes)))
        i = live.index(procs[-1])
        if sizes[-1] == summaries[procs[-1]]["size"]:
            i += 1  # fully consumed block cannot start another chain
    return chains


# ---------------------------------------------------------------- the driver

class _Run:
    """One parallel construction: machine, level plans, and phase drivers."""

    def __init__(self, t: Text, cfg: BspConfig, schedule: VSchedule,
                 schedule_seed: int | None):
        self.x0 = t.chars
        self.n0 = int(self.x0.shape[0])
        self.p = cfg.p
        self.machine = Machine(cfg, schedule_seed=schedule_seed)
        self.schedule = schedule
        self.plans: list[_LevelPlan] = []
        self.base_level: int | None = None   # level whose text is distinct
        self.handoff_plan: _LevelPlan | None = None

    # -- replicated-state peeking: every processor computed the same value
    def _peek(self, key: str):
        vals = [st.get(key) for st in self.machine.states]
        assert all(v == vals[0] for v in vals)
        return vals[0]

    def _lv(self, st: dict, level: int) -> dict:
        return st.setdefault("lv", {}).setdefault(level, {})

    def seed_input(self) -> None:
        """Distribute x_0 and the initial character halo (a precondition)."""
        plan = self.plans[0]
        for pid, (lo, hi) in enumerate(plan.ranges):
            st = self.machine.states[pid]
            d = self._lv(st, 0)
            d["x"] = self.x0[lo:hi].copy()
            halo = np.full(plan.v - 1, -1, dtype=np.int64)
            have = self.x0[hi: hi + plan.v - 1]
            halo[: have.shape[0]] = have
            d["halo"] = halo

    # ------------------------------------------------------------- descend

    def descend_round(self, plan: _LevelPlan) -> bool:
        """Build, sort, and rank the sampled v-grams; returns all-distinct."""
        lv, p, mach = plan.level, self.p, self.machine
        n, v, m = plan.n, plan.v, plan.m
        dc, rpc = plan.dc, plan.rpc
        inst = SortInstance(tag=f"r{lv}/x", m=m, width=v + 1, key_width=v + 1,
                            upper=n + 1, designated=0)
        steps = instance_steps(inst, p)

        if lv > 0:
            def fetch_halo(pid, ctx):
                d = self._lv(ctx.state, lv)
                lo, hi = plan.ranges[pid]
                _halo_sends(ctx, d["x"], (lo, hi), plan.ranges, v - 1,
                            tag=f"r{lv}/halo")
                ctx.charge(v)

            mach.superstep(fetch_halo, label=f"r{lv}/halo")
        # round 0's halo is part of the input distribution (seed_input)

        def build_rows(pid, ctx):
            d = self._lv(ctx.state, lv)
            if lv > 0:
                lo, hi = plan.ranges[pid]
                d["halo"] = _assemble_halo(ctx, hi, n, v - 1, f"r{lv}/halo")
            lo, hi = plan.ranges[pid]
            xe = np.concatenate([d["x"], d["halo"]])
            ids_parts, rows_parts = [], []
            for e_idx, k in enumerate(dc.elements.tolist()):
                first = lo + (k - lo) % v
                starts = np.arange(first, hi, v, dtype=np.int64)
                if not starts.shape[0]:
                    continue
                grams = xe[(starts - lo)[:, None]
                           + np.arange(v, dtype=np.int64)[None, :]]
                r = e_idx * rpc + starts // v
                ids_parts.append(r)
                rows_parts.append(np.column_stack([grams, r]))
            if ids_parts:
                ids = np.concatenate(ids_parts)
                rows = np.vstack(rows_parts)
            else:
                ids = np.zeros(0, dtype=np.int64)
                rows = np.zeros((0, v + 1), dtype=np.int64)
            ctx.charge(hi - lo + rows.size)
            d["xkeep"] = _route_rows(ctx, ids, rows, plan.xranges,
                                     tag=f"r{lv}/rows")

        mach.superstep(build_rows, label=f"r{lv}/rows")

        def assemble_and_sort(pid, ctx):
            d = self._lv(ctx.state, lv)
            xlo, xhi = plan.xranges[pid]
            runs = [data for _, data in ctx.inbox(f"r{lv}/rows")]
            runs.append(d.pop("xkeep"))
            # padding rows belong to whoever owns their slot; they carry no
            # text, so the owner materializes them locally
            r_all = np.arange(xlo, xhi, dtype=np.int64)
            origin = dc.elements[r_all // rpc] + v * (r_all % rpc)
            dummies = r_all[origin >= n]
            if dummies.shape[0]:
                pad = np.full((dummies.shape[0], v + 1), -1, dtype=np.int64)
                pad[:, v] = dummies
                runs.append(pad)
            rows = np.vstack(runs)
            assert rows.shape[0] == xhi - xlo
            ctx.state[inst.tag] = {"rows": rows}
            steps[0](ctx)

        mach.superstep(assemble_and_sort, label=f"r{lv}/xsort1")
        mach.superstep(lambda pid, ctx: steps[1](ctx), label=f"r{lv}/xsort2")
        mach.superstep(lambda pid, ctx: steps[2](ctx), label=f"r{lv}/xsort3")
        mach.superstep(lambda pid, ctx: steps[3](ctx), label=f"r{lv}/xsort4")

        def place_and_probe(pid, ctx):
            steps[4](ctx)
            mine = ctx.state[inst.tag]["result"]
            self._lv(ctx.state, lv)["xsorted"] = mine
            del ctx.state[inst.tag]
            if mine.shape[0] and pid + 1 < p:
                nlo, nhi = plan.xranges[pid + 1]
                if nlo < nhi:
                    ctx.send(pid + 1, mine[-1, :v], tag=f"r{lv}/edge")

        mach.superstep(place_and_probe, label=f"r{lv}/xsort5")

        def flags_and_counts(pid, ctx):
            d = self._lv(ctx.state, lv)
            mine = d["xsorted"]
            grams = mine[:, :v]
            flags = np.ones(mine.shape[0], dtype=bool)
            if mine.shape[0] > 1:
                flags[1:] = np.any(grams[1:] != grams[:-1], axis=1)
            edge = ctx.inbox(f"r{lv}/edge")
            if edge and mine.shape[0]:
                flags[0] = bool(np.any(grams[0] != edge[0][1]))
            d["flags"] = flags
            ctx.charge(grams.size)
            count = int(flags.sum())
            d["flagcount"] = count
            for dst in range(p):
                if dst != pid:
                    ctx.send(dst, count, tag=f"r{lv}/fc")

        mach.superstep(flags_and_counts, label=f"r{lv}/flags")

        def rank_and_route(pid, ctx):
            d = self._lv(ctx.state, lv)
            counts = np.zeros(p, dtype=np.int64)
            counts[pid] = d["flagcount"]
            for src, c in ctx.inbox(f"r{lv}/fc"):
                counts[src] = c
            ctx.state["distinct"] = bool(counts.sum() == m)
            flags = d.pop("flags")
            ranks = counts[:pid].sum() + np.cumsum(flags) - 1
            mine = d.pop("xsorted")
            pairs = np.column_stack([mine[:, v], ranks])
            ctx.charge(pairs.size)
            d["rkeep"] = _route_rows(ctx, pairs[:, 0], pairs, plan.xranges,
                                     tag=f"r{lv}/ranks")

        mach.superstep(rank_and_route, label=f"r{lv}/ranks")

        def store_next(pid, ctx):
            d = self._lv(ctx.state, lv)
            xlo, xhi = plan.xranges[pid]
            xs = np.empty(xhi - xlo, dtype=np.int64)
            wrote = 0
            for pairs in ([data for _, data in ctx.inbox(f"r{lv}/ranks")]
                          + [d.pop("rkeep")]):
                xs[pairs[:, 0] - xlo] = pairs[:, 1]
                wrote += pairs.shape[0]
            assert wrote == xhi - xlo
            ctx.charge(wrote)
            deeper = self._lv(ctx.state, lv + 1)
            deeper["x"] = xs
            if ctx.state["distinct"]:
                # a permutation text is its own suffix rank table
                deeper["isa"] = xs

        mach.superstep(store_next, label=f"r{lv}/store")
        return bool(self._peek("distinct"))

    # ------------------------------------------------------------- handoff

    def sequential_handoff(self, plan: _LevelPlan) -> int:
        """Gather x_{ell+1} on processor 0, finish it there, scatter ranks."""
        mach, p = self.machine, self.p
        lv = plan.level
        xranges = plan.xranges

        def gather(pid, ctx):
            d = self._lv(ctx.state, lv + 1)
            if pid != 0:
                ctx.send(0, d["x"], tag="handoff/g")

        mach.superstep(gather, label="handoff/gather")

        seq_work = [0]

        def solve(pid, ctx):
            if pid != 0:
                return
            parts = [self._lv(ctx.state, lv + 1)["x"]]
            parts += [data for _, data in ctx.inbox("handoff/g")]
            xs = np.concatenate(parts)
            assert xs.shape[0] == plan.m

            def count(level, v, n, dcount, touches):
                seq_work[0] += touches

            sa = dc_suffix_array(Text(xs), VSchedule.fixed(3), on_level=count)
            isa = np.empty(xs.shape[0], dtype=np.int64)
            isa[sa] = np.arange(xs.shape[0])
            ctx.charge(seq_work[0] if seq_work[0] else xs.shape[0])
            for dst, (lo, hi) in enumerate(xranges):
                if dst == 0:
                    self._lv(ctx.state, lv + 1)["isa"] = isa[lo:hi]
                elif hi > lo:
                    ctx.send(dst, isa[lo:hi], tag="handoff/s")

        mach.superstep(solve, label="handoff/solve")

        def store(pid, ctx):
            if pid != 0:
                got = ctx.inbox("handoff/s")
                lo, hi = xranges[pid]
                part = got[0][1] if got else np.zeros(0, dtype=np.int64)
                assert part.shape[0] == hi - lo
                self._lv(ctx.state, lv + 1)["isa"] = part

        mach.superstep(store, label="handoff/store")
        return 3

    # -------------------------------------------------------------- unwind

    def unwind_level(self, plan: _LevelPlan) -> None:
        lv, p, mach = plan.level, self.p, self.machine
        n, v, m, dc = plan.n, plan.v, plan.m, plan.dc
        d_sz, rpc, nd_pad = plan.d, plan.rpc, plan.nd
        elem_index = np.full(v, -1, dtype=np.int64)
        elem_index[dc.elements] = np.arange(d_sz)
        lam_table = (dc.elements[None, :] - np.arange(v)[:, None]) % v
        gaps = np.zeros(v, dtype=np.int64)  # class k -> l_k, 0 on cover
        for k in range(v):
            if not dc.member[k]:
                g = 1
                while not dc.member[(k + g) % v]:
                    g += 1
                gaps[k] = g

        nonsample = [k for k in range(v) if not dc.member[k]]
        if len(nonsample) >= p:
            self.machine.warn(
                f"level {lv}: {len(nonsample)} class sorts share {p} "
                "processors; designated processors collide")
        class_sizes = {k: (n - k + v - 1) // v for k in nonsample}
        s2 = {k: SortInstance(tag=f"u{lv}/c{k}", m=class_sizes[k],
                              width=int(gaps[k]) + 2,
                              key_width=int(gaps[k]) + 1,
                              upper=n + 1, designated=idx % p)
              for idx, k in enumerate(nonsample)}
        s3 = SortInstance(tag=f"u{lv}/g", m=n, width=v + 1 + d_sz,
                          key_width=v + 1, upper=n + 1,
                          designated=len(nonsample) % p)
        insts = list(s2.values()) + [s3]
        steps = {i.tag: instance_steps(i, p) for i in insts}

        def rank_route(pid, ctx):
            d = self._lv(ctx.state, lv + 1)
            xlo, xhi = plan.xranges[pid]
            isa = d["isa"]
            r = np.arange(xlo, xhi, dtype=np.int64)
            origin = dc.elements[r // rpc] + v * (r % rpc)
            real = origin < n
            # padding-row suffixes are the globally smallest ones
            assert (isa[~real] < nd_pad).all()
            pairs = np.column_stack([origin[real], isa[real] - nd_pad])
            ctx.charge(pairs.size)
            self._lv(ctx.state, lv)["skeep"] = _route_rows(
                ctx, pairs[:, 0], pairs, plan.ranges, tag=f"u{lv}/sr")

        mach.superstep(rank_route, label=f"u{lv}/rank-route")

        def rank_store(pid, ctx):
            d = self._lv(ctx.state, lv)
            lo, hi = plan.ranges[pid]
            rank = np.full(hi - lo, -1, dtype=np.int64)
            for pairs in ([data for _, data in ctx.inbox(f"u{lv}/sr")]
                          + [d.pop("skeep")]):
                rank[pairs[:, 0] - lo] = pairs[:, 1]
            d["rank"] = rank
            ctx.charge(rank.shape[0])
            _halo_sends(ctx, rank, (lo, hi), plan.ranges, v, tag=f"u{lv}/rh")

        mach.superstep(rank_store, label=f"u{lv}/rank-store")

        def build_and_sort(pid, ctx):
            d = self._lv(ctx.state, lv)
            lo, hi = plan.ranges[pid]
            rh = _assemble_halo(ctx, hi, n, v, f"u{lv}/rh")
            rank_ext = np.concatenate([d["rank"], rh])
            x_ext = np.concatenate([d["x"], d["halo"],
                                    np.full(1, -1, dtype=np.int64)])
            i_all = np.arange(lo, hi, dtype=np.int64)
            off = i_all - lo
            built = 0
            for k in nonsample:
                sel = off[(i_all % v) == k]
                gk = int(gaps[k])
                cols = [x_ext[sel[:, None] + np.arange(gk)[None, :]],
                        rank_ext[sel + gk][:, None], (sel + lo)[:, None]]
                ctx.state[s2[k].tag] = {"rows": np.hstack(cols)}
                built += cols[0].size + 2 * sel.shape[0]
            grams = x_ext[off[:, None] + np.arange(v)[None, :]]
            rvec = rank_ext[off[:, None] + lam_table[i_all % v]]
            rows3 = np.hstack([grams, i_all[:, None], rvec])
            ctx.state[s3.tag] = {"rows": rows3}
            ctx.charge(built + rows3.size)
            for i in insts:
                steps[i.tag][0](ctx)

        mach.superstep(build_and_sort, label=f"u{lv}/build")

        for step_no, lbl in ((1, "ssamp"), (2, "spart"), (3, "sbucket")):
            def multi(pid, ctx, s=step_no):
                for i in insts:
                    steps[i.tag][s](ctx)
            mach.superstep(multi, label=f"u{lv}/{lbl}")

        def place_and_summarize(pid, ctx):
            for i in insts:
                steps[i.tag][4](ctx)
            d = self._lv(ctx.state, lv)
            mine = ctx.state[s3.tag]["result"]
            d["g"] = mine
            for i in insts:
                del ctx.state[i.tag]
            grams = mine[:, :v]
            size = mine.shape[0]
            if size:
                neq = np.any(grams[1:] != grams[:-1], axis=1)
                flen = int(neq.argmax()) + 1 if neq.any() else size
                llen = size - (int(np.flatnonzero(neq)[-1]) + 1) if neq.any() \
                    else size
                summary = {"first": grams[0].copy(), "flen": flen,
                           "last": grams[-1].copy(), "llen": llen,
                           "size": size}
            else:
                z = np.zeros(0, dtype=np.int64)
                summary = {"first": z, "flen": 0, "last": z, "llen": 0,
                           "size": 0}
            d["summary"] = summary
            for dst in range(p):
                if dst != pid:
                    ctx.send(dst, summary, tag=f"u{lv}/sum")

        mach.superstep(place_and_summarize, label=f"u{lv}/place")

        sranges = tuple(block_ranges(n, p))  # s3 output layout

        def resolve_local(pid, ctx):
            d = self._lv(ctx.state, lv)
            summaries = {src: data for src, data in ctx.inbox(f"u{lv}/sum")}
            summaries[pid] = d.pop("summary")
            chains = _classify_chains(summaries, sranges)
            ctx.state["chain_shapes"] = [(c.procs, c.start) for c in chains]
            d["chains"] = chains
            mine = d["g"]
            slo, shi = sranges[pid]
            emit_i, emit_q = [], []
            d["emit"] = (emit_i, emit_q)
            d["merge_out"] = 0
            if mine.shape[0] == 0:
                return
            grams = mine[:, :v]
            ids = mine[:, v]
            rvec = mine[:, v + 1:]
            classes = ids % v
            flags = np.ones(mine.shape[0], dtype=bool)
            flags[1:] = np.any(grams[1:] != grams[:-1], axis=1)
            gids = np.cumsum(flags) - 1
            cut_lo, cut_hi = 0, mine.shape[0]
            for c in chains:
                if pid == c.procs[0]:
                    cut_hi = mine.shape[0] - c.sizes[0]
                elif pid in c.procs:
                    piece = c.sizes[c.procs.index(pid)]
                    cut_lo = piece
                    if pid != c.procs[-1]:   # whole block inside the bucket
                        cut_hi = piece
            local = np.arange(cut_lo, cut_hi)
            if local.shape[0]:
                sub_g = gids[local] - gids[local[0]]
                perm = _order_within_groups(sub_g, classes[local],
                                            rvec[local], dc,
                                            stream_pos=rvec[local, 0])
                emit_i.append(ids[local[perm]])
                emit_q.append(slo + local)
                ctx.charge(local.shape[0] * (d_sz + 2))
            # boundary buckets: two processors -> ship to the lower one;
            # wider -> order own piece and send spaced samples to the lead
            for cid, c in enumerate(chains):
                if pid not in c.procs:
                    continue
                at = c.procs.index(pid)
                sz = c.sizes[at]
                piece = (slice(mine.shape[0] - sz, mine.shape[0])
                         if at == 0 else slice(0, sz))
                rows = np.column_stack([ids[piece], rvec[piece]])
                if len(c.procs) == 2:
                    if at == 1:
                        ctx.send(c.procs[0], rows, tag=f"u{lv}/g2/{cid}")
                        d["merge_out"] += rows.size
                    else:
                        d[f"own2/{cid}"] = rows
                    continue
                perm = _order_single_group(classes[piece], rvec[piece], dc)
                ordered = rows[perm]
                d[f"wrun/{cid}"] = ordered
                picks = (np.arange(len(c.procs) + 1, dtype=np.int64)
                         * (ordered.shape[0] - 1)) // len(c.procs) \
                    if ordered.shape[0] else np.zeros(0, dtype=np.int64)
                samples = ordered[picks] if ordered.shape[0] \
                    else ordered[:0]
                ctx.charge(sz * (d_sz + 2))
                if pid == c.procs[0]:
                    d[f"wsamp/{cid}"] = samples
                else:
                    ctx.send(c.procs[0], samples, tag=f"u{lv}/ws/{cid}")
                    d["merge_out"] += samples.size

        mach.superstep(resolve_local, label=f"u{lv}/resolve")
        chain_shapes = self._peek("chain_shapes")
        has_two = any(len(procs) == 2 for procs, _ in chain_shapes)
        has_wide = any(len(procs) > 2 for procs, _ in chain_shapes)

        if has_two or has_wide:
            def two_and_lead(pid, ctx):
                d = self._lv(ctx.state, lv)
                emit_i, emit_q = d["emit"]
                for cid, c in enumerate(d["chains"]):
                    if len(c.procs) == 2 and pid == c.procs[0]:
                        got = ctx.inbox(f"u{lv}/g2/{cid}")
                        rows = np.vstack([d.pop(f"own2/{cid}"), got[0][1]])
                        perm = _order_single_group(rows[:, 0] % v,
                                                   rows[:, 1:], dc)
                        emit_i.append(rows[perm, 0])
                        emit_q.append(c.start + np.arange(rows.shape[0]))
                        ctx.charge(rows.shape[0] * (d_sz + 2))
                    elif len(c.procs) > 2 and pid == c.procs[0]:
                        runs = [d.pop(f"wsamp/{cid}")]
                        runs += [data for _, data
                                 in ctx.inbox(f"u{lv}/ws/{cid}")]
                        smp = np.vstack(runs)
                        perm = _order_single_group(smp[:, 0] % v,
                                                   smp[:, 1:], dc)
                        smp = smp[perm]
                        p2 = len(c.procs)
                        picks = (np.arange(p2 + 1, dtype=np.int64)
                                 * (smp.shape[0] - 1)) // p2
                        spl = smp[picks]
                        ctx.charge(smp.size)
                        for dst in c.procs:
                            if dst != pid:
                                ctx.send(dst, spl, tag=f"u{lv}/wspl/{cid}")
                                d["merge_out"] += spl.size
                        d[f"wspl/{cid}"] = spl

            mach.superstep(two_and_lead, label=f"u{lv}/merge1")

        if has_wide:
            def wide_partition(pid, ctx):
                d = self._lv(ctx.state, lv)
                for cid, c in enumerate(d["chains"]):
                    if len(c.procs) <= 2 or pid not in c.procs:
                        continue
                    if pid == c.procs[0]:
                        spl = d.pop(f"wspl/{cid}")
                    else:
                        spl = ctx.inbox(f"u{lv}/wspl/{cid}")[0][1]
                    run = d.pop(f"wrun/{cid}")
                    cls = run[:, 0] % v
                    bucket = np.zeros(run.shape[0], dtype=np.int64)
                    for s_row in spl[1:-1]:
                        less = _split_against(cls, run[:, 1:],
                                              int(s_row[0]) % v, s_row[1:], dc)
                        bucket += ~less
                    p2 = len(c.procs)
                    ctx.charge(run.shape[0] * max(1, ceil(log2(p2))))
                    assert (np.diff(bucket) >= 0).all()
                    bounds = np.searchsorted(bucket, np.arange(p2 + 1))
                    counts = np.diff(bounds)
                    for at2, dst in enumerate(c.procs):
                        seg = run[bounds[at2]: bounds[at2 + 1]]
                        if dst == pid:
                            d[f"wseg/{cid}"] = [seg]
                        elif seg.shape[0]:
                            ctx.send(dst, seg, tag=f"u{lv}/wseg/{cid}")
                            d["merge_out"] += seg.size
                        if dst != pid:
                            ctx.send(dst, counts, tag=f"u{lv}/wct/{cid}")
                            d["merge_out"] += counts.shape[0]
                    d[f"wct/{cid}"] = {pid: counts}

            mach.superstep(wide_partition, label=f"u{lv}/merge2")

            def wide_merge(pid, ctx):
                d = self._lv(ctx.state, lv)
                emit_i, emit_q = d["emit"]
                for cid, c in enumerate(d["chains"]):
                    if len(c.procs) <= 2 or pid not in c.procs:
                        continue
                    segs = d.pop(f"wseg/{cid}")
                    segs += [data for _, data
                             in ctx.inbox(f"u{lv}/wseg/{cid}")]
                    counts = d.pop(f"wct/{cid}")
                    for src, data in ctx.inbox(f"u{lv}/wct/{cid}"):
                        counts[src] = data
                    mat = np.vstack([counts[q] for q in c.procs])
                    at = c.procs.index(pid)
                    base = c.start + int(mat[:, :at].sum())
                    rows = np.vstack(segs)
                    assert rows.shape[0] == int(mat[:, at].sum())
                    perm = _order_single_group(rows[:, 0] % v, rows[:, 1:], dc)
                    emit_i.append(rows[perm, 0])
                    emit_q.append(base + np.arange(rows.shape[0]))
                    ctx.charge(rows.shape[0] * (d_sz + 2))

            mach.superstep(wide_merge, label=f"u{lv}/merge3")

        def emit(pid, ctx):
            d = self._lv(ctx.state, lv)
            emit_i, emit_q = d.pop("emit")
            i_arr = (np.concatenate(emit_i) if emit_i
                     else np.zeros(0, dtype=np.int64))
            q_arr = (np.concatenate(emit_q) if emit_q
                     else np.zeros(0, dtype=np.int64))
            # a processor handles at most its block plus two boundary
            # buckets; the quadratic slop covers splitter and count fan-out
            bound = (d_sz + 1) * (sranges[pid][1] - sranges[pid][0] + v) \
                + (p + 2) * (p + 2) * (v + d_sz + 2)
            assert d.pop("merge_out") <= bound
            ctx.charge(i_arr.shape[0] * 2)
            if lv == 0:
                pairs = np.column_stack([q_arr, i_arr])
                d["akeep"] = _route_rows(ctx, pairs[:, 0], pairs, plan.ranges,
                                         tag="sa/out")
            else:
                pairs = np.column_stack([i_arr, q_arr])
                d["akeep"] = _route_rows(ctx, pairs[:, 0], pairs, plan.ranges,
                                         tag=f"u{lv}/isa")

        mach.superstep(emit, label=f"u{lv}/emit")

        def store(pid, ctx):
            d = self._lv(ctx.state, lv)
            lo, hi = plan.ranges[pid]
            out = np.empty(hi - lo, dtype=np.int64)
            wrote = 0
            tag = "sa/out" if lv == 0 else f"u{lv}/isa"
            for pairs in ([data for _, data in ctx.inbox(tag)]
                          + [d.pop("akeep")]):
                out[pairs[:, 0] - lo] = pairs[:, 1]
                wrote += pairs.shape[0]
            assert wrote == hi - lo
            ctx.charge(wrote)
            if lv == 0:
                ctx.state["sa"] = out
            else:
                d["isa"] = out
            for key in ("g", "rank", "chains"):
                d.pop(key, None)

        mach.superstep(store, label=f"u{lv}/store")

    # ------------------------------------------------------------- summary

    def collect_metrics(self) -> RoundMetrics:
        rounds = []
        for plan in self.plans:
            pre = (f"r{plan.level}/", f"u{plan.level}/")
            steps = [s for s in self.machine.steps
                     if s.label and s.label.startswith(pre)]
            rounds.append({"v": plan.v, "d": plan.d, "n": plan.n,
                           "supersteps": len(steps),
                           "w": int(sum(s.w for s in steps)),
                           "h": int(sum(s.h for s in steps))})
        return RoundMetrics(rounds=rounds, total=self.machine.ledger(),
                            warnings=list(self.machine.warnings))


def bsp_suffix_array(t: Text, cfg: BspConfig, slack_policy: str = "enforce",
                     schedule: VSchedule | None = None,
                     schedule_seed: int | None = None,
                     ) -> tuple[np.ndarray, RoundMetrics]:
    """Suffix array of t on the simulated p-processor machine.

    Returns (sa, RoundMetrics). The result equals the sequential
    construction for every p; rounds follow the accelerated schedule
    v_0 = 3, v_{i+1} = min(ceil(v_i^(5/4)), |X'|) unless a different
    schedule is given. slack_policy "enforce" requires n >= p^(9/2);
    "relaxed" proceeds with a recorded warning.
    """
    if slack_policy not in ("enforce", "relaxed"):
        raise ValueError(f"unknown slack policy {slack_policy!r}")
    if schedule is None:
        schedule = VSchedule.accelerated()
    n, p = int(t.chars.shape[0]), cfg.p

    if p == 1:
        machine = Machine(cfg, schedule_seed=schedule_seed)
        hold = {}

        def solo(pid, ctx):
            work = [0]
            sa = dc_suffix_array(t, schedule,
                                 on_level=lambda *rec: work.__setitem__(
                                     0, work[0] + rec[4]))
            ctx.charge(work[0] if work[0] else max(n, 1))
            hold["sa"] = sa

        machine.superstep(solo, label="seq")
        return hold["sa"], RoundMetrics(rounds=[], total=machine.ledger(),
                                        warnings=list(machine.warnings))

    if n < p:
        raise ValueError(f"text of length {n} cannot be distributed "
                         f"over p={p} processors")
    if n * n < p ** 9:
        if slack_policy == "enforce":
            raise SlackError(f"n={n} below the sampling slack p^(9/2)")

    run = _Run(t, cfg, schedule, schedule_seed)
    if n * n < p ** 9:
        run.machine.warn(f"n={n} below sampling slack p^(9/2); "
                         "bucket balance guarantees degraded")

    v = max(3, min(schedule.start, n))
    run.plans.append(_make_plan(0, n, v, p))
    run.seed_input()
    level = 0
    while True:
        plan = run.plans[level]
        distinct = run.descend_round(plan)
        if distinct:
            run.base_level = level + 1
            break
        if plan.m <= n // p or plan.m >= plan.n:
            if plan.m >= plan.n:
                run.machine.warn(
                    f"level {level}: sample string did not shrink "
                    f"({plan.m} of {plan.n}); forced sequential handoff")
            run.handoff_plan = plan
            run.sequential_handoff(plan)
            break
        nxt = schedule.propose(level + 1, plan.v)
        v_next = max(3, min(nxt, plan.m))
        run.plans.append(_make_plan(level + 1, plan.m, v_next, p))
        level += 1

    for plan in reversed(run.plans):
        run.unwind_level(plan)

    parts = [run.machine.states[pid]["sa"] for pid in range(p)]
    sa = np.concatenate(parts)
    return sa, run.collect_metrics()
