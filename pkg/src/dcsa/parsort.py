"""Parallel string sorting by regular sampling on the simulated BSP machine.

The plan, for p >= 2 processors and m fixed-width rows:

  1. each processor radix-sorts its block and sends p+1 equally spaced
     samples of it (first and last row included) to a designated processor
  2. the designated processor sorts the samples and broadcasts p+1 equally
     spaced secondary samples of them
  3. everyone partitions its sorted block against the p-1 interior
     splitters and ships sub-block chi to processor chi, plus the p bucket
     counts to everyone
  4. each processor radix-sorts what it received (one bucket of the global
     order), computes its bucket's global offset from the counts, and
     re-ships contiguous slices to the final block owners
  5. owners place the slices; the result is block-distributed

That is 5 supersteps whatever p and m are; a single processor just sorts
locally in one superstep. The sample slack m >= p^3 keeps buckets within a
constant factor of m/p; below it the sort stays correct but balance (and
the per-processor communication bound) degrades.

The machinery is written so several logically concurrent sort instances can
share supersteps: every instance keeps its state under its own tag in the
per-processor state dict and prefixes all message tags. The suffix-array
driver leans on that to run one sort per residue class inside a common
superstep schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .bspsim import BspConfig, DistArray, Machine, block_ranges
from .radix import lex_sort_rows

# supersteps of one multi-processor sort; p=1 degenerates to a single step
SORT_SUPERSTEPS = 5


class SlackError(ValueError):
    """Input too small for the sampling guarantees under the enforce policy."""


@dataclass(frozen=True)
class SortInstance:
    """One logical sort: tag namespace, row geometry, and target layout.

    width counts all columns per row; the leading key_width columns are the
    sort key (they must be globally distinct), trailing columns just ride
    along. upper is an exclusive bound on every cell value (cells >= -1).
    """

    tag: str
    m: int
    width: int
    key_width: int
    upper: int
    designated: int = 0

    def out_ranges(self, p: int) -> list[tuple[int, int]]:
        return block_ranges(self.m, p)


def _row_ge(keys: np.ndarray, splitter: np.ndarray) -> np.ndarray:
    """Per row: key >= splitter in lexicographic order (vectorized)."""
    n = keys.shape[0]
    out = np.zeros(n, dtype=bool)
    decided = np.zeros(n, dtype=bool)
    for c in range(keys.shape[1]):
        col = keys[:, c]
        out[~decided & (col > splitter[c])] = True
        decided |= col != splitter[c]
    out[~decided] = True  # equal rows compare >=
    return out


def _spaced_picks(count: int, p: int) -> np.ndarray:
    """p+1 equally spaced indices into [0, count), first and last included."""
    return (np.arange(p + 1, dtype=np.int64) * (count - 1)) // p


def instance_steps(inst: SortInstance, p: int) -> list:
    """The five superstep functions of one sort instance.

    Each takes a _StepContext and works on ctx.state[inst.tag]; the driver
    must seed that dict with {"rows": (m_local, width) int64 array} before
    the first step runs. After the last step the dict holds "result", the
    processor's block of the sorted sequence per inst.out_ranges.
    """
    kw = inst.key_width
    t_ps, t_ss = f"{inst.tag}/ps", f"{inst.tag}/ss"
    t_bk, t_ct, t_rb = f"{inst.tag}/bk", f"{inst.tag}/ct", f"{inst.tag}/rb"
    search_depth = max(1, ceil(log2(p)))

    def local_sort(ctx) -> None:
        st = ctx.state[inst.tag]
        rows = st.pop("rows")
        srt = rows[lex_sort_rows(rows[:, :kw], inst.upper)]
        st["sorted"] = srt
        ctx.charge(srt.shape[0] * kw + p + 1)
        if srt.shape[0] >= p + 1:
            samples = srt[_spaced_picks(srt.shape[0], p), :kw]
        else:
            # too few rows for spaced picks: the whole block serves
            samples = srt[:, :kw]
        if ctx.pid == inst.designated:
            st["own_samples"] = samples
        else:
            ctx.send(inst.designated, samples, tag=t_ps)

    def sample_sort(ctx) -> None:
        st = ctx.state[inst.tag]
        if ctx.pid != inst.designated:
            return
        runs = [data for _, data in ctx.inbox(t_ps)]
        runs.append(st.pop("own_samples"))
        allsmp = np.vstack(runs)
        smp = allsmp[lex_sort_rows(allsmp, inst.upper)]
        ctx.charge(smp.shape[0] * kw)
        splitters = smp[_spaced_picks(smp.shape[0], p)] if smp.shape[0] else smp
        st["splitters"] = splitters
        for dst in range(p):
            if dst != ctx.pid:
                ctx.send(dst, splitters, tag=t_ss)

    def partition(ctx) -> None:
        st = ctx.state[inst.tag]
        if ctx.pid != inst.designated:
            st["splitters"] = ctx.inbox(t_ss)[0][1]
        splitters = st.pop("splitters")
        srt = st["sorted"]
        interior = splitters[1:-1] if splitters.shape[0] else splitters
        bucket = np.zeros(srt.shape[0], dtype=np.int64)
        for s in interior:
            bucket += _row_ge(srt[:, :kw], s)
        # modeled cost: binary search over the splitters per row
        ctx.charge(srt.shape[0] * kw * search_depth)
        bounds = np.searchsorted(bucket, np.arange(p + 1))
        counts = np.diff(bounds)
        st["counts_mine"] = counts
        for chi in range(p):
            seg = srt[bounds[chi]: bounds[chi + 1]]
            if chi == ctx.pid:
                st["keep"] = seg
            elif seg.shape[0]:
                ctx.send(chi, seg, tag=t_bk)
        for dst in range(p):
            if dst != ctx.pid:
                ctx.send(dst, counts, tag=t_ct)
        del st["sorted"]

    def bucket_sort(ctx) -> None:
        st = ctx.state[inst.tag]
        runs = [data for _, data in ctx.inbox(t_bk)]
        runs.append(st.pop("keep"))
        mine = np.vstack(runs)
        mine = mine[lex_sort_rows(mine[:, :kw], inst.upper)]
        ctx.charge(mine.shape[0] * (kw + 1))
        if mine.shape[0] > 1:
            # key uniqueness is the instance contract; duplicates within a
            # bucket would make the merge order depend on arrival order
            assert not (mine[1:, :kw] == mine[:-1, :kw]).all(axis=1).any(), \
                f"duplicate sort keys in instance {inst.tag}"

        counts = np.zeros((p, p), dtype=np.int64)
        counts[ctx.pid] = st.pop("counts_mine")
        for src, data in ctx.inbox(t_ct):
            counts[src] = data
        bucket_sizes = counts.sum(axis=0)
        start = int(bucket_sizes[:ctx.pid].sum())  # my bucket's global offset
        assert mine.shape[0] == bucket_sizes[ctx.pid]

        lo, hi = inst.out_ranges(p)[ctx.pid]
        st["out"] = np.empty((hi - lo, inst.width), dtype=np.int64)
        st["placed"] = 0
        for tau, (tlo, thi) in enumerate(inst.out_ranges(p)):
            cut_lo = max(tlo, start)
            cut_hi = min(thi, start + mine.shape[0])
            if cut_lo >= cut_hi:
                continue
            seg = mine[cut_lo - start: cut_hi - start]
            if tau == ctx.pid:
                st["out"][cut_lo - lo: cut_hi - lo] = seg
                st["placed"] += seg.shape[0]
            else:
                ctx.send(tau, {"rows": seg, "base": cut_lo}, tag=t_rb)

    def place(ctx) -> None:
        st = ctx.state[inst.tag]
        lo, _ = inst.out_ranges(p)[ctx.pid]
        got = 0
        for _, data in ctx.inbox(t_rb):
            seg, base = data["rows"], int(data["base"])
            st["out"][base - lo: base - lo + seg.shape[0]] = seg
            got += seg.shape[0]
        ctx.charge(got)
        st["result"] = st.pop("out")
        # buckets tile [0, m): every output cell is written exactly once
        assert st.pop("placed") + got == st["result"].shape[0]

    return [local_sort, sample_sort, partition, bucket_sort, place]


def _augment_with_index(y: DistArray) -> list[np.ndarray]:
    """Append each row's global index as a final key column (tie-break)."""
    parts = []
    offset = 0
    for part in y.parts:
        gidx = np.arange(offset, offset + part.shape[0], dtype=np.int64)
        parts.append(np.column_stack([part, gidx]))
        offset += part.shape[0]
    return parts


def bsp_string_sort(y: DistArray, kappa: int, cfg: BspConfig,
                    slack_policy: str = "enforce", designated: int = 0,
                    schedule_seed: int | None = None) -> tuple[DistArray, dict]:
    """Sort m width-kappa rows lexicographically, ties by original position.

    Returns (sorted DistArray, cost ledger). The output is block-distributed:
    ceil(m/p) rows per processor, remainder on the last. slack_policy governs
    the m >= p^3 sampling guarantee: "enforce" rejects smaller inputs,
    "relaxed" proceeds and records a warning in the ledger.
    """
    if slack_policy not in ("enforce", "relaxed"):
        raise ValueError(f"unknown slack policy {slack_policy!r}")
    for part in y.parts:
        if part.ndim != 2 or part.shape[1] != kappa:
            raise ValueError(f"rows must be 2-D with width {kappa}")
    m, p = len(y), cfg.p
    if y.p != p:
        raise ValueError(f"input has {y.p} parts for a p={p} machine")
    if m < p ** 3 and slack_policy == "enforce":
        raise SlackError(f"m={m} below the sampling slack p^3={p ** 3}")

    machine = Machine(cfg, schedule_seed=schedule_seed)
    if m < p ** 3 and slack_policy == "relaxed":
        machine.warn(f"m={m} below sampling slack p^3={p ** 3}; "
                     "balance guarantees degraded")

    cells = [int(part.max()) for part in y.parts if part.size]
    upper = max(cells + [0]) + 1
    upper = max(upper, m + 1)

    if p == 1:
        def solo(pid, ctx):
            rows = y.parts[0]
            perm = lex_sort_rows(rows, upper)
            ctx.state["result"] = rows[perm]
            ctx.charge(rows.shape[0] * kappa)

        machine.superstep(solo, label="sort/local")
        out = DistArray([machine.states[0]["result"]])
        return out, _ledger_with_warnings(machine)

    inst = SortInstance(tag="sort", m=m, width=kappa + 1, key_width=kappa + 1,
                        upper=upper, designated=designated)
    parts = _augment_with_index(y)
    for pid in range(p):
        machine.states[pid][inst.tag] = {"rows": parts[pid]}

    for i, fn in enumerate(instance_steps(inst, p)):
        machine.superstep(lambda pid, ctx, fn=fn: fn(ctx),
                          label=f"sort/{i + 1}")

    out_parts = [machine.states[pid][inst.tag]["result"][:, :kappa]
                 for pid in range(p)]
    out = DistArray(out_parts)
    assert out.sizes() == [hi - lo for lo, hi in block_ranges(m, p)]
    return out, _ledger_with_warnings(machine)


def _ledger_with_warnings(machine: Machine) -> dict:
    ledger = machine.ledger()
    if machine.warnings:
        ledger["warnings"] = list(machine.warnings)
    return ledger
