"""A deterministic simulated bulk-synchronous parallel machine.

The model: p processors alternate between local computation and a global
exchange, separated by barrier synchronizations. One compute+exchange+barrier
unit is a superstep. Execution cost over a run is

    cost = W + H * g + S * L

where W is total work (sum over supersteps of the max per-processor work),
H is total communication (sum over supersteps of the max per-processor words
sent plus words received, charged in the sending superstep), S is the number
of supersteps, and g, L are the machine's per-word and per-barrier prices.

The simulator is sequential and deterministic: "processors" are callbacks run
in pid order, messages become visible in the next superstep, and delivery
order is fixed (by sender, then send sequence). An optional schedule seed
shuffles the order in which processor callbacks run within a superstep; any
program whose result changes under that shuffle has a real data race on
shared state, so the seed doubles as a race detector.

Work is charged explicitly by the program (ctx.charge). Message handling also
costs one unit per word at each end; that tally is kept per superstep in a
separate channel (comm_work) so the explicit-work ledger stays comparable
across programs with different messaging styles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


@dataclass(frozen=True)
class BspConfig:
    """Machine shape: p processors, per-word price g, per-barrier price L."""

    p: int
    g: float = 1.0
    L: float = 100.0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"need at least one processor, got p={self.p}")
        if self.g < 0 or self.L < 0:
            raise ValueError("g and L must be non-negative")


def block_ranges(n: int, p: int) -> list[tuple[int, int]]:
    """Block distribution of [0, n) into p contiguous ranges.

    Every range but the last has exactly ceil(n/p) indices; the last takes
    the remainder. Trailing ranges may be empty when p does not divide the
    work evenly (degenerate but legal).
    """
    if p < 1:
        raise ValueError("p must be positive")
    b = -(-n // p) if n else 0
    return [(min(b * i, n), min(b * (i + 1), n)) for i in range(p)]


def _words(data: Any) -> int:
    """Message size in words: integers carried, shape ignored."""
    if isinstance(data, np.ndarray):
        return int(data.size)
    if isinstance(data, (list, tuple)):
        return sum(_words(x) for x in data)
    if isinstance(data, dict):
        return sum(_words(v) for v in data.values())
    if data is None:
        return 0
    return 1  # scalar


@dataclass
class _Message:
    src: int
    seq: int
    tag: str | None
    data: Any
    words: int


class _StepContext:
    """Per-processor view inside one superstep: inbox, send, charge, state."""

    __slots__ = ("pid", "machine", "_inbox", "_work", "_sent", "_seq")

    def __init__(self, pid: int, machine: "Machine", inbox: list[_Message]):
        self.pid = pid
        self.machine = machine
        self._inbox = inbox
        self._work = 0
        self._sent: list[tuple[int, _Message]] = []
        self._seq = 0

    @property
    def p(self) -> int:
        return self.machine.cfg.p

    @property
    def state(self) -> dict:
        """Processor-private scratch dict, persists across supersteps."""
        return self.machine.states[self.pid]

    def charge(self, work: int | float) -> None:
        """Charge local work units for this superstep."""
        if work < 0:
            raise ValueError("work must be non-negative")
        self._work += int(work)

    def send(self, dst: int, data: Any, tag: str | None = None) -> None:
        """Queue data for dst; it arrives in dst's next-superstep inbox."""
        if not (0 <= dst < self.p):
            raise ValueError(f"bad destination {dst}")
        msg = _Message(src=self.pid, seq=self._seq, tag=tag,
                       data=data, words=_words(data))
        self._seq += 1
        self._sent.append((dst, msg))

    def inbox(self, tag: str | None = None) -> list[tuple[int, Any]]:
        """Messages delivered this superstep as (src, data), sorted by
        (src, send order). tag filters; None returns everything."""
        out = [(m.src, m.data) for m in self._inbox
               if tag is None or m.tag == tag]
        return out


@dataclass
class _StepRecord:
    w: int
    h: int
    label: str | None
    work_per_proc: np.ndarray
    out_words: np.ndarray
    in_words: np.ndarray
    comm_work: int


class Machine:
    """The simulator. Drive it by calling superstep(fn) repeatedly.

    fn(pid, ctx) runs once per processor, in pid order (or a seeded shuffle).
    Messages sent in superstep s are readable in superstep s+1. Cost records
    accumulate in self.steps; ledger()/ledger_json() summarize them.
    """

    def __init__(self, cfg: BspConfig, schedule_seed: int | None = None):
        self.cfg = cfg
        self.states: list[dict] = [{} for _ in range(cfg.p)]
        self.steps: list[_StepRecord] = []
        self.warnings: list[str] = []
        self.events: list[tuple[int, str]] = []  # (superstep index, label)
        self._pending: list[list[_Message]] = [[] for _ in range(cfg.p)]
        self._rng = (np.random.default_rng(schedule_seed)
                     if schedule_seed is not None else None)

    @property
    def p(self) -> int:
        return self.cfg.p

    def warn(self, text: str) -> None:
        self.warnings.append(text)

    def superstep(self, fn: Callable[[int, _StepContext], None],
                  label: str | None = None) -> _StepRecord:
        p = self.cfg.p
        inboxes = self._pending
        self._pending = [[] for _ in range(p)]

        order = list(range(p))
        if self._rng is not None:
            self._rng.shuffle(order)

        work = np.zeros(p, dtype=np.int64)
        out_words = np.zeros(p, dtype=np.int64)
        in_words = np.zeros(p, dtype=np.int64)
        for pid in range(p):
            in_words[pid] = sum(m.words for m in inboxes[pid])

        contexts = []
        for pid in order:
            box = sorted(inboxes[pid], key=lambda m: (m.src, m.seq))
            ctx = _StepContext(pid, self, box)
            fn(pid, ctx)
            contexts.append(ctx)

        for ctx in contexts:
            work[ctx.pid] = ctx._work
            for dst, msg in ctx._sent:
                out_words[ctx.pid] += msg.words
                self._pending[dst].append(msg)

        # h charges both ends in the sending superstep: words leaving the
        # busiest sender plus words arriving at the busiest receiver
        incoming = np.zeros(p, dtype=np.int64)
        for dst in range(p):
            incoming[dst] = sum(m.words for m in self._pending[dst])
        h = int(out_words.max() + incoming.max()) if p else 0
        comm_work = int(out_words.sum() + in_words.sum())

        rec = _StepRecord(w=int(work.max()) if p else 0, h=h, label=label,
                          work_per_proc=work, out_words=out_words,
                          in_words=in_words, comm_work=comm_work)
        self.steps.append(rec)
        if label:
            self.events.append((len(self.steps) - 1, label))
        return rec

    def drain(self) -> None:
        """Deliver any still-pending messages in a no-op superstep."""
        if any(self._pending):
            self.superstep(lambda pid, ctx: None, label="drain")

    def ledger(self) -> dict:
        """Cost summary: {p, supersteps: [{w, h}...], W, H, S}."""
        steps = [{"w": s.w, "h": s.h} for s in self.steps]
        return {
            "p": self.cfg.p,
            "supersteps": steps,
            "W": int(sum(s.w for s in self.steps)),
            "H": int(sum(s.h for s in self.steps)),
            "S": len(self.steps),
        }

    def ledger_json(self) -> str:
        return json.dumps(self.ledger(), indent=2)


def ledger_cost(ledger: dict, g: float, L: float) -> float:
    """Scalar cost W + H*g + S*L of a ledger dict."""
    return ledger["W"] + ledger["H"] * g + ledger["S"] * L


def run_bsp(program: list[Callable[[int, Any, list], tuple[Any, list, int]]],
            cfg: BspConfig, dist: "DistArray | list[Any]",
            schedule_seed: int | None = None) -> tuple[list[Any], dict]:
    """Run a fixed sequence of superstep functions on a fresh Machine.

    Each entry of program is one superstep: fn(pid, state, inbox) ->
    (new_state, msgs, work), with msgs a list of (dst, data) pairs and inbox
    the (src, data) messages sent in the previous superstep. dist seeds the
    per-processor state (a DistArray contributes its local parts). Returns
    (final per-processor states, ledger); an empty program yields an
    all-zero ledger.
    """
    parts = dist.parts if isinstance(dist, DistArray) else list(dist)
    if len(parts) != cfg.p:
        raise ValueError("dist must have one entry per processor")
    m = Machine(cfg, schedule_seed=schedule_seed)
    for pid in range(cfg.p):
        m.states[pid]["u"] = parts[pid]

    for fn in program:
        def step(pid: int, ctx: _StepContext, fn=fn) -> None:
            st = ctx.state
            new_state, msgs, work = fn(pid, st["u"], ctx.inbox())
            ctx.charge(work)
            for dst, data in msgs:
                ctx.send(dst, data)
            st["u"] = new_state

        m.superstep(step)

    return [st["u"] for st in m.states], m.ledger()


class DistArray:
    """A block-distributed numpy array: parts[i] lives on processor i.

    Parts are 1-D or 2-D with equal trailing dimensions; concatenation along
    axis 0 reconstructs the global array.
    """

    def __init__(self, parts: list[np.ndarray]):
        if not parts:
            raise ValueError("need at least one part")
        trailing = {p.shape[1:] for p in parts}
        if len(trailing) != 1:
            raise ValueError("parts disagree on trailing shape")
        self.parts = [np.ascontiguousarray(p) for p in parts]

    @property
    def p(self) -> int:
        return len(self.parts)

    def __len__(self) -> int:
        return sum(p.shape[0] for p in self.parts)

    @classmethod
    def scatter(cls, arr: np.ndarray, p: int) -> "DistArray":
        """Split arr into p near-equal contiguous blocks."""
        arr = np.asarray(arr)
        return cls([arr[lo:hi] for lo, hi in block_ranges(arr.shape[0], p)])

    def gather(self) -> np.ndarray:
        return np.concatenate(self.parts, axis=0)

    def sizes(self) -> list[int]:
        return [p.shape[0] for p in self.parts]
