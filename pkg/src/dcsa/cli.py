"""Command-line front end: build, verify, and benchmark suffix arrays.

build reads a raw byte file, constructs its suffix array with the chosen
algorithm, and writes it in a binary or text format; the parallel builder
also drops a JSON cost report. verify checks an array file against its
text and names what broke (length, permutation, or suffix order). bench
sweeps a corpus directory over processor counts and schedules and emits
one CSV/JSON row per run with the ledger columns.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bspsim import BspConfig
from .parsa import bsp_suffix_array
from .seqsa import VSchedule, dc_suffix_array, naive_suffix_array
from .textcodec import Text, encode_bytes

_SA_DTYPE = "<u8"  # binary format: little-endian 8-byte unsigned, no header


def _write_sa(sa: np.ndarray, path: Path, fmt: str) -> None:
    if fmt == "bin":
        path.write_bytes(sa.astype(_SA_DTYPE).tobytes())
    else:
        path.write_text("".join(f"{i}\n" for i in sa.tolist()))


def _read_sa(path: Path, fmt: str) -> np.ndarray:
    if fmt == "bin":
        raw = path.read_bytes()
        if len(raw) % 8:
            raise ValueError(f"{path}: truncated binary suffix array")
        return np.frombuffer(raw, dtype=_SA_DTYPE).astype(np.int64)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    return np.asarray([int(ln) for ln in lines], dtype=np.int64)


def _read_text(path: Path) -> Text:
    return encode_bytes(path.read_bytes())


def check_sa(x: np.ndarray, sa: np.ndarray) -> str | None:
    """None if sa is the suffix array of x, else what is wrong with it."""
    n = x.shape[0]
    if sa.shape[0] != n:
        return f"length mismatch: text has {n} suffixes, file has {sa.shape[0]}"
    if n == 0:
        return None
    if sa.min() < 0 or sa.max() >= n or \
            np.bincount(sa, minlength=n).max() > 1:
        return "not a permutation of [0, n)"
    isa = np.empty(n, dtype=np.int64)
    isa[sa] = np.arange(n)
    nxt = np.full(n, -1, dtype=np.int64)
    nxt[: n - 1] = isa[1:]
    a, b = sa[:-1], sa[1:]
    ok = (x[a] < x[b]) | ((x[a] == x[b]) & (nxt[a] < nxt[b]))
    if not ok.all():
        at = int(np.flatnonzero(~ok)[0])
        return (f"order violation at entries {at} and {at + 1} "
                f"(suffixes {int(sa[at])}, {int(sa[at + 1])})")
    return None


def _machine_config(args) -> BspConfig:
    return BspConfig(p=args.procs, g=args.g, L=args.latency)


def _cmd_build(args) -> int:
    if args.algorithm != "bsp":
        if args.procs is not None:
            raise ValueError(f"--procs only applies to bsp, "
                             f"not {args.algorithm}")
        if args.slack is not None:
            raise ValueError("--slack only applies to bsp")
        if args.report is not None:
            raise ValueError("--report only applies to bsp")
    if args.algorithm == "seq-naive" and args.schedule is not None:
        raise ValueError("seq-naive takes no --schedule")

    src = Path(args.input)
    t = _read_text(src)
    out = Path(args.out) if args.out else src.with_suffix(src.suffix + ".sa")
    schedule = VSchedule.parse(args.schedule) if args.schedule else None

    if args.algorithm == "seq-naive":
        sa = naive_suffix_array(t)
    elif args.algorithm == "seq-dc":
        sa = dc_suffix_array(t, schedule)
    else:
        if args.procs is None:
            raise ValueError("bsp needs --procs")
        sa, metrics = bsp_suffix_array(
            t, _machine_config(args), slack_policy=args.slack or "enforce",
            schedule=schedule)
        report = Path(args.report) if args.report \
            else out.with_name(out.name + ".costs.json")
        report.write_text(metrics.to_json() + "\n")

    _write_sa(sa, out, args.format)
    return 0


def _cmd_verify(args) -> int:
    t = _read_text(Path(args.input))
    sa = _read_sa(Path(args.sa), args.format)
    problem = check_sa(t.chars, sa)
    if problem is None:
        print(f"ok: {args.sa} is the suffix array of {args.input}")
        return 0
    print(f"verification failed: {problem}", file=sys.stderr)
    return 1


def _cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    files = sorted(f for f in corpus.iterdir() if f.is_file())
    if not files:
        raise ValueError(f"no files in corpus directory {corpus}")
    procs = [int(s) for s in args.procs.split(",")]
    schedules = args.schedules.split(",")
    rows = []
    for f in files:
        t = _read_text(f)
        for tok in schedules:
            schedule = VSchedule.parse(tok)
            for p in procs:
                cfg = BspConfig(p=p, g=args.g, L=args.latency)
                _, metrics = bsp_suffix_array(
                    t, cfg, slack_policy=args.slack, schedule=schedule)
                tot = metrics.total
                rows.append({
                    "file": f.name, "n": len(t), "schedule": tok, "p": p,
                    "rounds": len(metrics.rounds), "S": tot["S"],
                    "W": tot["W"], "H": tot["H"],
                    "cost": tot["W"] + args.g * tot["H"]
                    + args.latency * tot["S"],
                })

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if args.report:
        Path(args.report).write_text(json.dumps(rows, indent=2) + "\n")
    return 0


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="dcsa", description="suffix array construction toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a suffix array")
    b.add_argument("input", help="raw byte file to index")
    b.add_argument("--algorithm", required=True,
                   choices=["seq-naive", "seq-dc", "bsp"])
    b.add_argument("--schedule", default=None,
                   help="fixed:V or accel (default accel)")
    b.add_argument("--procs", type=int, default=None,
                   help="simulated processors (bsp only)")
    b.add_argument("--g", type=float, default=1.0,
                   help="per-word communication cost (default 1)")
    b.add_argument("--latency", type=float, default=100.0,
                   help="per-superstep latency cost (default 100)")
    b.add_argument("--slack", default=None, choices=["enforce", "relaxed"],
                   help="sampling slack policy (bsp only, default enforce)")
    b.add_argument("--out", default=None,
                   help="suffix array file (default INPUT.sa)")
    b.add_argument("--report", default=None,
                   help="cost report path (bsp only, default OUT.costs.json)")
    b.add_argument("--format", default="bin", choices=["bin", "text"])
    b.set_defaults(func=_cmd_build)

    v = sub.add_parser("verify", help="check a suffix array file")
    v.add_argument("input", help="raw byte file")
    v.add_argument("sa", help="suffix array file")
    v.add_argument("--format", default="bin", choices=["bin", "text"])
    v.set_defaults(func=_cmd_verify)

    n = sub.add_parser("bench", help="sweep a corpus and emit cost tables")
    n.add_argument("corpus", help="directory of raw byte files")
    n.add_argument("--procs", default="1,2,4",
                   help="comma list of processor counts (default 1,2,4)")
    n.add_argument("--schedules", default="accel,fixed:3",
                   help="comma list of schedules (default accel,fixed:3)")
    n.add_argument("--g", type=float, default=1.0)
    n.add_argument("--latency", type=float, default=100.0)
    n.add_argument("--slack", default="relaxed",
                   choices=["enforce", "relaxed"],
                   help="slack policy for the sweep (default relaxed)")
    n.add_argument("--out", default=None, help="CSV path (default stdout)")
    n.add_argument("--report", default=None, help="JSON path (optional)")
    n.set_defaults(func=_cmd_bench)
    return top


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ValueError as e:      # SlackError included; bad flag combos
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
