"""Suffix-array construction via difference-cover sampling.

Two construction paths share one mathematical core:

- dc_suffix_array: sequential recursion that samples suffixes on a difference
  cover, recurses on the sample, and merges the rest back in.
- bsp_suffix_array: the same recursion executed as an explicit
  bulk-synchronous parallel program on a simulated machine, with per-superstep
  cost accounting (local work, message words, synchronizations).

Support modules: textcodec (alphabet normalization), dcover (difference
covers of Z_v), radix (stable integer sorting), bspsim (the simulated
machine), parsort (parallel sorting by regular sampling).
"""

from .bspsim import BspConfig, DistArray, Machine, block_ranges, ledger_cost, run_bsp
from .dcover import DifferenceCover, build_cover, is_cover, shift_for_pair
from .parsa import RoundMetrics, bsp_suffix_array, next_v
from .parsort import SlackError, bsp_string_sort
from .seqsa import (
    RankCorruptionError,
    VSchedule,
    dc_suffix_array,
    naive_suffix_array,
    verify_suffix_array,
)
from .textcodec import SENTINEL, Text, char_at, encode_bytes

__all__ = [
    "BspConfig",
    "DifferenceCover",
    "DistArray",
    "Machine",
    "RankCorruptionError",
    "RoundMetrics",
    "SENTINEL",
    "SlackError",
    "Text",
    "VSchedule",
    "block_ranges",
    "bsp_string_sort",
    "bsp_suffix_array",
    "build_cover",
    "char_at",
    "dc_suffix_array",
    "encode_bytes",
    "is_cover",
    "ledger_cost",
    "naive_suffix_array",
    "next_v",
    "run_bsp",
    "shift_for_pair",
    "verify_suffix_array",
]

__version__ = "0.1.0"
