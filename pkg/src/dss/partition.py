"""Sample selection, splitter determination, and bucket assignment.

Regular sampling exploits that local sets are already sorted: string-based
sampling picks v evenly spaced ranks, character-based sampling spaces the
picks evenly over the underlying characters (optionally over supplied
per-string weights) so that long strings attract proportionally more
splitters.  The global sample is sorted, p-1 splitters are read off at
evenly spaced ranks, and every PE partitions its local array against them
with binary search.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

from .comm import PE
from .exchange import pack_string_list, unpack_string_list
from .hquick import TaggedString, hquick_sort
from .strings import sort_with_lcp


@dataclass
class SamplingConfig:
    mode: str = "string"  # string | char | fk
    v: int = 1  # oversampling count per PE
    splitter_sorter: str = "hquick"  # hquick | centralized

    def __post_init__(self) -> None:
        if self.mode not in ("string", "char", "fk"):
            raise ValueError("unknown sampling mode %r" % self.mode)
        if self.splitter_sorter not in ("hquick", "centralized"):
            raise ValueError("unknown splitter sorter %r" % self.splitter_sorter)
        if self.v < 1:
            raise ValueError("oversampling count must be >= 1")


def sample_string_based(sorted_items: Sequence[bytes], v: int) -> list[bytes]:
    """v evenly spaced sample strings at ranks floor(j*n/(v+1)) - 1.

    Ranks are clamped into range and duplicate ranks dropped, so fewer than
    v samples come back from sets smaller than v+1.
    """
    n = len(sorted_items)
    if n == 0:
        return []
    picks: list[int] = []
    for j in range(1, v + 1):
        r = (j * n) // (v + 1) - 1
        r = min(max(r, 0), n - 1)
        if not picks or picks[-1] != r:
            picks.append(r)
    return [sorted_items[r] for r in picks]


def sample_char_based(
    sorted_items: Sequence[bytes],
    v: int,
    weights: Sequence[int] | None = None,
) -> list[bytes]:
    """Samples at character ranks j*total/(v+1) - 1, shifted to string starts.

    A rank landing inside a string selects the next string; ranks beyond the
    last string start clamp to the last string.  Consecutive equal picks are
    deduplicated.  `weights` replaces the plain lengths when sampling should
    follow approximate distinguishing lengths instead.
    """
    n = len(sorted_items)
    if n == 0:
        return []
    if weights is None:
        weights = [len(s) for s in sorted_items]
    starts = []
    pos = 0
    for w in weights:
        starts.append(pos)
        pos += w
    total = pos
    if total == 0:
        return sample_string_based(sorted_items, v)
    picks: list[int] = []
    for j in range(1, v + 1):
        r = (j * total) // (v + 1) - 1
        r = max(r, 0)
        i = bisect.bisect_left(starts, r)
        i = min(i, n - 1)
        if not picks or picks[-1] != i:
            picks.append(i)
    return [sorted_items[i] for i in picks]


def splitters_from_sorted_sample(
    sorted_sample: Sequence[bytes], p: int, v: int
) -> list[bytes]:
    """Read p-1 splitters off the globally sorted sample at ranks v*j - 1.

    With fewer than v*(p-1) samples the overflowing ranks repeat the largest
    sample; an entirely empty sample degenerates to empty-string splitters.
    """
    m = len(sorted_sample)
    splitters = []
    for j in range(1, p):
        if m == 0:
            splitters.append(b"")
            continue
        r = min(v * j - 1, m - 1)
        splitters.append(sorted_sample[r])
    return splitters


def select_splitters(
    pe: PE,
    sample: Sequence[bytes],
    v: int,
    *,
    sorter: str = "hquick",
    seed: int = 0,
    phase: str = "splitter-sort",
) -> list[bytes]:
    """Sort the global sample and hand every PE the identical splitter set.

    sorter="hquick" sorts the sample in parallel on the hypercube and
    gossips the selected ranks; "centralized" gathers everything on PE 0 and
    sorts sequentially (the deterministic-baseline arrangement).
    """
    if pe.p == 1:
        return []
    if sorter == "centralized":
        with pe.phase(phase):
            gathered = pe.gather(0, pack_string_list(sample))
            if pe.rank == 0:
                pool = [s for blob in gathered for s in unpack_string_list(blob)]
                srt, _, _ = sort_with_lcp(pool)
                splitters = splitters_from_sorted_sample(list(srt), pe.p, v)
                blob = pack_string_list(splitters)
            else:
                blob = None
            return unpack_string_list(pe.broadcast(0, blob))

    tagged = [TaggedString(s, pe.rank, i) for i, s in enumerate(sample)]
    slice_, _ = hquick_sort(pe, tagged, seed, phase=phase)
    with pe.phase(phase):
        counts = [int.from_bytes(b, "big") for b in pe.allgather(len(slice_).to_bytes(4, "big"))]
        offset = sum(counts[: pe.rank])
        m_total = sum(counts)
        mine: list[bytes] = []
        for j in range(1, pe.p):
            if m_total == 0:
                continue
            r = min(v * j - 1, m_total - 1)
            if offset <= r < offset + len(slice_):
                mine.append(j.to_bytes(4, "big") + slice_[r - offset].chars)
        shared = pe.allgather(pack_string_list(mine))
        by_index: dict[int, bytes] = {}
        for blob in shared:
            for rec in unpack_string_list(blob):
                by_index[int.from_bytes(rec[:4], "big")] = rec[4:]
        return [by_index.get(j, b"") for j in range(1, pe.p)]


def compute_buckets(
    sorted_items: Sequence[bytes], splitters: Sequence[bytes]
) -> list[int]:
    """Bucket boundaries over a sorted local array.

    Returns p+1 indices; bucket i is sorted_items[bounds[i]:bounds[i+1]] and
    realises f_i < s <= f_{i+1} with implicit outer sentinels.
    """
    bounds = [0]
    for f in splitters:
        bounds.append(bisect.bisect_right(sorted_items, f, lo=bounds[-1]))
    bounds.append(len(sorted_items))
    return bounds
