"""Top-level drivers composing the algorithm variants.

All variants deliver a SortOutcome per PE: a locally sorted string array
with its LCP array, per-string origin tags (source PE, index into that PE's
original input), and per-phase traffic/timing.  Concatenated over ranks the
arrays are globally sorted; ties between equal strings follow (origin PE,
origin index), which the merge realises for free through run-stable
tie-breaking.

The merge-sort family runs: local sort, splitter determination from a
regular sample, an all-to-all bucket exchange (optionally LCP-compressed),
and one multiway LCP merge.  The prefix-doubling variant inserts a
duplicate-detection step after the local sort and from then on operates on
approximate distinguishing prefixes only: sampling, exchange, and merging
all see truncated strings, and the outcome marks itself "prefixes".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .comm import PE, PhaseCounts, PhaseTimer
from .dupdetect import approximate_dprefix
from .exchange import exchange_buckets
from .hquick import TaggedString, derive_seed, hquick_sort
from .lcpmerge import multiway_merge
from .partition import (
    compute_buckets,
    sample_char_based,
    sample_string_based,
    select_splitters,
)
from .strings import LcpArray, StringSet, sort_with_lcp

VARIANTS = ("hquick", "ms-simple", "ms", "pdms", "pdms-golomb", "fk-baseline")


@dataclass
class SortConfig:
    sampling: str = "string"  # string | char | fk
    oversample: int | None = None  # v; defaults to p (fk forces p-1)
    splitter_sorter: str = "hquick"  # hquick | centralized
    compression: bool = True
    epsilon: float = 1.0
    golomb: bool = False
    sigma: int = 256  # alphabet size, feeds the initial doubling depth
    seed: int = 0
    validate_merge: bool = False


@dataclass
class SortOutcome:
    strings: StringSet
    lcps: LcpArray
    origins: list[tuple[int, int]]
    mode: str  # "full" | "prefixes"
    volume: dict[str, PhaseCounts] = field(default_factory=dict)
    phase_seconds: dict[str, float] = field(default_factory=dict)
    rounds: int = 0
    charcmp: int = 0


def _snapshot(pe: PE) -> dict[str, PhaseCounts]:
    return {
        ph: PhaseCounts(c.sent, c.received, c.messages)
        for ph, c in pe.world.counters[pe.rank].items()
    }


def _take_sample(sorted_strs, cfg: SortConfig, p: int, weights=None) -> list[bytes]:
    if cfg.sampling == "char":
        v = cfg.oversample or p
        return sample_char_based(sorted_strs, v, weights)
    v = (p - 1) if cfg.sampling == "fk" else (cfg.oversample or p)
    return sample_string_based(sorted_strs, max(1, v))


def _splitter_cfg(cfg: SortConfig, p: int) -> tuple[int, str]:
    if cfg.sampling == "fk":
        return max(1, p - 1), "centralized"
    return max(1, cfg.oversample or p), cfg.splitter_sorter


def _partition_exchange_merge(
    pe: PE,
    sorted_strs: list[bytes],
    lcps: LcpArray,
    origins: list[int],
    cfg: SortConfig,
    timer: PhaseTimer,
    weights=None,
    aware: bool = True,
) -> tuple[StringSet, LcpArray, list[tuple[int, int]], int]:
    """Steps 2-4 shared by the merge-sort variants; strings may be prefixes."""
    p = pe.p
    with timer.measure("sample"), pe.phase("sample"):
        sample = _take_sample(sorted_strs, cfg, p, weights)
    v, sorter = _splitter_cfg(cfg, p)
    with timer.measure("splitter-sort"):
        splitters = select_splitters(
            pe, sample, v, sorter=sorter, seed=derive_seed(cfg.seed, "splitters")
        )

    with timer.measure("exchange"):
        bounds = compute_buckets(sorted_strs, splitters)
        buckets = []
        for d in range(p):
            a, b = bounds[d], bounds[d + 1]
            buckets.append((sorted_strs[a:b], lcps[a:b], origins[a:b]))
        runs = exchange_buckets(pe, buckets, compress=cfg.compression, phase="exchange")

    with timer.measure("merge"):
        result = multiway_merge(
            [(list(strs), rl) for strs, rl, _ in runs],
            validate=cfg.validate_merge,
            aware=aware,
        )
        out_origins = [
            (src, runs[src][2][pos]) for src, pos in result.sources
        ]
    return result.strings, result.lcps, out_origins, result.charcmp


def ms_sort(pe: PE, local: StringSet, cfg: SortConfig) -> SortOutcome:
    """Distributed string merge sort; ships full strings.

    compression=False is the plain variant whose exchanged runs carry zero
    LCPs, so the merge compares characters the way a non-LCP loser tree
    would.  sampling="fk" reproduces the deterministic baseline: p-1
    equidistant samples per PE, sorted centrally.
    """
    timer = PhaseTimer()
    with timer.measure("local-sort"):
        srt, lcps, perm = sort_with_lcp(local)
    # Without LCP compression no LCP data crosses the wire, so the merge runs
    # as an ordinary loser tree (the baseline variants' behaviour).
    strings, out_lcps, origins, charcmp = _partition_exchange_merge(
        pe, list(srt), lcps, perm, cfg, timer, aware=cfg.compression
    )
    return SortOutcome(
        strings,
        out_lcps,
        [(src, idx) for src, idx in origins],
        "full",
        _snapshot(pe),
        timer.seconds,
        rounds=0,
        charcmp=charcmp,
    )


def pdms_sort(pe: PE, local: StringSet, cfg: SortConfig) -> SortOutcome:
    """Prefix-doubling merge sort; permutes distinguishing prefixes only.

    After the local sort, the doubling loop bounds every string's
    distinguishing prefix; strings are truncated to their bounds (capped
    strings stay whole) before sampling, exchange, and merging.  The order
    of shipped prefixes matches the order of the full strings, with origin
    tags breaking ties among capped duplicates.
    """
    timer = PhaseTimer()
    with timer.measure("local-sort"):
        srt, lcps, perm = sort_with_lcp(local)

    with timer.measure("dupdetect"):
        bound = approximate_dprefix(
            pe,
            srt,
            lcps,
            epsilon=cfg.epsilon,
            sigma=cfg.sigma,
            seed=derive_seed(cfg.seed, "fingerprints"),
            golomb=cfg.golomb,
            phase="dupdetect",
        )

    trunc = [srt[i][: bound.lengths[i]] for i in range(len(srt))]
    t_lcps = list(lcps)
    for i in range(1, len(trunc)):
        t_lcps[i] = min(lcps[i], len(trunc[i - 1]), len(trunc[i]))

    strings, out_lcps, origins, charcmp = _partition_exchange_merge(
        pe, trunc, t_lcps, perm, replace(cfg, compression=True), timer
    )
    return SortOutcome(
        strings,
        out_lcps,
        origins,
        "prefixes",
        _snapshot(pe),
        timer.seconds,
        rounds=len(bound.depths),
        charcmp=charcmp,
    )


def hquick_driver(pe: PE, local: StringSet, cfg: SortConfig) -> SortOutcome:
    """Hypercube quicksort wrapper; ranks beyond 2^d come back empty."""
    timer = PhaseTimer()
    tagged = [TaggedString(s, pe.rank, i) for i, s in enumerate(local)]
    with timer.measure("hquick"):
        items, lcps = hquick_sort(pe, tagged, derive_seed(cfg.seed, "hquick"))
    return SortOutcome(
        StringSet((t.chars for t in items), validate=False),
        lcps,
        [(t.pe, t.idx) for t in items],
        "full",
        _snapshot(pe),
        timer.seconds,
    )


def variant_config(name: str, base: SortConfig) -> SortConfig:
    """Resolve an algorithm name into its effective configuration."""
    if name == "hquick":
        return base
    if name == "ms-simple":
        return replace(base, compression=False)
    if name == "ms":
        return replace(base, compression=True)
    if name == "pdms":
        return base  # golomb stays as configured (off by default)
    if name == "pdms-golomb":
        return replace(base, golomb=True)
    if name == "fk-baseline":
        return replace(base, sampling="fk", splitter_sorter="centralized", compression=False)
    raise ValueError("unknown algorithm %r" % name)


def run_variant(pe: PE, name: str, local: StringSet, base: SortConfig) -> SortOutcome:
    cfg = variant_config(name, base)
    if name == "hquick":
        return hquick_driver(pe, local, cfg)
    if name in ("pdms", "pdms-golomb"):
        return pdms_sort(pe, local, cfg)
    return ms_sort(pe, local, cfg)
