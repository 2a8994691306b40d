"""Input generators and ingestion for the benchmark harness.

The tunable-ratio generator writes strings of a fixed length L: a run of
filler (the alphabet's first character), a fixed-width base-sigma encoding
of the string's global index, then filler again up to L.  The ratio r in
[0, 1] places the index: r=0 puts it at the start (tiny distinguishing
prefixes), r=1 flush at the end (distinguishing prefixes span the string).
Strings are dealt to PEs by a seeded global shuffle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .strings import StringSet

FILLER = b"\x01"  # first character of the alphabet


class DataGenError(ValueError):
    pass


@dataclass
class DNConfig:
    strings_per_pe: int
    ratio: float
    sigma: int
    procs: int
    length: int = 500
    base: int = 0  # first global index
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise DataGenError("ratio must be in [0, 1]")
        if self.sigma < 2 or self.sigma > 255:
            raise DataGenError("alphabet size must be in 2..255")
        if self.strings_per_pe < 1 or self.procs < 1:
            raise DataGenError("need at least one string and one PE")

    @property
    def total(self) -> int:
        return self.strings_per_pe * self.procs

    def digit_width(self) -> int:
        w = 1
        while self.sigma**w < self.base + self.total:
            w += 1
        return w


def _index_digits(i: int, w: int, sigma: int) -> bytes:
    out = bytearray(w)
    for k in range(w - 1, -1, -1):
        out[k] = i % sigma + 1  # digit d maps to byte d+1; byte 0 stays reserved
        i //= sigma
    return bytes(out)


def _dn_string(i: int, cfg: DNConfig, w: int, prefix_len: int) -> bytes:
    digits = _index_digits(i, w, cfg.sigma)
    return FILLER * prefix_len + digits + FILLER * (cfg.length - prefix_len - w)


def _assigned_indices(cfg: DNConfig, rank: int) -> list[int]:
    perm = list(range(cfg.total))
    random.Random(cfg.seed).shuffle(perm)
    lo = rank * cfg.strings_per_pe
    return perm[lo : lo + cfg.strings_per_pe]


def gen_dn(cfg: DNConfig, rank: int) -> StringSet:
    """This PE's share of the tunable-ratio instance."""
    w = cfg.digit_width()
    if cfg.length < w:
        raise DataGenError(
            "length %d cannot hold %d index digits" % (cfg.length, w)
        )
    prefix_len = math.floor(cfg.ratio * (cfg.length - w))
    return StringSet(
        (_dn_string(cfg.base + i, cfg, w, prefix_len) for i in _assigned_indices(cfg, rank)),
        validate=False,
    )


def gen_skewed(cfg: DNConfig, rank: int) -> StringSet:
    """Ratio instance whose smallest 20% of strings are padded to 4x length.

    The generator's global order equals index order, so the padded set is
    exactly the lowest fifth of the index range.  Padding appends filler
    after position L and therefore changes neither the sort order nor any
    distinguishing prefix.
    """
    w = cfg.digit_width()
    if cfg.length < w:
        raise DataGenError(
            "length %d cannot hold %d index digits" % (cfg.length, w)
        )
    prefix_len = math.floor(cfg.ratio * (cfg.length - w))
    cutoff = cfg.base + cfg.total // 5
    pad = FILLER * (3 * cfg.length)
    out = []
    for i in _assigned_indices(cfg, rank):
        s = _dn_string(cfg.base + i, cfg, w, prefix_len)
        if cfg.base + i < cutoff:
            s += pad
        out.append(s)
    return StringSet(out, validate=False)


def dna_filter(line: bytes) -> bool:
    return not set(line) - {65, 67, 71, 84}  # A, C, G, T


def split_chars_balanced(lines: list[bytes], procs: int) -> list[list[bytes]]:
    """Greedy contiguous split: each PE takes lines until it reaches N/p chars."""
    total = sum(len(line) for line in lines)
    target = total / procs if procs else 0
    parts: list[list[bytes]] = [[] for _ in range(procs)]
    k = 0
    acc = 0
    for line in lines:
        parts[k].append(line)
        acc += len(line)
        if acc >= target and k < procs - 1:
            k += 1
            acc = 0
    return parts


def ingest_lines(path: str, procs: int = 1, filter: str = "none") -> list[StringSet]:
    """One string per line of `path`, split so PEs get similar char counts.

    filter="dna" drops lines containing anything besides A, C, G, T.  Lines
    with embedded 0 bytes are rejected.
    """
    if filter not in ("none", "dna"):
        raise DataGenError("unknown filter %r" % filter)
    with open(path, "rb") as fh:
        raw = fh.read()
    lines = raw.splitlines()
    for ln, line in enumerate(lines):
        if b"\x00" in line:
            raise DataGenError("line %d contains byte 0" % (ln + 1))
    if filter == "dna":
        lines = [line for line in lines if dna_filter(line)]
    return [
        StringSet(part, validate=False)
        for part in split_chars_balanced(lines, procs)
    ]


def gen_suffixes(
    text_len: int, sigma: int, seed: int, procs: int = 1
) -> list[StringSet]:
    """All suffixes of one random text, char-balanced over the PEs.

    Memory grows quadratically in text_len; meant for small instances.
    """
    rng = random.Random(seed)
    text = bytes(rng.randint(1, sigma) for _ in range(text_len))
    suffixes = [text[i:] for i in range(text_len)]
    return [
        StringSet(part, validate=False)
        for part in split_chars_balanced(suffixes, procs)
    ]
