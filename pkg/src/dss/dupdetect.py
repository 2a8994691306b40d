"""Distributed duplicate detection and distinguishing-prefix approximation.

Candidate prefixes are hashed to 64-bit fingerprints; the value space is
range-partitioned over the PEs, every PE counts the fingerprints of its
range, and owners learn which of their values occurred more than once.  A
unique fingerprint certifies a globally unique prefix; collisions err on the
safe side by keeping a string in the game for another round.

The doubling loop starts at a guess derived from p and the alphabet size and
grows it geometrically by (1+epsilon) per round (epsilon=1 doubles).  A
string resolves either when its prefix of the current depth is globally
unique, or capped once the depth exceeds its length, in which case the whole
string including its terminator stands in for the prefix.

Fingerprint streams can be Golomb/Rice coded: per destination the sorted
values are gap-encoded with quotient-unary, remainder-binary codes; replies
carry the duplicated values the same way.  Coding changes traffic bits only,
never flags.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

from .comm import PE
from .exchange import DecodeError, read_varint, write_varint
from .strings import LcpArray, StringSet


@dataclass(frozen=True)
class Fingerprint:
    value: int
    owner: tuple[int, int]  # (PE, local index)
    round: int


@dataclass
class PrefixBound:
    """Per-string approximate distinguishing prefix lengths.

    lengths[i] is in characters and includes the terminator when capped[i]
    is set; rounds[i] is the doubling round that resolved string i; depths
    lists the schedule of tried prefix lengths.
    """

    lengths: list[int]
    rounds: list[int]
    capped: list[bool]
    depths: list[int]


def fingerprint_prefix(s: bytes, length: int, seed: int) -> int:
    """64-bit fingerprint of the length-`length` prefix of s.

    length may exceed len(s) by one, which hashes the terminator along with
    the string; equal prefixes under the same seed always collide, distinct
    ones collide with probability ~2^-64.
    """
    if length > len(s) + 1:
        raise ValueError("prefix length %d exceeds string+terminator" % length)
    payload = s[:length] if length <= len(s) else s + b"\x00"
    key = (seed & ((1 << 64) - 1)).to_bytes(8, "little")
    digest = hashlib.blake2b(payload, digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


# -- Golomb/Rice coding ------------------------------------------------------


class _BitWriter:
    __slots__ = ("buf", "acc", "nacc")

    def __init__(self) -> None:
        self.buf = bytearray()
        self.acc = 0
        self.nacc = 0

    def write_bits(self, value: int, nbits: int) -> None:
        self.acc = (self.acc << nbits) | value
        self.nacc += nbits
        while self.nacc >= 8:
            self.nacc -= 8
            self.buf.append((self.acc >> self.nacc) & 0xFF)
        self.acc &= (1 << self.nacc) - 1

    def write_unary(self, q: int) -> None:
        while q >= 32:
            self.write_bits(0xFFFFFFFF, 32)
            q -= 32
        self.write_bits(((1 << q) - 1) << 1, q + 1)  # q ones then a zero

    def finish(self) -> tuple[bytes, int]:
        nbits = len(self.buf) * 8 + self.nacc
        if self.nacc:
            self.buf.append((self.acc << (8 - self.nacc)) & 0xFF)
        return bytes(self.buf), nbits


class _BitReader:
    __slots__ = ("data", "pos", "nbits")

    def __init__(self, data: bytes, nbits: int) -> None:
        self.data = data
        self.pos = 0
        self.nbits = nbits

    def read_bit(self) -> int:
        if self.pos >= self.nbits:
            raise DecodeError("bitstream exhausted", self.pos // 8)
        b = (self.data[self.pos >> 3] >> (7 - (self.pos & 7))) & 1
        self.pos += 1
        return b

    def read_bits(self, nbits: int) -> int:
        v = 0
        for _ in range(nbits):
            v = (v << 1) | self.read_bit()
        return v


@dataclass
class GolombStream:
    """Rice-coded gaps of a sorted value list: M = 2^k must be a power of two."""

    k: int
    count: int
    nbits: int
    data: bytes

    @property
    def m(self) -> int:
        return 1 << self.k

    def bit_length(self) -> int:
        return self.nbits

    def to_bytes(self) -> bytes:
        out = bytearray()
        write_varint(out, self.k)
        write_varint(out, self.count)
        write_varint(out, self.nbits)
        out += self.data
        return bytes(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "GolombStream":
        k, pos = read_varint(blob, 0)
        count, pos = read_varint(blob, pos)
        nbits, pos = read_varint(blob, pos)
        data = blob[pos:]
        if len(data) != (nbits + 7) // 8:
            raise DecodeError("golomb payload length mismatch", pos)
        return cls(k, count, nbits, data)


def rice_parameter(span: int, count: int) -> int:
    """M = 2^k nearest to (span/count) * ln 2, the Rice-optimal choice."""
    if count <= 0 or span <= 0:
        return 0
    target = span / count * math.log(2)
    if target <= 1:
        return 0
    return min(63, round(math.log2(target)))


def golomb_encode(values: Sequence[int], m: int) -> GolombStream:
    """Encode an ascending value list as Rice-coded gaps."""
    if m < 1 or m & (m - 1):
        raise ValueError("Rice coding needs a power-of-two parameter")
    k = m.bit_length() - 1
    w = _BitWriter()
    prev = 0
    for v in values:
        gap = v - prev
        if gap < 0:
            raise ValueError("values must be sorted ascending")
        prev = v
        w.write_unary(gap >> k)
        if k:
            w.write_bits(gap & (m - 1), k)
    data, nbits = w.finish()
    return GolombStream(k, len(values), nbits, data)


def golomb_decode(stream: GolombStream) -> list[int]:
    """Inverse of golomb_encode; malformed streams raise DecodeError."""
    r = _BitReader(stream.data, stream.nbits)
    out = []
    prev = 0
    for _ in range(stream.count):
        q = 0
        while r.read_bit():
            q += 1
        rem = r.read_bits(stream.k) if stream.k else 0
        prev += (q << stream.k) | rem
        out.append(prev)
    if r.pos != stream.nbits:
        raise DecodeError("trailing bits in stream", r.pos // 8)
    return out


# -- distributed duplicate detection ----------------------------------------


def _range_lo(dest: int, p: int) -> int:
    return (dest << 64) // p


def _pack_values(values: Sequence[int], dest: int, p: int, golomb: bool) -> bytes:
    if golomb:
        lo = _range_lo(dest, p)
        span = _range_lo(dest + 1, p) - lo
        rel = [v - lo for v in values]
        k = rice_parameter(span, len(values))
        return b"\x01" + golomb_encode(rel, 1 << k).to_bytes()
    out = bytearray(b"\x00")
    write_varint(out, len(values))
    for v in values:
        out += v.to_bytes(8, "little")
    return bytes(out)


def _unpack_values(blob: bytes, dest: int, p: int) -> list[int]:
    if not blob:
        return []
    if blob[0] == 1:
        lo = _range_lo(dest, p)
        return [v + lo for v in golomb_decode(GolombStream.from_bytes(blob[1:]))]
    count, pos = read_varint(blob, 1)
    return [
        int.from_bytes(blob[pos + 8 * i : pos + 8 * i + 8], "little")
        for i in range(count)
    ]


def detect_duplicates(
    pe: PE,
    values: Sequence[int],
    *,
    golomb: bool = False,
    phase: str = "dupdetect",
) -> list[bool]:
    """Flag, per submitted 64-bit value, whether it is globally unique.

    The value space is split into p uniform ranges; every PE counts its
    range's arrivals and answers each source with the subset of that
    source's values seen more than once globally.  Two submissions of the
    same value, even from one PE, are both non-unique.
    """
    p = pe.p
    with pe.phase(phase):
        per_dest: list[list[int]] = [[] for _ in range(p)]
        for v in values:
            per_dest[(v * p) >> 64].append(v)
        for bucket in per_dest:
            bucket.sort()
        received = pe.alltoallv(
            [_pack_values(per_dest[d], d, p, golomb) for d in range(p)]
        )
        arrivals = [_unpack_values(blob, pe.rank, p) for blob in received]

        counts: dict[int, int] = {}
        for vals in arrivals:
            for v in vals:
                counts[v] = counts.get(v, 0) + 1
        replies = []
        for vals in arrivals:
            dups = sorted({v for v in vals if counts[v] > 1})
            replies.append(_pack_values(dups, pe.rank, p, golomb))
        answers = pe.alltoallv(replies)

        dup_set: set[int] = set()
        for d, blob in enumerate(answers):
            dup_set.update(_unpack_values(blob, d, p))
    return [v not in dup_set for v in values]


# -- prefix doubling ---------------------------------------------------------


def initial_depth(p: int, sigma: int) -> int:
    """First guessed prefix length: ceil(log2 p / log2 sigma), at least 1."""
    if sigma < 2:
        raise ValueError("alphabet size must be >= 2")
    if p <= 1:
        return 1
    return max(1, math.ceil(math.log2(p) / math.log2(sigma)))


def next_depth(depth: int, epsilon: float) -> int:
    """Grow the guess by (1+epsilon), rounding up and always advancing."""
    return max(depth + 1, math.ceil(depth * (1.0 + epsilon)))


def depth_grid(p: int, sigma: int, epsilon: float, limit: int) -> list[int]:
    """The schedule of tried depths up to (and including) `limit`'s cover."""
    out = [initial_depth(p, sigma)]
    while out[-1] < limit:
        out.append(next_depth(out[-1], epsilon))
    return out


def approximate_dprefix(
    pe: PE,
    sorted_set: StringSet,
    lcps: LcpArray,
    *,
    epsilon: float = 1.0,
    sigma: int = 256,
    seed: int = 0,
    golomb: bool = False,
    phase: str = "dupdetect",
) -> PrefixBound:
    """Upper-bound every string's distinguishing prefix length.

    Per round, all unresolved strings are fingerprinted at the current depth
    and checked for global duplicates; unique ones resolve at that depth,
    strings shorter than the depth resolve capped (whole string plus
    terminator).  Rounds continue until no PE has candidates left.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = len(sorted_set)
    lengths = [0] * n
    rounds = [0] * n
    capped = [False] * n
    depths: list[int] = []

    candidates = list(range(n))
    depth = initial_depth(pe.p, sigma)
    round_no = 0
    while True:
        with pe.phase(phase):
            remaining = pe.allreduce(len(candidates), lambda a, b: a + b)
        if remaining == 0:
            break
        depths.append(depth)
        still: list[int] = []
        to_check: list[int] = []
        for i in candidates:
            if len(sorted_set[i]) < depth:
                lengths[i] = len(sorted_set[i]) + 1
                rounds[i] = round_no
                capped[i] = True
            else:
                to_check.append(i)
        # Sorted neighbours sharing the current depth have identical
        # fingerprints; reuse the previous hash for such runs.
        values: list[int] = []
        prev_i = -2
        prev_v = 0
        for i in to_check:
            if i == prev_i + 1 and lcps[i] >= depth:
                v = prev_v
            else:
                v = fingerprint_prefix(sorted_set[i], depth, seed)
            values.append(v)
            prev_i, prev_v = i, v
        unique = detect_duplicates(pe, values, golomb=golomb, phase=phase)
        for i, is_unique in zip(to_check, unique):
            if is_unique:
                lengths[i] = depth
                rounds[i] = round_no
            else:
                still.append(i)
        candidates = still
        depth = next_depth(depth, epsilon)
        round_no += 1
    return PrefixBound(lengths, rounds, capped, depths)
