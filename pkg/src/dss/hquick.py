"""Hypercube string quicksort over the simulated machine.

With d = floor(log2 p), only the 2^d lowest ranks participate as hypercube
nodes; higher ranks scatter their input into the cube and end up empty
(callers wanting balanced output rebalance afterwards).  The input is first
placed on uniformly random active nodes, then d split rounds follow: a pivot
is agreed per subcube, strings <= pivot move to the lower half along the
current dimension, the rest to the upper half.  One local sort finishes.

Strings travel tagged with (origin PE, origin index); the triple
(chars, pe, idx) is the comparison key everywhere, which makes every pivot
globally unique and the split predicate consistent.
"""

from __future__ import annotations

import hashlib
import random
from typing import NamedTuple, Sequence

from .comm import PE
from .exchange import read_varint, write_varint
from .strings import LcpArray, StringSet, sort_with_lcp


class TaggedString(NamedTuple):
    chars: bytes
    pe: int
    idx: int


# A PE holding more than this many times the average string count after a
# split aborts the run instead of exhausting memory.
IMBALANCE_FACTOR = 8


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from a tuple of ints/strings."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def active_count(p: int) -> int:
    """Number of hypercube nodes: the largest power of two <= p."""
    return 1 << (p.bit_length() - 1)


def _pack_tagged(items: Sequence[TaggedString]) -> bytes:
    out = bytearray()
    write_varint(out, len(items))
    for chars, pe, idx in items:
        write_varint(out, len(chars))
        out += chars
        write_varint(out, pe)
        write_varint(out, idx)
    return bytes(out)


def _unpack_tagged(data: bytes) -> list[TaggedString]:
    count, pos = read_varint(data, 0)
    items = []
    for _ in range(count):
        n, pos = read_varint(data, pos)
        chars = data[pos : pos + n]
        pos += n
        pe, pos = read_varint(data, pos)
        idx, pos = read_varint(data, pos)
        items.append(TaggedString(chars, pe, idx))
    return items


def scatter_tagged(
    pe: PE, items: Sequence[TaggedString], seed: int
) -> list[TaggedString]:
    """Move every string to a uniformly random active node.

    Destinations are drawn from a per-source stream seeded by (seed, rank),
    so the placement is reproducible offline.
    """
    active = active_count(pe.p)
    rng = random.Random(derive_seed(seed, pe.rank, "scatter"))
    outgoing: list[list[TaggedString]] = [[] for _ in range(pe.p)]
    for t in items:
        outgoing[rng.randrange(active)].append(t)
    received = pe.alltoallv([_pack_tagged(b) for b in outgoing])
    out: list[TaggedString] = []
    for blob in received:
        out.extend(_unpack_tagged(blob))
    return out


def random_scatter(pe: PE, local: StringSet, seed: int) -> StringSet:
    """Scatter a plain string set; the global multiset is preserved."""
    tagged = [TaggedString(s, pe.rank, i) for i, s in enumerate(local)]
    return StringSet((t.chars for t in scatter_tagged(pe, tagged, seed)), validate=False)


def _local_median(items: Sequence[TaggedString]) -> TaggedString | None:
    if not items:
        return None
    return sorted(items)[len(items) // 2]


def _combine(
    a: tuple[TaggedString | None, int],
    b: tuple[TaggedString | None, int],
    level: int,
) -> tuple[TaggedString | None, int]:
    """Merge two (candidate, weight) pairs; symmetric in its arguments.

    The heavier subtree's candidate wins, approximating a weighted median.
    Equal weights alternate min/max by level so the tournament stays near
    the middle instead of drifting to one end.
    """
    ca, wa = a
    cb, wb = b
    if ca is None:
        return cb, wa + wb
    if cb is None:
        return ca, wa + wb
    if wa != wb:
        return (ca if wa > wb else cb), wa + wb
    pick = min(ca, cb) if level % 2 == 0 else max(ca, cb)
    return pick, wa + wb


def select_pivot(
    pe: PE, dims: int, items: Sequence[TaggedString]
) -> TaggedString | None:
    """Agree on one pivot within the 2^dims subcube containing this PE.

    Every PE contributes its local median; pairwise hypercube exchanges fold
    the candidates so all subcube members hold the identical winner.  Returns
    None when the whole subcube is empty.
    """
    cand: tuple[TaggedString | None, int] = (_local_median(items), len(items))
    for k in range(dims):
        partner = pe.rank ^ (1 << k)
        payload = _pack_tagged([cand[0]] if cand[0] is not None else [])
        buf = bytearray()
        write_varint(buf, cand[1])
        pe.send(partner, bytes(buf) + payload)
        data = pe.recv(partner)
        weight, pos = read_varint(data, 0)
        got = _unpack_tagged(data[pos:])
        other = (got[0] if got else None, weight)
        cand = _combine(cand, other, k)
    return cand[0]


def hquick_sort(
    pe: PE,
    local: Sequence[TaggedString],
    seed: int,
    *,
    phase: str = "hquick",
) -> tuple[list[TaggedString], LcpArray]:
    """Sort all strings across the cube; rank order concatenates sorted.

    Returns this PE's slice with its LCP array; ranks >= 2^d end up empty.
    """
    with pe.phase(phase):
        active = active_count(pe.p)
        d = active.bit_length() - 1
        total = pe.allreduce(len(local), lambda a, b: a + b)
        limit = max(16, IMBALANCE_FACTOR * -(-total // active))

        items = scatter_tagged(pe, local, seed)
        if pe.rank >= active:
            return [], []

        for dim in range(d - 1, -1, -1):
            pivot = select_pivot(pe, dim + 1, items)
            if pivot is None:
                low: list[TaggedString] = []
                high: list[TaggedString] = []
            else:
                low = [t for t in items if t <= pivot]
                high = [t for t in items if t > pivot]
            partner = pe.rank ^ (1 << dim)
            if pe.rank & (1 << dim):
                pe.send(partner, _pack_tagged(low))
                items = high + _unpack_tagged(pe.recv(partner))
            else:
                pe.send(partner, _pack_tagged(high))
                items = low + _unpack_tagged(pe.recv(partner))
            if len(items) > limit:
                raise RuntimeError(
                    "hquick imbalance: PE %d holds %d strings (limit %d)"
                    % (pe.rank, len(items), limit)
                )

        items.sort(key=lambda t: (t.pe, t.idx))  # stable byte sort => origin ties
        srt, lcps, perm = sort_with_lcp(StringSet((t.chars for t in items), validate=False))
        ordered = [items[i] for i in perm]
        return [TaggedString(s, t.pe, t.idx) for s, t in zip(srt, ordered)], lcps
