"""Core string-set representation, LCP arithmetic, and the sequential sorter.

Strings are byte sequences over the alphabet 1..255; byte 0 is the
end-of-string terminator and may not occur inside a string.  LCP values count
leading equal characters and never include the terminator.  A sorted string
array carries an LCP array whose entry i (i >= 1) is the LCP of the strings
at positions i-1 and i; entry 0 is a sentinel and stored as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

TERMINATOR = 0

# A group smaller than the alphabet leaves byte-bucketing and falls through to
# multikey quicksort; groups below this constant use LCP insertion sort.
INSERTION_THRESHOLD = 32

# Documented constant for the inspection budget: the instrumented sorter
# inspects at most INSPECTION_FACTOR * (D + n*log2(sigma) + n) characters.
INSPECTION_FACTOR = 8

LcpArray = list[int]


class StringSetError(ValueError):
    pass


class StringSet:
    """Ordered collection of 0-terminated byte strings.

    Internally the strings are kept as individual ``bytes`` objects without
    their terminators; ``chars`` and ``offsets`` expose the contiguous
    0-terminated buffer view.
    """

    def __init__(self, items: Iterable[bytes] = (), *, validate: bool = True):
        self._items: list[bytes] = [bytes(s) for s in items]
        if validate:
            for s in self._items:
                if b"\x00" in s:
                    raise StringSetError("terminator byte 0 inside a string")

    @classmethod
    def from_chars(cls, chars: bytes, offsets: Sequence[int]) -> "StringSet":
        """Rebuild a set from a contiguous buffer of 0-terminated strings."""
        items = []
        prev = -1
        for k, off in enumerate(offsets):
            if off <= prev:
                raise StringSetError("offsets not strictly increasing")
            prev = off
            end = chars.find(b"\x00", off)
            if end < 0:
                raise StringSetError("unterminated string at offset %d" % off)
            nxt = offsets[k + 1] if k + 1 < len(offsets) else len(chars)
            if end != nxt - 1:
                raise StringSetError("stray bytes after terminator at offset %d" % off)
            items.append(chars[off:end])
        return cls(items)

    @cached_property
    def chars(self) -> bytes:
        return b"".join(s + b"\x00" for s in self._items)

    @cached_property
    def offsets(self) -> list[int]:
        offs = []
        pos = 0
        for s in self._items:
            offs.append(pos)
            pos += len(s) + 1
        return offs

    @property
    def count(self) -> int:
        return len(self._items)

    def total_chars(self) -> int:
        """Number of characters excluding terminators."""
        return sum(len(s) for s in self._items)

    def lengths(self) -> list[int]:
        return [len(s) for s in self._items]

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i: int) -> bytes:
        return self._items[i]

    def __iter__(self) -> Iterator[bytes]:
        return iter(self._items)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StringSet):
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        preview = b",".join(self._items[:4])
        return "StringSet(n=%d, %r%s)" % (
            len(self._items),
            preview,
            "..." if len(self._items) > 4 else "",
        )


@dataclass
class DistinguishingInfo:
    """Per-string distinguishing prefix lengths plus their sum and maximum.

    A string's distinguishing prefix is the shortest prefix that separates it
    from every other string in the set; for duplicates and strings that are
    prefixes of others the length is capped at len(s)+1, covering the
    terminator, and the position is the only remaining tie-break.
    """

    dpre: list[int]
    total: int
    max_len: int

    def capped(self, lengths: Sequence[int]) -> list[bool]:
        return [d == lengths[i] + 1 for i, d in enumerate(self.dpre)]


@dataclass
class CharCounter:
    """Counts characters inspected by the instrumented sorting path."""

    inspections: int = 0

    def add(self, k: int) -> None:
        self.inspections += k


def compute_lcp(a: bytes, b: bytes) -> int:
    """Length of the longest common prefix of two strings, in characters.

    The terminator is never counted; identical strings share their full
    length.  Symmetric and total.
    """
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    lo = 0
    chunk = 16
    while True:
        hi = min(lo + chunk, n)
        if a[lo:hi] == b[lo:hi]:
            lo = hi
            chunk = min(chunk * 4, 1 << 16)
        elif hi - lo <= 8:
            for i in range(lo, hi):
                if a[i] != b[i]:
                    return i
            lo = hi  # unreachable: a mismatch exists in [lo, hi)
        else:
            chunk = (hi - lo) // 2


def _compare_from(a: bytes, b: bytes, start: int) -> tuple[int, int, int]:
    """Compare a and b assuming they agree on the first `start` characters.

    Returns (lcp, sign, inspected) where sign < 0 iff a < b (the terminator
    sorts lowest) and inspected counts the character positions examined,
    including the deciding one.
    """
    n = min(len(a), len(b))
    i = start
    while i < n and a[i] == b[i]:
        i += 1
    if i < n:
        return i, a[i] - b[i], i - start + 1
    # One string ran out: the shorter sorts first, equal lengths tie.
    return n, len(a) - len(b), n - start + 1


def sort_with_lcp(
    sset: StringSet | Sequence[bytes],
    counter: CharCounter | None = None,
) -> tuple[StringSet, LcpArray, list[int]]:
    """Sort a string set and emit its LCP array.

    MSD byte bucketing recurses while a group holds at least sigma-ish
    strings (256 buckets available), multikey quicksort takes over below
    that, and LCP insertion sort finishes groups under INSERTION_THRESHOLD.
    The sort is stable, so equal strings keep input order and the returned
    permutation (original index per output slot) lets callers carry origin
    metadata.
    """
    data = list(sset)
    n = len(data)
    if n == 0:
        return StringSet([], validate=False), [], []
    out_idx: list[int] = []
    out_lcp: list[int] = []
    insp = 0

    # Tasks are (indices, depth, first_lcp): all group members share their
    # first `depth` characters and the group's first emitted string has LCP
    # `first_lcp` against the previously emitted string.
    stack: list[tuple[list[int], int, int]] = [(list(range(n)), 0, 0)]
    while stack:
        group, depth, first_lcp = stack.pop()
        m = len(group)
        if m == 1:
            out_idx.append(group[0])
            out_lcp.append(first_lcp)
            continue
        if m < INSERTION_THRESHOLD:
            insp += _lcp_insertion_emit(data, group, depth, first_lcp, out_idx, out_lcp)
            continue
        if m < 256:
            insp += _mkqs_step(data, group, depth, first_lcp, stack, out_idx, out_lcp)
            continue

        buckets: dict[int, list[int]] = {}
        setd = buckets.setdefault
        for i in group:
            s = data[i]
            setd(s[depth] if depth < len(s) else -1, []).append(i)
        insp += m

        emitted = False
        keys = sorted(buckets)
        if keys[0] == -1:
            # Strings consumed entirely: equal up to (and including) length
            # `depth`, emitted in stable order.
            for k, i in enumerate(buckets[-1]):
                out_idx.append(i)
                out_lcp.append(first_lcp if k == 0 else depth)
            emitted = True
            keys = keys[1:]
        if len(keys) == 1 and not emitted:
            # Single live bucket: all strings share a longer run.  Jump to the
            # end of the common prefix in one step instead of one level per
            # character (pays off for long shared prefixes).
            sub = buckets[keys[0]]
            lo = data[min(sub, key=data.__getitem__)]
            hi = data[max(sub, key=data.__getitem__)]
            common = compute_lcp(lo, hi)
            if common > depth + 1:
                insp += (common - depth - 1) * len(sub)
                stack.append((sub, common, first_lcp))
                continue
        for pos, key in enumerate(reversed(keys)):
            is_first = not emitted and pos == len(keys) - 1
            stack.append((buckets[key], depth + 1, first_lcp if is_first else depth))

    if counter is not None:
        counter.add(insp)
    sorted_set = StringSet((data[i] for i in out_idx), validate=False)
    return sorted_set, out_lcp, out_idx


def _median3(a: int, b: int, c: int) -> int:
    if a > b:
        a, b = b, a
    if b > c:
        b = c
    return max(a, b)


def _mkqs_step(
    data: list[bytes],
    group: list[int],
    depth: int,
    first_lcp: int,
    stack: list[tuple[list[int], int, int]],
    out_idx: list[int],
    out_lcp: list[int],
) -> int:
    """One multikey-quicksort partition; sub-tasks are pushed on the stack."""
    m = len(group)

    def key_of(i: int) -> int:
        s = data[i]
        return s[depth] if depth < len(s) else -1

    pivot = _median3(key_of(group[0]), key_of(group[m // 2]), key_of(group[-1]))
    lt: list[int] = []
    eq: list[int] = []
    gt: list[int] = []
    for i in group:
        k = key_of(i)
        if k < pivot:
            lt.append(i)
        elif k == pivot:
            eq.append(i)
        else:
            gt.append(i)

    if pivot == -1:
        # lt is empty: nothing sorts below the terminator.  The equal part is
        # fully consumed strings, emitted now to respect output order.
        for k, i in enumerate(eq):
            out_idx.append(i)
            out_lcp.append(first_lcp if k == 0 else depth)
        if gt:
            stack.append((gt, depth, depth))
        return m

    if gt:
        stack.append((gt, depth, depth))
    stack.append((eq, depth + 1, depth if lt else first_lcp))
    if lt:
        stack.append((lt, depth, first_lcp))
    return m


def _lcp_insertion_emit(
    data: list[bytes],
    group: list[int],
    depth: int,
    first_lcp: int,
    out_idx: list[int],
    out_lcp: list[int],
) -> int:
    """LCP insertion sort of a small group sharing a depth-character prefix.

    Maintains absolute LCP values between sorted neighbours so scanning left
    decides most placements from stored LCPs alone; characters are compared
    only when the stored and candidate LCPs coincide.
    """
    order: list[int] = []
    lcps: list[int] = []  # lcps[k] = lcp(order[k-1], order[k]); lcps[0] unused
    inspected = 0
    for idx in group:
        s = data[idx]
        if not order:
            order.append(idx)
            lcps.append(0)
            continue
        j = len(order)
        h, sign, ins = _compare_from(s, data[order[j - 1]], depth)
        inspected += ins
        if sign >= 0:
            order.append(idx)
            lcps.append(h)
            continue
        while True:
            if j == 1:
                order.insert(0, idx)
                lcps.insert(0, 0)
                lcps[1] = h
                break
            hprev = lcps[j - 1]
            if hprev > h:
                j -= 1  # predecessor shares more with its right neighbour: s still smaller
            elif hprev < h:
                order.insert(j - 1, idx)
                lcps.insert(j - 1, hprev)
                lcps[j] = h
                break
            else:
                h2, sign2, ins2 = _compare_from(s, data[order[j - 2]], h)
                inspected += ins2
                if sign2 >= 0:
                    order.insert(j - 1, idx)
                    lcps.insert(j - 1, h2)
                    lcps[j] = h
                    break
                h = h2
                j -= 1
    for k, idx in enumerate(order):
        out_idx.append(idx)
        out_lcp.append(first_lcp if k == 0 else lcps[k])
    return inspected


def distinguishing_prefixes(sorted_set: StringSet, lcps: Sequence[int]) -> DistinguishingInfo:
    """Distinguishing prefix lengths of a sorted set from its LCP array.

    In sorted order the neighbours realise every string's maximal LCP, so
    dpre[i] = max(lcps[i], lcps[i+1]) + 1, capped at len+1 (the terminator
    distinguishes duplicates and proper prefixes).  A lone string gets 1:
    at least one character is always inspected.
    """
    n = len(sorted_set)
    dpre = []
    for i in range(n):
        left = lcps[i] if i >= 1 else 0
        right = lcps[i + 1] if i + 1 < n else 0
        d = max(left, right) + 1
        d = min(d, len(sorted_set[i]) + 1)
        d = max(d, 1)
        dpre.append(d)
    return DistinguishingInfo(dpre, sum(dpre), max(dpre, default=0))


def validate_lcp_array(sorted_set: StringSet | Sequence[bytes], lcps: Sequence[int]) -> None:
    """Raise if `lcps` is not the LCP array of the (sorted) string sequence."""
    items = list(sorted_set)
    if len(items) != len(lcps):
        raise StringSetError("LCP array length mismatch")
    for i in range(1, len(items)):
        want = compute_lcp(items[i - 1], items[i])
        if lcps[i] != want:
            raise StringSetError(
                "LCP[%d] = %d, expected %d" % (i, lcps[i], want)
            )
        if items[i - 1] > items[i]:
            raise StringSetError("sequence not sorted at position %d" % i)
