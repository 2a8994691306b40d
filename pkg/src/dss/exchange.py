"""LCP-compressed bucket encoding and the all-to-all string exchange.

Wire format, stable across runs: a bucket is a sequence of records

    varint(lcp)  varint(len(suffix))  suffix bytes

where the suffix is the string minus the first `lcp` characters, including
its terminator.  The first record of a bucket always carries lcp 0 and the
full string: a bucket's first string may share a prefix with strings shipped
elsewhere, so cross-bucket deltas would be invalid.  Varints are LEB128
(7 data bits per byte, high bit continues).

The exchange frames each bucket as varint(count), the records, then one
varint origin index per string.  Origin indices name each string's position
in the sender's original input so receivers can tag provenance; the source
PE is implied by the channel.
"""

from __future__ import annotations

from typing import Sequence

from .comm import PE
from .strings import LcpArray, StringSet


class DecodeError(ValueError):
    """Malformed wire bytes; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__("%s (at byte %d)" % (message, offset))
        self.offset = offset


def write_varint(out: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while value > 0x7F:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def read_varint(data: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    start = pos
    while True:
        if pos >= len(data):
            raise DecodeError("truncated varint", start)
        b = data[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise DecodeError("varint too long", start)


def pack_string_list(items: Sequence[bytes]) -> bytes:
    """Length-prefixed string list, used by internal collectives."""
    out = bytearray()
    write_varint(out, len(items))
    for s in items:
        write_varint(out, len(s))
        out += s
    return bytes(out)


def unpack_string_list(data: bytes) -> list[bytes]:
    count, pos = read_varint(data, 0)
    items = []
    for _ in range(count):
        n, pos = read_varint(data, pos)
        items.append(data[pos : pos + n])
        pos += n
    return items


def encode_bucket(
    strings: Sequence[bytes],
    lcps: Sequence[int],
    compress: bool = True,
) -> bytes:
    """Encode a sorted bucket slice into wire records.

    `lcps` holds each string's LCP with its predecessor inside the bucket;
    the first entry is ignored and encoded as 0.  With compress=False every
    record carries lcp 0 and the full string.
    """
    out = bytearray()
    for i, s in enumerate(strings):
        lcp = lcps[i] if (compress and i > 0) else 0
        suffix = s[lcp:] + b"\x00"
        write_varint(out, lcp)
        write_varint(out, len(suffix))
        out += suffix
    return bytes(out)


def decode_bucket(data: bytes) -> tuple[StringSet, LcpArray]:
    """Decode wire records back into strings plus their LCP array.

    The emitted LCP values are the transmitted ones, which are valid for the
    decoded run because each bucket is a slice of a sorted sequence.
    """
    strings: list[bytes] = []
    lcps: list[int] = []
    pos = 0
    prev = b""
    while pos < len(data):
        lcp, pos = read_varint(data, pos)
        slen, pos = read_varint(data, pos)
        if pos + slen > len(data):
            raise DecodeError("truncated suffix", pos)
        if slen < 1:
            raise DecodeError("suffix must include the terminator", pos)
        suffix = data[pos : pos + slen]
        pos += slen
        if suffix[-1] != 0:
            raise DecodeError("missing terminator", pos - 1)
        body = suffix[:-1]
        if b"\x00" in body:
            raise DecodeError("terminator inside suffix", pos - slen)
        if lcp > len(prev):
            raise DecodeError("lcp exceeds previous string", pos - slen)
        s = prev[:lcp] + body
        strings.append(s)
        lcps.append(lcp)
        prev = s
    if lcps:
        lcps[0] = 0
    return StringSet(strings, validate=False), lcps


def bucket_char_bytes(strings: Sequence[bytes], lcps: Sequence[int], compress: bool) -> int:
    """Characters (terminators included) a bucket ships under the format."""
    total = 0
    for i, s in enumerate(strings):
        lcp = lcps[i] if (compress and i > 0) else 0
        total += len(s) - lcp + 1
    return total


def pack_bucket_message(
    strings: Sequence[bytes],
    lcps: Sequence[int],
    origins: Sequence[int],
    compress: bool,
) -> bytes:
    """Frame a bucket with its per-string origin indices for the exchange."""
    out = bytearray()
    write_varint(out, len(strings))
    out += encode_bucket(strings, lcps, compress)
    for idx in origins:
        write_varint(out, idx)
    return bytes(out)


def unpack_bucket_message(data: bytes) -> tuple[StringSet, LcpArray, list[int]]:
    count, pos = read_varint(data, 0)
    strings: list[bytes] = []
    lcps: list[int] = []
    prev = b""
    for _ in range(count):
        lcp, pos = read_varint(data, pos)
        slen, pos = read_varint(data, pos)
        if pos + slen > len(data):
            raise DecodeError("truncated suffix", pos)
        suffix = data[pos : pos + slen]
        pos += slen
        if not suffix or suffix[-1] != 0:
            raise DecodeError("missing terminator", max(pos - 1, 0))
        if lcp > len(prev):
            raise DecodeError("lcp exceeds previous string", pos - slen)
        s = prev[:lcp] + suffix[:-1]
        strings.append(s)
        lcps.append(lcp)
        prev = s
    origins: list[int] = []
    for _ in range(count):
        idx, pos = read_varint(data, pos)
        origins.append(idx)
    if pos != len(data):
        raise DecodeError("trailing bytes", pos)
    if lcps:
        lcps[0] = 0
    return StringSet(strings, validate=False), lcps, origins


def exchange_buckets(
    pe: PE,
    buckets: Sequence[tuple[Sequence[bytes], Sequence[int], Sequence[int]]],
    *,
    compress: bool,
    phase: str = "exchange",
) -> list[tuple[StringSet, LcpArray, list[int]]]:
    """All-to-all exchange of per-destination buckets.

    Each bucket is (strings, lcps, origin indices).  Returns one decoded run
    per source rank, in rank order, ready for merging.  Decode failures are
    re-raised with the source rank attached.
    """
    messages = [
        pack_bucket_message(strs, lcps, origins, compress)
        for strs, lcps, origins in buckets
    ]
    with pe.phase(phase):
        received = pe.alltoallv(messages)
    runs = []
    for src, blob in enumerate(received):
        try:
            runs.append(unpack_bucket_message(blob))
        except DecodeError as e:
            raise DecodeError("from PE %d: %s" % (src, e), e.offset) from None
    return runs
