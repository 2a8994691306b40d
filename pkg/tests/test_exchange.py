import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dss.comm import spawn
from dss.exchange import (
    DecodeError,
    bucket_char_bytes,
    decode_bucket,
    encode_bucket,
    exchange_buckets,
    pack_bucket_message,
    read_varint,
    unpack_bucket_message,
    write_varint,
)
from dss.strings import StringSet, compute_lcp, sort_with_lcp

from helpers import random_strings


def sorted_bucket(items):
    srt, lcps, _ = sort_with_lcp(StringSet(items))
    return list(srt), lcps


class TestVarint:
    @given(st.integers(min_value=0, max_value=2**63 - 1))
    def test_round_trip(self, value):
        buf = bytearray()
        write_varint(buf, value)
        got, pos = read_varint(bytes(buf), 0)
        assert got == value and pos == len(buf)

    def test_truncated(self):
        buf = bytearray()
        write_varint(buf, 300)
        with pytest.raises(DecodeError):
            read_varint(bytes(buf[:1]), 0)


class TestEncodeBucket:
    def test_fig3_first_bucket(self):
        data = encode_bucket([b"algae", b"alpha"], [0, 2], compress=True)
        assert data == b"\x00\x06algae\x00" + b"\x02\x04pha\x00"

    def test_fig3_snow_bucket(self):
        data = encode_bucket([b"snow", b"sorbet", b"sorter"], [0, 1, 3], compress=True)
        assert data == b"\x00\x05snow\x00" + b"\x01\x06orbet\x00" + b"\x03\x04ter\x00"

    def test_compression_off_identity(self):
        data = encode_bucket([b"algae", b"alpha"], [0, 2], compress=False)
        assert data == b"\x00\x06algae\x00" + b"\x00\x06alpha\x00"

    def test_first_record_lcp_forced_zero(self):
        # A slice whose first entry carries a nonzero LCP against a string
        # not in the bucket must still ship the full string.
        data = encode_bucket([b"abcd", b"abce"], [3, 3], compress=True)
        strings, lcps = decode_bucket(data)
        assert list(strings) == [b"abcd", b"abce"]
        assert lcps == [0, 3]


class TestDecodeBucket:
    def test_fig3_round_trips(self):
        for items, lcps in [
            ([b"algae", b"alpha"], [0, 2]),
            ([b"snow", b"sorbet", b"sorter"], [0, 1, 3]),
            ([b"sorted", b"soul"], [0, 2]),
        ]:
            got, got_lcps = decode_bucket(encode_bucket(items, lcps, True))
            assert list(got) == items
            assert got_lcps == lcps

    def test_empty(self):
        strings, lcps = decode_bucket(b"")
        assert len(strings) == 0 and lcps == []

    def test_truncated_stream_reports_offset(self):
        data = encode_bucket([b"abc"], [0], True)
        with pytest.raises(DecodeError) as exc:
            decode_bucket(data[:-2])
        assert exc.value.offset >= 0

    def test_corrupt_lcp_rejected(self):
        # lcp larger than the previous string's length cannot decode.
        buf = bytearray()
        write_varint(buf, 9)
        write_varint(buf, 2)
        buf += b"x\x00"
        with pytest.raises(DecodeError):
            decode_bucket(bytes(buf))

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("compress", [True, False])
    def test_random_round_trip(self, seed, compress):
        rng = random.Random(seed)
        items, lcps = sorted_bucket(
            random_strings(rng, rng.randint(1, 60), sigma=4, max_len=20,
                           dup_fraction=rng.choice([0.0, 0.3]))
        )
        got, got_lcps = decode_bucket(encode_bucket(items, lcps, compress))
        assert list(got) == items
        if compress:
            assert got_lcps[1:] == lcps[1:]
        else:
            assert got_lcps == [0] * len(items)

    @given(st.lists(st.binary(min_size=0, max_size=12).map(
        lambda b: bytes(c or 1 for c in b)), min_size=1, max_size=40))
    @settings(max_examples=80)
    def test_property_round_trip(self, items):
        bucket, lcps = sorted_bucket(items)
        got, _ = decode_bucket(encode_bucket(bucket, lcps, True))
        assert list(got) == bucket


class TestVolumeClosedForm:
    @pytest.mark.parametrize("seed", range(4))
    def test_char_bytes_match_encoding(self, seed):
        rng = random.Random(seed + 50)
        items, lcps = sorted_bucket(random_strings(rng, 40, sigma=26, max_len=16))
        for compress in (True, False):
            data = encode_bucket(items, lcps, compress)
            want = bucket_char_bytes(items, lcps, compress)
            varint_bytes = len(data) - want
            assert varint_bytes >= 2 * len(items) >= 0
            # closed form: first string whole, then suffix lengths, plus terminators
            if compress:
                closed = len(items[0]) + 1 + sum(
                    len(items[i]) - lcps[i] + 1 for i in range(1, len(items))
                )
            else:
                closed = sum(len(s) + 1 for s in items)
            assert want == closed

    def test_compression_never_larger(self):
        rng = random.Random(7)
        items, lcps = sorted_bucket(random_strings(rng, 50, sigma=2, max_len=30))
        on = encode_bucket(items, lcps, True)
        off = encode_bucket(items, lcps, False)
        assert len(on) <= len(off) + 5 * len(items)


class TestBucketMessage:
    def test_round_trip_with_origins(self):
        items, lcps = sorted_bucket([b"ab", b"abc", b"b"])
        blob = pack_bucket_message(items, lcps, [5, 2, 9], compress=True)
        strings, got_lcps, origins = unpack_bucket_message(blob)
        assert list(strings) == items
        assert origins == [5, 2, 9]

    def test_trailing_garbage_rejected(self):
        items, lcps = sorted_bucket([b"x"])
        blob = pack_bucket_message(items, lcps, [0], compress=True)
        with pytest.raises(DecodeError):
            unpack_bucket_message(blob + b"\x01")


class TestExchange:
    def test_fig3_exchange_shape(self):
        # Buckets of the worked example: PE2 must receive one empty run, the
        # snow run from PE1, and its own sorted/soul run.
        all_buckets = {
            0: [([b"algae", b"alpha"], [0, 2], [3, 0]),
                ([b"alps", b"order"], [0, 0], [2, 1]),
                ([], [], [])],
            1: [([b"algo"], [0], [2]),
                ([], [], []),
                ([b"snow", b"sorbet", b"sorter"], [0, 1, 3], [1, 3, 0])],
            2: [([], [], []),
                ([b"orange", b"organ"], [0, 2], [1, 3]),
                ([b"sorted", b"soul"], [0, 2], [0, 2])],
        }

        def program(pe):
            runs = exchange_buckets(pe, all_buckets[pe.rank], compress=True)
            return [(list(s), o) for s, _, o in runs]

        results, report = spawn(3, program)
        assert results[2] == [
            ([], []),
            ([b"snow", b"sorbet", b"sorter"], [1, 3, 0]),
            ([b"sorted", b"soul"], [0, 2]),
        ]
        assert results[0][0] == ([b"algae", b"alpha"], [3, 0])
        assert report.total_sent("exchange") == report.total_received("exchange")

    def test_single_pe_local_bucket(self):
        def program(pe):
            runs = exchange_buckets(pe, [([b"a", b"b"], [0, 0], [0, 1])], compress=True)
            return [list(s) for s, _, _ in runs]

        results, report = spawn(1, program)
        assert results == [[[b"a", b"b"]]]
        assert report.total_sent() == 0

    @pytest.mark.parametrize("p", [2, 4])
    def test_multiset_preserved(self, p):
        rng = random.Random(p * 3)
        locals_ = [random_strings(rng, 30, sigma=4, max_len=10) for _ in range(p)]

        def program(pe):
            items, _ = sorted_bucket(locals_[pe.rank])
            # round-robin the sorted strings over destinations
            buckets = []
            for d in range(p):
                sel = [i for i in range(len(items)) if i % p == d]
                bstr = [items[i] for i in sel]
                blcp = [0] + [compute_lcp(bstr[k - 1], bstr[k]) for k in range(1, len(bstr))]
                buckets.append((bstr, blcp[: len(bstr)], sel))
            runs = exchange_buckets(pe, buckets, compress=True)
            return [s for run, _, _ in runs for s in run]

        results, _ = spawn(p, program)
        got = sorted(s for r in results for s in r)
        want = sorted(s for loc in locals_ for s in loc)
        assert got == want
