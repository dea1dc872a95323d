import time

import pytest
from hypothesis import given, strategies as st

from replayclock.clock import ClockConfig, Ordering, Timestamp, compare
from replayclock.codec import (
    CodecError,
    CodecLayout,
    CounterOverflow,
    EncodedTimestamp,
    MalformedEncoding,
    OffsetOverflow,
    decode,
    encode,
    size_in_words,
)

LAYOUT = CodecLayout(n=3)  # 4-bit offsets, 8-bit counters


class TestLayout:
    def test_defaults(self):
        assert LAYOUT.offset_bits == 4 and LAYOUT.counter_bits == 8
        assert LAYOUT.max_offset == 15 and LAYOUT.max_counter == 255

    def test_fits(self):
        assert LAYOUT.fits(ClockConfig(n=3, epsilon_time=15, interval=1))
        assert not LAYOUT.fits(ClockConfig(n=3, epsilon_time=16, interval=1))
        assert not LAYOUT.fits(ClockConfig(n=4, epsilon_time=8, interval=1))

    def test_for_config_widens_when_needed(self):
        assert CodecLayout.for_config(ClockConfig(n=8, epsilon_time=10, interval=1)).offset_bits == 4
        wide = CodecLayout.for_config(ClockConfig(n=32, epsilon_time=1000, interval=8))
        assert wide.offset_bits == 7  # epsilon = 125
        assert wide.fits(ClockConfig(n=32, epsilon_time=1000, interval=8))

    def test_rejects_too_many_processes(self):
        with pytest.raises(CodecError):
            CodecLayout(n=65)


class TestEncode:
    def test_single_entry_layout(self):
        ts = Timestamp(mx=50, offsets={2: 10}, counters={2: 2}, owner=2)
        enc = encode(ts, LAYOUT)
        assert enc.words == (50, 0b100, 10, 2)
        assert enc.hex_words() == ["0x32", "0x4", "0xa", "0x2"]

    def test_empty_maps(self):
        enc = encode(Timestamp(mx=7, offsets={}, counters={}), LAYOUT)
        assert enc.words == (7, 0)

    def test_packing_is_ascending_and_tight(self):
        ts = Timestamp(mx=1, offsets={0: 1, 1: 2, 2: 3}, counters={1: 9})
        enc = encode(ts, LAYOUT)
        assert enc.words == (1, 0b111, 1 | (2 << 4) | (3 << 8), 9 << 8)

    def test_values_cross_word_boundaries(self):
        layout = CodecLayout(n=20, offset_bits=5, counter_bits=8)
        offsets = {p: (p * 7) % 31 for p in range(20)}
        ts = Timestamp(mx=3, offsets=offsets, counters={})
        enc = encode(ts, layout)
        assert len(enc.words) == size_in_words(ts, layout)
        assert decode(enc, layout) == Timestamp(mx=3, offsets=offsets, counters={})

    def test_offset_overflow(self):
        with pytest.raises(OffsetOverflow):
            encode(Timestamp(mx=0, offsets={0: 16}, counters={}), LAYOUT)

    def test_counter_overflow(self):
        with pytest.raises(CounterOverflow):
            encode(Timestamp(mx=0, offsets={0: 1}, counters={0: 256}), LAYOUT)

    def test_counter_without_offset_rejected(self):
        with pytest.raises(CodecError):
            encode(Timestamp(mx=0, offsets={}, counters={1: 1}), LAYOUT)

    def test_process_out_of_range(self):
        with pytest.raises(CodecError):
            encode(Timestamp(mx=0, offsets={3: 1}, counters={}), LAYOUT)

    def test_canonical_for_equal_timestamps(self):
        a = Timestamp(mx=5, offsets={0: 1, 2: 3}, counters={0: 1})
        b = Timestamp(mx=5, offsets={2: 3, 0: 1}, counters={0: 1})
        assert encode(a, LAYOUT) == encode(b, LAYOUT)


class TestDecode:
    def test_single_entry_layout(self):
        ts = decode(EncodedTimestamp(words=(50, 0b100, 10, 2)), LAYOUT, owner=2)
        assert ts == Timestamp(mx=50, offsets={2: 10}, counters={2: 2}, owner=2)

    def test_absent_bits_mean_no_information(self):
        ts = decode(EncodedTimestamp(words=(9, 0)), LAYOUT)
        assert ts.offsets == {} and ts.counters == {}

    def test_bitmap_bit_beyond_n(self):
        with pytest.raises(MalformedEncoding):
            decode(EncodedTimestamp(words=(0, 0b1000, 0, 0)), LAYOUT)

    def test_truncated(self):
        with pytest.raises(MalformedEncoding):
            decode(EncodedTimestamp(words=(50, 0b100, 10)), LAYOUT)
        with pytest.raises(MalformedEncoding):
            decode(EncodedTimestamp(words=(50,)), LAYOUT)

    def test_oversized(self):
        with pytest.raises(MalformedEncoding):
            decode(EncodedTimestamp(words=(50, 0, 0)), LAYOUT)

    def test_trailing_garbage_bits(self):
        with pytest.raises(MalformedEncoding):
            decode(EncodedTimestamp(words=(50, 0b1, 1 | (1 << 4), 0)), LAYOUT)

    def test_hex_roundtrip(self):
        enc = EncodedTimestamp(words=(50, 4, 10, 2))
        assert EncodedTimestamp.from_hex_words(enc.hex_words()) == enc
        with pytest.raises(MalformedEncoding):
            EncodedTimestamp.from_hex_words(["zz"])


class TestSizeInWords:
    def test_two_entries_default_layout(self):
        ts = Timestamp(mx=50, offsets={0: 1, 2: 10}, counters={2: 2})
        assert size_in_words(ts, LAYOUT) == 4

    def test_empty(self):
        assert size_in_words(Timestamp(mx=1, offsets={}, counters={}), LAYOUT) == 2

    def test_seventeen_entries(self):
        layout = CodecLayout(n=64)
        ts = Timestamp(mx=0, offsets={p: 1 for p in range(17)}, counters={})
        # 17 * 4 = 68 bits -> 2 words; 17 * 8 = 136 bits -> 3 words
        assert size_in_words(ts, layout) == 2 + 2 + 3

    def test_matches_encode_length_affinely(self):
        layout = CodecLayout(n=64)
        last = None
        for x in range(0, 64, 7):
            ts = Timestamp(mx=0, offsets={p: 1 for p in range(x)}, counters={})
            n_words = size_in_words(ts, layout)
            assert n_words == len(encode(ts, layout).words)
            if last is not None:
                assert n_words >= last
            last = n_words


def layout_timestamps(layout: CodecLayout):
    @st.composite
    def build(draw):
        mx = draw(st.integers(min_value=0, max_value=2**63 - 1))
        procs = draw(
            st.lists(st.integers(0, layout.n - 1), unique=True, max_size=layout.n)
        )
        offsets = {p: draw(st.integers(0, layout.max_offset)) for p in procs}
        counters = {
            p: draw(st.integers(1, layout.max_counter))
            for p in procs
            if draw(st.booleans())
        }
        return Timestamp(mx=mx, offsets=offsets, counters=counters)

    return build()


class TestRoundtripProperty:
    @given(layout_timestamps(CodecLayout(n=16)))
    def test_roundtrip_small(self, ts):
        layout = CodecLayout(n=16)
        assert decode(encode(ts, layout), layout) == ts

    @given(layout_timestamps(CodecLayout(n=64, offset_bits=7, counter_bits=5)))
    def test_roundtrip_wide(self, ts):
        layout = CodecLayout(n=64, offset_bits=7, counter_bits=5)
        enc = encode(ts, layout)
        assert decode(enc, layout) == ts
        assert len(enc.words) == size_in_words(ts, layout)


class TestSparseCost:
    def test_compare_scales_with_stored_entries_not_n(self):
        # same stored entries under wildly different process counts: the
        # comparison must not iterate all of n
        reps = 3000
        timings = {}
        for n in (64, 100_000):
            cfg = ClockConfig(n=n, epsilon_time=10, interval=1)
            e = Timestamp(mx=5, offsets={0: 1, 1: 2}, counters={}, owner=0)
            f = Timestamp(mx=6, offsets={1: 1, 2: 0}, counters={}, owner=2)
            start = time.perf_counter()
            for _ in range(reps):
                compare(e, f, cfg)
            timings[n] = time.perf_counter() - start
        assert timings[100_000] < timings[64] * 20
