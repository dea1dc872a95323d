"""Compact word-level encoding of replay-clock timestamps.

Layout (64-bit words):

    word 0   mx
    word 1   presence bitmap: bit k set iff an offset for process k is stored
    then     stored offsets, fixed width, packed tightly in ascending process
             order (values may span word boundaries; trailing bits zero)
    then     counters for the same processes, fixed width, same packing

A clear bitmap bit means "no information", i.e. the offset reads back as the
skew bound in epochs and the counter as zero.  Encoding is canonical: equal
timestamps produce identical word sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

from .clock import ClockConfig, Timestamp

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1


class CodecError(ValueError):
    pass


class OffsetOverflow(CodecError):
    """A stored offset does not fit the configured field width."""


class CounterOverflow(CodecError):
    """A stored counter does not fit the configured field width."""


class MalformedEncoding(CodecError):
    """Word sequence is truncated, oversized, or has stray bitmap bits."""


@dataclass(frozen=True)
class CodecLayout:
    """Fixed bit widths for one system configuration."""

    n: int
    offset_bits: int = 4
    counter_bits: int = 8

    def __post_init__(self) -> None:
        if not (1 <= self.n <= WORD_BITS):
            raise CodecError(f"process count must be in [1, {WORD_BITS}], got {self.n}")
        if not (1 <= self.offset_bits <= WORD_BITS):
            raise CodecError(f"offset_bits out of range: {self.offset_bits}")
        if not (1 <= self.counter_bits <= WORD_BITS):
            raise CodecError(f"counter_bits out of range: {self.counter_bits}")

    @property
    def max_offset(self) -> int:
        return (1 << self.offset_bits) - 1

    @property
    def max_counter(self) -> int:
        return (1 << self.counter_bits) - 1

    def fits(self, cfg: ClockConfig) -> bool:
        """Whether every representable offset value (0..epsilon) fits."""
        return self.max_offset >= cfg.epsilon and cfg.n <= self.n

    @classmethod
    def for_config(cls, cfg: ClockConfig, counter_bits: int = 8) -> "CodecLayout":
        """Smallest standard layout for ``cfg``, widening past the 4-bit
        default only when the epoch skew bound demands it."""
        offset_bits = max(4, cfg.epsilon.bit_length())
        return cls(n=cfg.n, offset_bits=offset_bits, counter_bits=counter_bits)


@dataclass(frozen=True)
class EncodedTimestamp:
    words: tuple

    def hex_words(self) -> List[str]:
        return [f"{w:#x}" for w in self.words]

    @classmethod
    def from_hex_words(cls, hex_words: Sequence[str]) -> "EncodedTimestamp":
        try:
            return cls(words=tuple(int(w, 16) for w in hex_words))
        except ValueError as exc:
            raise MalformedEncoding(f"bad hex word: {exc}") from exc


def _pack(values: List[int], width: int) -> List[int]:
    stream = 0
    for slot, v in enumerate(values):
        stream |= v << (slot * width)
    nwords = (len(values) * width + WORD_BITS - 1) // WORD_BITS
    return [(stream >> (WORD_BITS * i)) & _WORD_MASK for i in range(nwords)]


def _unpack(words: Sequence[int], count: int, width: int) -> List[int]:
    stream = 0
    for i, w in enumerate(words):
        stream |= w << (WORD_BITS * i)
    mask = (1 << width) - 1
    values = [(stream >> (slot * width)) & mask for slot in range(count)]
    if stream >> (count * width):
        raise MalformedEncoding("nonzero trailing bits in payload")
    return values


def encode(ts: Timestamp, layout: CodecLayout) -> EncodedTimestamp:
    """Canonical encoding; raises on any value exceeding its field width."""
    if ts.mx < 0 or ts.mx > _WORD_MASK:
        raise CodecError(f"mx out of 64-bit range: {ts.mx}")
    procs = sorted(ts.offsets)
    bitmap = 0
    for p in procs:
        if not (0 <= p < layout.n):
            raise CodecError(f"process id {p} outside layout range 0..{layout.n - 1}")
        bitmap |= 1 << p
    offsets = []
    for p in procs:
        v = ts.offsets[p]
        if not (0 <= v <= layout.max_offset):
            raise OffsetOverflow(
                f"offset {v} for process {p} exceeds {layout.offset_bits}-bit field"
            )
        offsets.append(v)
    counters = []
    for p in procs:
        v = ts.counters.get(p, 0)
        if not (0 <= v <= layout.max_counter):
            raise CounterOverflow(
                f"counter {v} for process {p} exceeds {layout.counter_bits}-bit field"
            )
        counters.append(v)
    stray = [p for p in ts.counters if p not in ts.offsets]
    if stray:
        raise CodecError(f"counters without stored offsets cannot be encoded: {stray}")
    words = [ts.mx, bitmap]
    words += _pack(offsets, layout.offset_bits)
    words += _pack(counters, layout.counter_bits)
    return EncodedTimestamp(words=tuple(words))


def decode(
    enc: EncodedTimestamp, layout: CodecLayout, owner: Optional[int] = None
) -> Timestamp:
    """Inverse of :func:`encode`.

    Clear bitmap bits decode to no stored offset (reads as the epoch skew
    bound) and counter zero.  The word layout carries no owner, so the caller
    supplies it when known.
    """
    words = enc.words
    if len(words) < 2:
        raise MalformedEncoding(f"need at least 2 words, got {len(words)}")
    mx, bitmap = words[0], words[1]
    if bitmap >> layout.n:
        raise MalformedEncoding(
            f"bitmap has bits set at or beyond process count {layout.n}"
        )
    procs = [p for p in range(layout.n) if bitmap >> p & 1]
    x = len(procs)
    off_words = (x * layout.offset_bits + WORD_BITS - 1) // WORD_BITS
    cnt_words = (x * layout.counter_bits + WORD_BITS - 1) // WORD_BITS
    expected = 2 + off_words + cnt_words
    if len(words) != expected:
        raise MalformedEncoding(f"expected {expected} words, got {len(words)}")
    for w in words:
        if not (0 <= w <= _WORD_MASK):
            raise MalformedEncoding(f"word out of 64-bit range: {w}")
    offs = _unpack(words[2 : 2 + off_words], x, layout.offset_bits)
    cnts = _unpack(words[2 + off_words :], x, layout.counter_bits)
    offsets = {p: v for p, v in zip(procs, offs)}
    counters = {p: v for p, v in zip(procs, cnts) if v > 0}
    return Timestamp(mx=mx, offsets=offsets, counters=counters, owner=owner)


def size_in_words(ts: Timestamp, layout: CodecLayout) -> int:
    """Encoded length: 2 header words plus tightly packed payload."""
    x = len(ts.offsets)
    off_words = (x * layout.offset_bits + WORD_BITS - 1) // WORD_BITS
    cnt_words = (x * layout.counter_bits + WORD_BITS - 1) // WORD_BITS
    return 2 + off_words + cnt_words
