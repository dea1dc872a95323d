"""Bounded-skew replay clocks: timestamps, codec, simulator, and replay."""

from .clock import (
    ClockConfig,
    ClockError,
    Ordering,
    Timestamp,
    advance,
    compare,
    derive_epoch,
    equal_offset,
    fresh_timestamp,
    merge_same_epoch,
    receive,
    shift,
)
from .codec import (
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
from .sim import (
    ConfigError,
    EmptyTrace,
    EventRecord,
    RunMetrics,
    SimConfig,
    Trace,
    TraceFormatError,
    compute_metrics,
    read_trace,
    run,
    write_trace,
)
from .replay import (
    NotAPermutation,
    NotInFrontline,
    ReplaySession,
    TooLarge,
    enumerate_replays,
    frontline,
    replay_random,
    session_auto_step,
    session_new,
    session_reset,
    session_step,
    validate_order,
)
from .analysis import (
    AnalysisError,
    FeasibilityRegion,
    InvalidSkew,
    PartialReplayReport,
    SweepSpec,
    emit_csv,
    emit_plot_data,
    feasibility,
    partial_replay_report,
    restamp_trace,
    sweep,
)

__version__ = "0.1.0"
