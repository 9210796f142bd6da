"""Key-isolating stream partitioner: routing, sketches, and a batch-replay
simulator for measuring load imbalance and state-migration cost."""

from ._core import (
    ConfigMismatch,
    EmptyInput,
    FormatError,
    FrequencySketch,
    IoError,
    LocalHistogram,
    Partitioner,
    PartitionerConfig,
    SketchVariant,
    estimated_loads,
    generate_stream,
    hash64,
    kip_update,
    load_imbalance,
    merge,
    migration_fraction,
    run_simulation,
    uniform_hash,
)

__all__ = [
    "ConfigMismatch",
    "EmptyInput",
    "FormatError",
    "FrequencySketch",
    "IoError",
    "LocalHistogram",
    "Partitioner",
    "PartitionerConfig",
    "SketchVariant",
    "estimated_loads",
    "generate_stream",
    "hash64",
    "kip_update",
    "load_imbalance",
    "merge",
    "migration_fraction",
    "run_simulation",
    "uniform_hash",
]
