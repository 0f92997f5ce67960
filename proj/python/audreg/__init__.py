"""Auditable read/write registers: simulation, history checking, consensus."""

from ._audreg import (
    BoundExceeded,
    InputError,
    Layout,
    UsageError,
    Verdict,
    WordCodec,
    algorithms,
    check,
    consensus,
    explore,
    oracle,
    run,
)

__all__ = [
    "BoundExceeded",
    "InputError",
    "Layout",
    "UsageError",
    "Verdict",
    "WordCodec",
    "algorithms",
    "check",
    "consensus",
    "explore",
    "oracle",
    "run",
]
