"""Deadline-bounded recall over the memory store.

`RecallEngine.recall` never blocks past the query deadline: the underlying
scans poll a stop callback cooperatively (the exact path between fixed row
batches, the graph walk every few hops), so the observed overshoot is bounded
by one batch of work plus scheduling slack. A late query yields status
"timeout" with an empty neighbor list, which the policy layer treats exactly
like an empty recall; timeout is not an error.

The clock is injectable: production uses the monotonic wall clock, tests and
deterministic simulation runs substitute a virtual clock so timeout behavior
is reproducible on any hardware.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .encoder import ContextEncoder
from .hnsw import SearchDeadlineExceeded
from .memory import MemoryStore, Neighbor, RecordFilter
from .model import (
    CortexError,
    InvalidSnapshotError,
    RanStateSnapshot,
)

DEFAULT_K = 5
DEFAULT_DEADLINE_MS = 5.0

Clock = Callable[[], int]  # returns microseconds, monotonic


def monotonic_clock_us() -> int:
    return time.perf_counter_ns() // 1000


@dataclass(frozen=True)
class RecallQuery:
    namespace: str
    snapshot: Optional[RanStateSnapshot] = None
    embedding: Optional[np.ndarray] = None
    k: int = DEFAULT_K
    deadline_ms: float = DEFAULT_DEADLINE_MS
    mode: str = "exact"  # "exact" | "approximate"
    record_filter: Optional[RecordFilter] = None


@dataclass(frozen=True)
class RecallResponse:
    status: str  # "ok" | "timeout" | "error"
    neighbors: tuple[Neighbor, ...] = ()
    latency_us: int = 0
    error_detail: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "neighbors": [n.to_dict() for n in self.neighbors],
            "latency_us": self.latency_us,
        }
        if self.error_detail is not None:
            out["error_detail"] = self.error_detail
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RecallResponse":
        return cls(
            status=data["status"],
            neighbors=tuple(Neighbor.from_dict(n) for n in data.get("neighbors", ())),
            latency_us=int(data.get("latency_us", 0)),
            error_detail=data.get("error_detail"),
        )


TIMEOUT_RESPONSE = RecallResponse(status="timeout")


class RecallEngine:
    """Stateless dispatcher: encode if needed, query, honor the deadline."""

    def __init__(
        self,
        store: MemoryStore,
        encoder: Optional[ContextEncoder] = None,
        clock: Clock = monotonic_clock_us,
    ):
        self.store = store
        self.encoder = encoder
        self.clock = clock

    def recall(self, query: RecallQuery) -> RecallResponse:
        start = self.clock()

        def finish(status, neighbors=(), detail=None):
            return RecallResponse(
                status=status,
                neighbors=tuple(neighbors),
                latency_us=max(0, self.clock() - start),
                error_detail=detail,
            )

        if query.k < 1:
            return finish("error", detail="k must be >= 1")
        if not query.deadline_ms > 0:
            return finish("error", detail="deadline_ms must be > 0")
        if query.mode not in ("exact", "approximate"):
            return finish("error", detail=f"unknown mode {query.mode!r}")
        if (query.snapshot is None) == (query.embedding is None):
            return finish(
                "error", detail="exactly one of snapshot/embedding is required"
            )

        deadline = start + int(query.deadline_ms * 1000)

        def should_stop() -> bool:
            return self.clock() > deadline

        try:
            if query.embedding is not None:
                vec = np.asarray(query.embedding, dtype=np.float64)
            else:
                if self.encoder is None:
                    return finish("error", detail="no encoder configured")
                vec = self.encoder.encode(query.snapshot)
            if should_stop():
                return finish("timeout")
            if query.mode == "exact":
                neighbors = self.store.query_exact(
                    query.namespace, vec, query.k, query.record_filter, should_stop
                )
            else:
                neighbors = self.store.query_approx(
                    query.namespace, vec, query.k, query.record_filter, should_stop
                )
            return finish("ok", neighbors)
        except SearchDeadlineExceeded:
            return finish("timeout")
        except InvalidSnapshotError as exc:
            return finish("error", detail=f"invalid snapshot: {exc}")
        except (CortexError, ValueError) as exc:
            return finish("error", detail=str(exc))
