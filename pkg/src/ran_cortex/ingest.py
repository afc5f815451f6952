"""File-based telemetry replay into a memory namespace.

Input is line-delimited JSON. Each line is either a bare snapshot object or a
full episode {"snapshot": ..., "action": ..., "outcome": ...}; bare snapshots
are stored with a no-op action and a neutral outcome. Invalid lines are
skipped and reported, never fatal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import json

from .encoder import ContextEncoder
from .memory import MemoryStore
from .model import (
    NoOp,
    Outcome,
    RanStateSnapshot,
    action_from_dict,
    validate_snapshot,
)

_NEUTRAL_OUTCOME = Outcome(
    achieved_throughput_mbps=0.0, drop_rate=0.0, sla_violated=False
)


@dataclass
class IngestResult:
    accepted: int
    skipped: list[tuple[int, str]]  # (1-based line number, reason)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "skipped": [{"line": n, "reason": r} for n, r in self.skipped],
        }


def _parse_line(raw: str):
    data = json.loads(raw)
    if not isinstance(data, dict):
        raise ValueError("line is not a JSON object")
    if "snapshot" in data:
        snapshot = RanStateSnapshot.from_dict(data["snapshot"])
        action = action_from_dict(data["action"]) if "action" in data else NoOp()
        outcome = (
            Outcome.from_dict(data["outcome"]) if "outcome" in data else _NEUTRAL_OUTCOME
        )
    else:
        snapshot = RanStateSnapshot.from_dict(data)
        action = NoOp()
        outcome = _NEUTRAL_OUTCOME
    violations = validate_snapshot(snapshot)
    if violations:
        raise ValueError("invalid snapshot: " + "; ".join(violations))
    return snapshot, action, outcome


def ingest_file(
    path: str,
    namespace: str,
    store: Optional[MemoryStore] = None,
    encoder: Optional[ContextEncoder] = None,
    client=None,
) -> IngestResult:
    """Validate, encode and insert every parsable line; returns the tally.

    Records go to the in-process `store` (with `encoder`) or, when `client`
    is given, over the wire to a running service.
    """
    if client is None and (store is None or encoder is None):
        raise ValueError("need either a client or a store plus encoder")
    accepted = 0
    skipped: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                snapshot, action, outcome = _parse_line(raw)
                if client is not None:
                    response = client.insert(
                        namespace,
                        snapshot=snapshot,
                        action=action,
                        outcome=outcome,
                        timestamp_ms=snapshot.timestamp_ms,
                    )
                    if response.get("status") != "ok":
                        raise ValueError(
                            response.get("error_detail", "insert rejected")
                        )
                else:
                    store.insert(
                        namespace,
                        encoder.encode(snapshot),
                        action,
                        outcome,
                        snapshot.timestamp_ms,
                    )
                accepted += 1
            except Exception as exc:
                skipped.append((lineno, str(exc)))
    return IngestResult(accepted=accepted, skipped=skipped)
