"""Shared domain types: network state snapshots, actions, outcomes, episodes.

All types are immutable values after construction and safe to share across
threads. The canonical serialized form everywhere (telemetry files, the wire
protocol, persisted stores) is a line-delimited JSON object with the snake_case
field names used below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

# Documented clamp ranges for radio measurements; values outside are invalid.
RSRP_MIN_DBM = -140.0
RSRP_MAX_DBM = -40.0
SINR_MIN_DB = -10.0
SINR_MAX_DB = 40.0

TRAFFIC_CLASSES = ("embb", "urllc", "mmtc", "background")
TRAFFIC_MIX_TOLERANCE = 1e-9


class CortexError(Exception):
    """Base for all library errors."""


class InvalidSnapshotError(CortexError):
    """A snapshot failed validation; `violations` lists what is wrong."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class DimensionMismatchError(CortexError):
    """Embedding dimensionality disagrees with the store or peer vector."""


@dataclass(frozen=True)
class RanStateSnapshot:
    """Observable per-cell network state at one reporting instant.

    The field set is a superset of the usual KPI feeds (radio quality, load,
    mobility counters, traffic composition, neighbor topology) and is
    deliberately extensible; validation below defines exactly what counts as
    a well-formed snapshot.
    """

    cell_id: str
    timestamp_ms: int
    rsrp_dbm: float
    sinr_db: float
    cqi: int
    prb_utilization: float
    active_users: int
    handover_attempts: int
    handover_failures: int
    traffic_mix: tuple[float, float, float, float]
    neighbor_cells: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "cell_id": self.cell_id,
            "timestamp_ms": self.timestamp_ms,
            "rsrp_dbm": self.rsrp_dbm,
            "sinr_db": self.sinr_db,
            "cqi": self.cqi,
            "prb_utilization": self.prb_utilization,
            "active_users": self.active_users,
            "handover_attempts": self.handover_attempts,
            "handover_failures": self.handover_failures,
            "traffic_mix": list(self.traffic_mix),
            "neighbor_cells": list(self.neighbor_cells),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RanStateSnapshot":
        return cls(
            cell_id=data["cell_id"],
            timestamp_ms=int(data["timestamp_ms"]),
            rsrp_dbm=float(data["rsrp_dbm"]),
            sinr_db=float(data["sinr_db"]),
            cqi=int(data["cqi"]),
            prb_utilization=float(data["prb_utilization"]),
            active_users=int(data["active_users"]),
            handover_attempts=int(data["handover_attempts"]),
            handover_failures=int(data["handover_failures"]),
            traffic_mix=tuple(float(v) for v in data["traffic_mix"]),
            neighbor_cells=tuple(data.get("neighbor_cells", ())),
        )


def validate_snapshot(snap: RanStateSnapshot) -> list[str]:
    """Return the list of violated invariants; empty means the snapshot is valid.

    Total function: never raises for any field values of the right shape.
    """
    violations: list[str] = []
    if not snap.cell_id:
        violations.append("cell_id empty")
    if snap.timestamp_ms < 0:
        violations.append("timestamp_ms negative")
    if not RSRP_MIN_DBM <= snap.rsrp_dbm <= RSRP_MAX_DBM:
        violations.append("rsrp_dbm out of range")
    if not SINR_MIN_DB <= snap.sinr_db <= SINR_MAX_DB:
        violations.append("sinr_db out of range")
    if not 0 <= snap.cqi <= 15:
        violations.append("cqi out of range")
    if not 0.0 <= snap.prb_utilization <= 1.0:
        violations.append("prb_utilization out of range")
    if snap.active_users < 0:
        violations.append("active_users negative")
    if snap.handover_attempts < 0:
        violations.append("handover_attempts negative")
    if snap.handover_failures < 0:
        violations.append("handover_failures negative")
    elif snap.handover_failures > snap.handover_attempts:
        violations.append("handover_failures exceeds handover_attempts")
    if len(snap.traffic_mix) != len(TRAFFIC_CLASSES):
        violations.append("traffic_mix must have 4 components")
    else:
        if any(not 0.0 <= v <= 1.0 for v in snap.traffic_mix):
            violations.append("traffic_mix component out of [0,1]")
        if abs(sum(snap.traffic_mix) - 1.0) > TRAFFIC_MIX_TOLERANCE:
            violations.append("traffic_mix sum != 1")
    return violations


def require_valid(snap: RanStateSnapshot) -> None:
    violations = validate_snapshot(snap)
    if violations:
        raise InvalidSnapshotError(violations)


# --- actions ------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissionThreshold:
    """The admission load threshold the cell enforces this step."""

    load_threshold: float

    def __post_init__(self):
        if not 0.0 <= self.load_threshold <= 1.0:
            raise ValueError("load_threshold must be in [0,1]")


@dataclass(frozen=True)
class HandoverDirective:
    """Hand the session over to `target_cell`, avoiding `blacklist`."""

    target_cell: str
    blacklist: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.target_cell in self.blacklist:
            raise ValueError("blacklist must not contain target_cell")


@dataclass(frozen=True)
class NoOp:
    pass


Action = Union[AdmissionThreshold, HandoverDirective, NoOp]

_ACTION_KINDS = {
    AdmissionThreshold: "admission_threshold",
    HandoverDirective: "handover",
    NoOp: "noop",
}


def action_kind(action: Action) -> str:
    return _ACTION_KINDS[type(action)]


def action_to_dict(action: Action) -> dict[str, Any]:
    if isinstance(action, AdmissionThreshold):
        return {"kind": "admission_threshold", "load_threshold": action.load_threshold}
    if isinstance(action, HandoverDirective):
        return {
            "kind": "handover",
            "target_cell": action.target_cell,
            "blacklist": sorted(action.blacklist),
        }
    if isinstance(action, NoOp):
        return {"kind": "noop"}
    raise TypeError(f"not an Action: {action!r}")


def action_from_dict(data: dict[str, Any]) -> Action:
    kind = data.get("kind")
    if kind == "admission_threshold":
        return AdmissionThreshold(load_threshold=float(data["load_threshold"]))
    if kind == "handover":
        return HandoverDirective(
            target_cell=data["target_cell"],
            blacklist=frozenset(data.get("blacklist", ())),
        )
    if kind == "noop":
        return NoOp()
    raise ValueError(f"unknown action kind: {kind!r}")


# --- outcomes and episodes ------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    """Observed result of applying an action for one step."""

    achieved_throughput_mbps: float
    drop_rate: float
    sla_violated: bool
    handover_success: Optional[bool] = None

    def __post_init__(self):
        if self.achieved_throughput_mbps < 0:
            raise ValueError("throughput must be >= 0")
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError("drop_rate must be in [0,1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "achieved_throughput_mbps": self.achieved_throughput_mbps,
            "drop_rate": self.drop_rate,
            "sla_violated": self.sla_violated,
            "handover_success": self.handover_success,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Outcome":
        return cls(
            achieved_throughput_mbps=float(data["achieved_throughput_mbps"]),
            drop_rate=float(data["drop_rate"]),
            sla_violated=bool(data["sla_violated"]),
            handover_success=data.get("handover_success"),
        )


def is_salient(outcome: Outcome) -> bool:
    """High-value episodes (failures, violations) are protected from routine eviction."""
    return outcome.sla_violated or outcome.handover_success is False


@dataclass(frozen=True)
class EpisodeRecord:
    """One stored memory entry: context embedding plus behavioral metadata."""

    id: int
    embedding: np.ndarray
    action: Action
    outcome: Outcome
    timestamp_ms: int
    namespace: str
    salient: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "embedding": [float(v) for v in self.embedding],
            "action": action_to_dict(self.action),
            "outcome": self.outcome.to_dict(),
            "timestamp_ms": self.timestamp_ms,
            "namespace": self.namespace,
            "salient": self.salient,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EpisodeRecord":
        return cls(
            id=int(data["id"]),
            embedding=np.asarray(data["embedding"], dtype=np.float64),
            action=action_from_dict(data["action"]),
            outcome=Outcome.from_dict(data["outcome"]),
            timestamp_ms=int(data["timestamp_ms"]),
            namespace=data["namespace"],
            salient=bool(data["salient"]),
        )
