"""Stateless baseline policies and their memory-augmented counterparts.

The augmentation contract is strict: whenever recall is unavailable (timeout,
error, or empty neighbor list) the augmented policy returns exactly the
stateless action, so memory can only ever refine a decision, never replace
the fallback path. Memory influence is quorum-gated: only neighbors at least
`similarity_gate` similar are considered, and at least `violation_quorum`
(admission) or `failure_quorum` (mobility) of them must agree before the
stateless action is adjusted.

All policies are pure functions of (snapshot, recall, config) and safe to
call from anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .encoder import ContextEncoder
from .memory import MemoryStore
from .model import (
    Action,
    AdmissionThreshold,
    HandoverDirective,
    NoOp,
    Outcome,
    RanStateSnapshot,
)
from .recall import RecallResponse


@dataclass(frozen=True)
class PolicyConfig:
    # admission control
    base_threshold: float = 0.85
    tighten_delta: float = 0.10
    similarity_gate: float = 0.80
    violation_quorum: int = 2
    # mobility
    failure_quorum: int = 2
    blacklist_window_ms: int = 3_600_000
    handover_rsrp_trigger_dbm: float = -100.0

    def __post_init__(self):
        if not 0.0 < self.similarity_gate < 1.0:
            raise ValueError("similarity_gate must be in (0,1)")
        if not 0.0 < self.tighten_delta < 1.0:
            raise ValueError("tighten_delta must be in (0,1)")
        if self.violation_quorum < 1 or self.failure_quorum < 1:
            raise ValueError("quorums must be >= 1")

    def to_dict(self) -> dict:
        return {
            "base_threshold": self.base_threshold,
            "tighten_delta": self.tighten_delta,
            "similarity_gate": self.similarity_gate,
            "violation_quorum": self.violation_quorum,
            "failure_quorum": self.failure_quorum,
            "blacklist_window_ms": self.blacklist_window_ms,
            "handover_rsrp_trigger_dbm": self.handover_rsrp_trigger_dbm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyConfig":
        defaults = cls()
        return cls(
            base_threshold=float(data.get("base_threshold", defaults.base_threshold)),
            tighten_delta=float(data.get("tighten_delta", defaults.tighten_delta)),
            similarity_gate=float(data.get("similarity_gate", defaults.similarity_gate)),
            violation_quorum=int(data.get("violation_quorum", defaults.violation_quorum)),
            failure_quorum=int(data.get("failure_quorum", defaults.failure_quorum)),
            blacklist_window_ms=int(
                data.get("blacklist_window_ms", defaults.blacklist_window_ms)
            ),
            handover_rsrp_trigger_dbm=float(
                data.get("handover_rsrp_trigger_dbm", defaults.handover_rsrp_trigger_dbm)
            ),
        )


def _recall_usable(recall: Optional[RecallResponse]) -> bool:
    return recall is not None and recall.status == "ok" and len(recall.neighbors) > 0


# --- admission control -----------------------------------------------------------


def stateless_admission(snap: RanStateSnapshot, cfg: PolicyConfig) -> AdmissionThreshold:
    """The fixed-rule baseline: enforce the configured base threshold."""
    return AdmissionThreshold(load_threshold=cfg.base_threshold)


def augmented_admission(
    snap: RanStateSnapshot,
    recall: Optional[RecallResponse],
    cfg: PolicyConfig,
) -> AdmissionThreshold:
    """Tighten the threshold pre-emptively when similar past states violated SLA."""
    if not _recall_usable(recall):
        return stateless_admission(snap, cfg)
    violations = sum(
        1
        for n in recall.neighbors
        if n.similarity >= cfg.similarity_gate and n.outcome.sla_violated
    )
    if violations >= cfg.violation_quorum:
        return AdmissionThreshold(
            load_threshold=cfg.base_threshold - cfg.tighten_delta
        )
    return stateless_admission(snap, cfg)


# --- mobility ----------------------------------------------------------------------


def handover_eligible(snap: RanStateSnapshot, cfg: PolicyConfig) -> bool:
    return (
        snap.rsrp_dbm < cfg.handover_rsrp_trigger_dbm and len(snap.neighbor_cells) > 0
    )


def _best_neighbor(
    snap: RanStateSnapshot,
    quality: Mapping[str, float],
    exclude: frozenset[str] = frozenset(),
) -> Optional[str]:
    """Highest-quality neighbor; ties keep the earlier entry in neighbor_cells."""
    best = None
    best_q = -np.inf
    for cell in snap.neighbor_cells:
        if cell in exclude:
            continue
        q = quality.get(cell, 0.0)
        if q > best_q:
            best, best_q = cell, q
    return best


def stateless_handover(
    snap: RanStateSnapshot,
    cfg: PolicyConfig,
    neighbor_quality: Mapping[str, float],
) -> Action:
    """Pick the best neighbor from the quality table; NoOp when not eligible."""
    if not handover_eligible(snap, cfg):
        return NoOp()
    target = _best_neighbor(snap, neighbor_quality)
    if target is None:
        return NoOp()
    return HandoverDirective(target_cell=target)


def augmented_handover(
    snap: RanStateSnapshot,
    recall: Optional[RecallResponse],
    cfg: PolicyConfig,
    neighbor_quality: Mapping[str, float],
) -> Action:
    """Blacklist targets that recently failed in similar situations.

    A cell is blacklisted only when at least `failure_quorum` recalled
    episodes targeted it, failed, landed within the blacklist window, and
    passed the similarity gate. If every neighbor ends up blacklisted the
    stateless choice wins: availability beats memory.
    """
    base = stateless_handover(snap, cfg, neighbor_quality)
    if not _recall_usable(recall) or not isinstance(base, HandoverDirective):
        return base
    window_lo = snap.timestamp_ms - cfg.blacklist_window_ms
    failures: dict[str, int] = {}
    for n in recall.neighbors:
        if n.similarity < cfg.similarity_gate:
            continue
        if not isinstance(n.action, HandoverDirective):
            continue
        if n.outcome.handover_success is not False:
            continue
        if not window_lo <= n.timestamp_ms <= snap.timestamp_ms + cfg.blacklist_window_ms:
            continue
        failures[n.action.target_cell] = failures.get(n.action.target_cell, 0) + 1
    blacklist = frozenset(
        cell for cell, count in failures.items() if count >= cfg.failure_quorum
    )
    if not blacklist:
        return base
    target = _best_neighbor(snap, neighbor_quality, exclude=blacklist)
    if target is None:
        return base  # everything blacklisted: fall back to the stateless choice
    return HandoverDirective(target_cell=target, blacklist=blacklist)


# --- combined per-cell decision -------------------------------------------------------


def decide_stateless(
    snap: RanStateSnapshot,
    cfg: PolicyConfig,
    neighbor_quality: Mapping[str, float],
) -> Action:
    """Mobility when the cell is handover-eligible, admission control otherwise."""
    if handover_eligible(snap, cfg):
        return stateless_handover(snap, cfg, neighbor_quality)
    return stateless_admission(snap, cfg)


def decide_augmented(
    snap: RanStateSnapshot,
    recall: Optional[RecallResponse],
    cfg: PolicyConfig,
    neighbor_quality: Mapping[str, float],
) -> Action:
    if handover_eligible(snap, cfg):
        return augmented_handover(snap, recall, cfg, neighbor_quality)
    return augmented_admission(snap, recall, cfg)


# --- episode recording ------------------------------------------------------------------


def record_episode(
    snap: RanStateSnapshot,
    action: Action,
    outcome: Outcome,
    store: MemoryStore,
    namespace: str,
    encoder: ContextEncoder,
    embedding: Optional[np.ndarray] = None,
) -> int:
    """Encode (unless a precomputed embedding is supplied) and insert the episode."""
    if embedding is None:
        embedding = encoder.encode(snap)
    return store.insert(namespace, embedding, action, outcome, snap.timestamp_ms)
