"""Seeded synthetic RAN world with recurring episodic dynamics.

The world generates per-cell snapshots, closes the loop through a policy, and
scores outcomes with documented closed forms, so a memory-augmented policy can
be compared side by side with the stateless baseline on identical randomness.

Load model (per cell, per step t):
    day_frac   = (t * step_ms mod 86_400_000) / 86_400_000
    demand     = load_mean + load_amplitude * sin(2*pi*day_frac)
                 + sum of active stadium_surge magnitudes + noise_sigma * g
    realized   = clamp(demand, 0, 1)          # what the cell can present
The diurnal trough constant is therefore load_mean - load_amplitude.

Admission outcome for an enforced threshold thr on realized load r:
    excess = max(0, r - thr)
    served = min(r, thr) + LEAK_FRACTION * excess   # admission is imperfect;
    denied = (1 - LEAK_FRACTION) * excess           # a leak fraction slips past
    sla_violated = served > sla_cap
    achieved_throughput_mbps = served * capacity_mbps
    drop_rate = denied / r   (0 when r == 0)
Lowering thr during a surge trades denied admissions against violations.

Handover outcome for a directive targeting cell c at step t:
    p = clamp(base_failure_prob[c] + active corridor_failure magnitudes on c, 0, 1)
    u = counter-based uniform keyed by (seed, serving cell, t)
    handover_success = u >= p
The failure stream is seeded independently of measurement noise and does not
depend on the chosen target, so runs with different policies are paired
(common random numbers). Admission fields for handover/no-op steps use the
cell's base threshold.

Event recurrences are strictly periodic: occurrence r of an event covers steps
[offset + r*period, offset + r*period + duration). Per-recurrence KPIs count
only steps inside the window, on the event's affected cells. corridor_failure
raises the latent failure probability of its affected (target) cells; handover
pressure itself comes from cells whose configured rsrp sits below the policy
trigger.

Reproducibility: (seed, configs) fully determine every snapshot, outcome and
report for the stateless policy; augmented runs are additionally deterministic
with the in-process exact recall path and a virtual deadline clock (the
default here), which replaces wall time so traces never depend on hardware.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .encoder import ContextEncoder, EncoderConfig, fnv1a64
from .memory import MemoryConfig, MemoryStore
from .model import (
    Action,
    AdmissionThreshold,
    HandoverDirective,
    Outcome,
    RanStateSnapshot,
    action_to_dict,
)
from .policies import PolicyConfig, decide_augmented, decide_stateless, record_episode
from .recall import RecallEngine, RecallQuery, TIMEOUT_RESPONSE

DAY_MS = 86_400_000
LEAK_FRACTION = 0.3
SURGE_TRAFFIC_MIX = (0.7, 0.1, 0.1, 0.1)
SURGE_MIX_BLEND = 0.5

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _mix64(state: int) -> int:
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def failure_draw(seed: int, cell_id: str, step: int) -> float:
    """Uniform in [0,1), independent of call order and of the noise stream."""
    base = (seed ^ fnv1a64(cell_id.encode("utf-8"))) & _MASK64
    word = _mix64(base + (step + 1) * _SPLITMIX_GAMMA)
    return (word >> 11) * 2.0**-53


# --- configuration -----------------------------------------------------------------


@dataclass(frozen=True)
class CellConfig:
    cell_id: str
    load_mean: float = 0.55
    load_amplitude: float = 0.05
    rsrp_mean_dbm: float = -85.0
    sinr_mean_db: float = 15.0
    cqi_base: int = 10
    users_base: int = 120
    traffic_mix: tuple[float, float, float, float] = (0.5, 0.2, 0.2, 0.1)
    sla_cap: float = 0.88
    capacity_mbps: float = 1000.0
    base_failure_prob: float = 0.05
    neighbors: tuple[str, ...] = ()
    neighbor_quality: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "cell_id": self.cell_id,
            "load_mean": self.load_mean,
            "load_amplitude": self.load_amplitude,
            "rsrp_mean_dbm": self.rsrp_mean_dbm,
            "sinr_mean_db": self.sinr_mean_db,
            "cqi_base": self.cqi_base,
            "users_base": self.users_base,
            "traffic_mix": list(self.traffic_mix),
            "sla_cap": self.sla_cap,
            "capacity_mbps": self.capacity_mbps,
            "base_failure_prob": self.base_failure_prob,
            "neighbors": list(self.neighbors),
            "neighbor_quality": dict(self.neighbor_quality),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CellConfig":
        defaults = cls(cell_id="")
        return cls(
            cell_id=data["cell_id"],
            load_mean=float(data.get("load_mean", defaults.load_mean)),
            load_amplitude=float(data.get("load_amplitude", defaults.load_amplitude)),
            rsrp_mean_dbm=float(data.get("rsrp_mean_dbm", defaults.rsrp_mean_dbm)),
            sinr_mean_db=float(data.get("sinr_mean_db", defaults.sinr_mean_db)),
            cqi_base=int(data.get("cqi_base", defaults.cqi_base)),
            users_base=int(data.get("users_base", defaults.users_base)),
            traffic_mix=tuple(data.get("traffic_mix", defaults.traffic_mix)),
            sla_cap=float(data.get("sla_cap", defaults.sla_cap)),
            capacity_mbps=float(data.get("capacity_mbps", defaults.capacity_mbps)),
            base_failure_prob=float(
                data.get("base_failure_prob", defaults.base_failure_prob)
            ),
            neighbors=tuple(data.get("neighbors", ())),
            neighbor_quality=dict(data.get("neighbor_quality", {})),
        )


@dataclass(frozen=True)
class EventConfig:
    kind: str  # "stadium_surge" | "corridor_failure"
    period_steps: int
    duration_steps: int
    magnitude: float
    affected_cells: tuple[str, ...]
    offset_steps: int = 0
    jitter_steps: int = 0  # optional per-occurrence start shift, default off

    def __post_init__(self):
        if self.kind not in ("stadium_surge", "corridor_failure"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if not self.period_steps > self.duration_steps > 0:
            raise ValueError("need period_steps > duration_steps > 0")
        if self.magnitude <= 0:
            raise ValueError("magnitude must be positive")
        if self.jitter_steps < 0:
            raise ValueError("jitter_steps must be >= 0")
        if self.jitter_steps and (
            self.duration_steps + 2 * self.jitter_steps >= self.period_steps
        ):
            raise ValueError("jittered windows would overlap")

    def _shift(self, occurrence: int) -> int:
        """Deterministic per-occurrence start shift in [-jitter, +jitter]."""
        if self.jitter_steps <= 0:
            return 0
        word = _mix64((occurrence + 1) * _SPLITMIX_GAMMA ^ self.period_steps)
        return int(word % (2 * self.jitter_steps + 1)) - self.jitter_steps

    def active(self, t: int) -> bool:
        return self.recurrence_at(t) is not None

    def recurrence_at(self, t: int) -> Optional[int]:
        """0-based occurrence index if step t is inside a window, else None.

        Jittered windows stay disjoint (enforced above), so checking the
        nominal occurrence and its neighbors suffices.
        """
        rel = t - self.offset_steps
        nominal = rel // self.period_steps
        for occurrence in (nominal - 1, nominal, nominal + 1):
            if occurrence < 0:
                continue
            start = (
                self.offset_steps
                + occurrence * self.period_steps
                + self._shift(occurrence)
            )
            if start <= t < start + self.duration_steps:
                return occurrence
        return None

    def recurrence_count(self, duration_steps: int) -> int:
        """Occurrences whose nominal window starts within the run."""
        if duration_steps <= self.offset_steps:
            return 0
        return 1 + (duration_steps - 1 - self.offset_steps) // self.period_steps

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "period_steps": self.period_steps,
            "duration_steps": self.duration_steps,
            "magnitude": self.magnitude,
            "affected_cells": list(self.affected_cells),
            "offset_steps": self.offset_steps,
            "jitter_steps": self.jitter_steps,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EventConfig":
        return cls(
            kind=data["kind"],
            period_steps=int(data["period_steps"]),
            duration_steps=int(data["duration_steps"]),
            magnitude=float(data["magnitude"]),
            affected_cells=tuple(data["affected_cells"]),
            offset_steps=int(data.get("offset_steps", 0)),
            jitter_steps=int(data.get("jitter_steps", 0)),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    duration_steps: int
    cells: tuple[CellConfig, ...]
    events: tuple[EventConfig, ...] = ()
    step_ms: int = 1000
    noise_sigma: float = 0.0

    def __post_init__(self):
        ids = {c.cell_id for c in self.cells}
        for cell in self.cells:
            for nbr in cell.neighbors:
                if nbr in ids:
                    peer = next(c for c in self.cells if c.cell_id == nbr)
                    if cell.cell_id not in peer.neighbors:
                        raise ValueError(
                            f"neighbor graph not symmetric: {cell.cell_id}->{nbr}"
                        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "duration_steps": self.duration_steps,
            "step_ms": self.step_ms,
            "noise_sigma": self.noise_sigma,
            "cells": [c.to_dict() for c in self.cells],
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        return cls(
            seed=int(data["seed"]),
            duration_steps=int(data["duration_steps"]),
            step_ms=int(data.get("step_ms", 1000)),
            noise_sigma=float(data.get("noise_sigma", 0.0)),
            cells=tuple(CellConfig.from_dict(c) for c in data["cells"]),
            events=tuple(EventConfig.from_dict(e) for e in data.get("events", ())),
        )

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")


# --- world ------------------------------------------------------------------------


REPORT_WINDOW_STEPS = 8  # mobility counters aggregate over this many steps


class World:
    """Mutable run state: one RNG stream for measurement noise plus per-cell
    mobility counters (rolling over REPORT_WINDOW_STEPS) fed back into the
    next snapshot."""

    def __init__(self, scenario: ScenarioConfig, base_threshold: float = 0.85):
        self.scenario = scenario
        self.base_threshold = base_threshold
        self.rng = np.random.default_rng(np.random.PCG64(scenario.seed))
        self.realized_load: dict[str, float] = {}
        self.ho_history: dict[str, list[tuple[int, int]]] = {
            c.cell_id: [] for c in scenario.cells
        }

    def record_handover(self, cell_id: str, attempted: bool, failed: bool) -> None:
        history = self.ho_history[cell_id]
        history.append((1 if attempted else 0, 1 if failed else 0))
        if len(history) > REPORT_WINDOW_STEPS:
            del history[0]

    def window_counters(self, cell_id: str) -> tuple[int, int]:
        history = self.ho_history[cell_id]
        return sum(a for a, _ in history), sum(f for _, f in history)

    def demand(self, cell: CellConfig, t: int, noise: float) -> float:
        day_frac = math.fmod(t * self.scenario.step_ms, DAY_MS) / DAY_MS
        load = cell.load_mean + cell.load_amplitude * math.sin(2.0 * math.pi * day_frac)
        for event in self.scenario.events:
            if event.kind == "stadium_surge" and event.active(t):
                if cell.cell_id in event.affected_cells:
                    load += event.magnitude
        return load + noise

    def failure_prob(self, target: str, t: int) -> float:
        p = 0.0
        for cell in self.scenario.cells:
            if cell.cell_id == target:
                p = cell.base_failure_prob
                break
        for event in self.scenario.events:
            if event.kind == "corridor_failure" and event.active(t):
                if target in event.affected_cells:
                    p += event.magnitude
        return min(1.0, max(0.0, p))


def generate_state(world: World, t: int) -> list[RanStateSnapshot]:
    """Snapshots for all cells at step t, consuming noise in a fixed order."""
    scenario = world.scenario
    snaps = []
    timestamp_ms = t * scenario.step_ms
    for cell in scenario.cells:
        sigma = scenario.noise_sigma
        g = world.rng.standard_normal(8) if sigma > 0 else np.zeros(8)
        demand = world.demand(cell, t, float(sigma * g[0]))
        realized = float(min(1.0, max(0.0, demand)))
        world.realized_load[cell.cell_id] = realized
        surge = any(
            e.kind == "stadium_surge" and e.active(t) and cell.cell_id in e.affected_cells
            for e in scenario.events
        )
        mix = np.asarray(cell.traffic_mix, dtype=np.float64)
        if surge:
            mix = (1 - SURGE_MIX_BLEND) * mix + SURGE_MIX_BLEND * np.asarray(
                SURGE_TRAFFIC_MIX
            )
        if sigma > 0:
            mix = np.maximum(mix + sigma * g[4:8], 1e-6)
        mix = mix / mix.sum()
        mix = tuple(float(v) for v in mix)
        # renormalization drift: force the exact sum-to-1 invariant
        mix = mix[:3] + (1.0 - mix[0] - mix[1] - mix[2],)
        attempts, failures = world.window_counters(cell.cell_id)
        snaps.append(
            RanStateSnapshot(
                cell_id=cell.cell_id,
                timestamp_ms=timestamp_ms,
                rsrp_dbm=float(
                    min(-40.0, max(-140.0, cell.rsrp_mean_dbm + sigma * 100.0 * g[1]))
                ),
                sinr_db=float(
                    min(40.0, max(-10.0, cell.sinr_mean_db + sigma * 50.0 * g[2]))
                ),
                cqi=int(min(15, max(0, round(float(cell.cqi_base + sigma * 15.0 * g[3]))))),
                prb_utilization=realized,
                active_users=max(0, int(round(cell.users_base * (1.0 + realized)))),
                handover_attempts=attempts,
                handover_failures=failures,
                traffic_mix=mix,
                neighbor_cells=cell.neighbors,
            )
        )
    return snaps


def apply_action(
    world: World, cell: CellConfig, action: Action, t: int
) -> Outcome:
    """Score one action with the documented closed forms."""
    realized = world.realized_load[cell.cell_id]
    if isinstance(action, AdmissionThreshold):
        threshold = action.load_threshold
    else:
        threshold = world.base_threshold  # handover / no-op steps
    excess = max(0.0, realized - threshold)
    served = min(realized, threshold) + LEAK_FRACTION * excess
    denied = (1.0 - LEAK_FRACTION) * excess
    handover_success: Optional[bool] = None
    if isinstance(action, HandoverDirective):
        p = world.failure_prob(action.target_cell, t)
        u = failure_draw(world.scenario.seed, cell.cell_id, t)
        handover_success = u >= p
        world.record_handover(cell.cell_id, attempted=True,
                              failed=not handover_success)
    else:
        world.record_handover(cell.cell_id, attempted=False, failed=False)
    return Outcome(
        achieved_throughput_mbps=float(served * cell.capacity_mbps),
        drop_rate=float(denied / realized) if realized > 0 else 0.0,
        sla_violated=bool(served > cell.sla_cap),
        handover_success=handover_success,
    )


# --- reports -------------------------------------------------------------------------


@dataclass
class KpiBucket:
    sla_violations: int = 0
    handover_failures: int = 0
    admissions_denied: int = 0
    throughput_sum: float = 0.0
    steps: int = 0

    def add(self, outcome: Outcome, denied: bool) -> None:
        self.steps += 1
        self.throughput_sum += outcome.achieved_throughput_mbps
        if outcome.sla_violated:
            self.sla_violations += 1
        if outcome.handover_success is False:
            self.handover_failures += 1
        if denied:
            self.admissions_denied += 1

    def to_dict(self) -> dict:
        return {
            "sla_violations": self.sla_violations,
            "handover_failures": self.handover_failures,
            "admissions_denied": self.admissions_denied,
            "mean_throughput_mbps": (
                self.throughput_sum / self.steps if self.steps else 0.0
            ),
            "steps": self.steps,
        }


@dataclass(frozen=True)
class ExperimentReport:
    policy: str
    seed: int
    duration_steps: int
    sla_violations: int
    handover_failures: int
    admissions_denied: int
    mean_throughput_mbps: float
    recurrence_kpis: tuple[dict, ...]  # one entry per event, KPIs per occurrence
    trace_hash: str  # 16 hex digits

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "duration_steps": self.duration_steps,
            "sla_violations": self.sla_violations,
            "handover_failures": self.handover_failures,
            "admissions_denied": self.admissions_denied,
            "mean_throughput_mbps": self.mean_throughput_mbps,
            "recurrence_kpis": [dict(e) for e in self.recurrence_kpis],
            "trace_hash": self.trace_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            policy=data["policy"],
            seed=int(data["seed"]),
            duration_steps=int(data["duration_steps"]),
            sla_violations=int(data["sla_violations"]),
            handover_failures=int(data["handover_failures"]),
            admissions_denied=int(data["admissions_denied"]),
            mean_throughput_mbps=float(data["mean_throughput_mbps"]),
            recurrence_kpis=tuple(data.get("recurrence_kpis", ())),
            trace_hash=data["trace_hash"],
        )


class _TraceHasher:
    """Running 64-bit FNV-1a over canonical action/outcome lines."""

    def __init__(self):
        self.value = 0xCBF29CE484222325

    def add(self, t: int, cell_id: str, action: Action, outcome: Outcome) -> None:
        line = "|".join(
            (
                str(t),
                cell_id,
                json.dumps(action_to_dict(action), sort_keys=True,
                           separators=(",", ":")),
                json.dumps(outcome.to_dict(), sort_keys=True, separators=(",", ":")),
            )
        )
        h = self.value
        for byte in (line + "\n").encode("utf-8"):
            h ^= byte
            h = (h * 0x100000001B3) & _MASK64
        self.value = h

    @property
    def hex(self) -> str:
        return f"{self.value:016x}"


# --- experiment loop ------------------------------------------------------------------


def run_experiment(
    scenario: ScenarioConfig,
    policy_kind: str,
    policy_cfg: PolicyConfig | None = None,
    encoder: ContextEncoder | None = None,
    memory: MemoryStore | None = None,
    engine: RecallEngine | None = None,
    namespace: str = "sim",
    recall_mode: str = "exact",
    recall_enabled: bool = True,
    deadline_ms: float = 5.0,
    recall_k: int = 5,
) -> ExperimentReport:
    """Step the scenario under one policy and aggregate KPIs.

    `policy_kind` is "stateless" or "augmented". Augmented runs recall before
    every decision and record each (state, action, outcome) episode; with
    `recall_enabled=False` every recall is replaced by a timeout response,
    which by the fallback contract reproduces the stateless trace bit for bit.
    The default engine uses a frozen virtual clock, so test runs never depend
    on wall time; pass an engine built on the monotonic clock to exercise real
    deadlines.

    Per-recurrence KPI buckets cover each event's affected cells plus their
    direct neighbors, so handover outcomes decided at a source cell are
    attributed to the corridor window they belong to.
    """
    if policy_kind not in ("stateless", "augmented"):
        raise ValueError("policy_kind must be 'stateless' or 'augmented'")
    policy_cfg = policy_cfg or PolicyConfig()
    augmented = policy_kind == "augmented"
    if augmented:
        if encoder is None:
            encoder = ContextEncoder(EncoderConfig())
        if memory is None:
            memory = MemoryStore(MemoryConfig(), encoder_tag=encoder.version_tag)
        if engine is None and recall_enabled:
            engine = RecallEngine(memory, encoder, clock=lambda: 0)

    world = World(scenario, base_threshold=policy_cfg.base_threshold)
    quality = {c.cell_id: c.neighbor_quality for c in scenario.cells}
    cells = {c.cell_id: c for c in scenario.cells}
    hasher = _TraceHasher()
    total = KpiBucket()
    per_event: list[dict[int, KpiBucket]] = [dict() for _ in scenario.events]
    attribution: list[set[str]] = [
        set(event.affected_cells)
        | {
            c.cell_id
            for c in scenario.cells
            if any(nbr in event.affected_cells for nbr in c.neighbors)
        }
        for event in scenario.events
    ]

    for t in range(scenario.duration_steps):
        for snap in generate_state(world, t):
            cell = cells[snap.cell_id]
            embedding = None
            if augmented:
                if recall_enabled:
                    embedding = encoder.encode(snap)
                    response = engine.recall(
                        RecallQuery(
                            namespace=namespace,
                            embedding=embedding,
                            k=recall_k,
                            deadline_ms=deadline_ms,
                            mode="approximate" if recall_mode == "approximate" else "exact",
                        )
                    )
                else:
                    response = TIMEOUT_RESPONSE
                action = decide_augmented(
                    snap, response, policy_cfg, quality[snap.cell_id]
                )
            else:
                action = decide_stateless(snap, policy_cfg, quality[snap.cell_id])
            outcome = apply_action(world, cell, action, t)
            if augmented:
                record_episode(
                    snap, action, outcome, memory, namespace, encoder,
                    embedding=embedding,
                )
            hasher.add(t, snap.cell_id, action, outcome)
            denied = outcome.drop_rate > 0.0
            total.add(outcome, denied)
            for idx, event in enumerate(scenario.events):
                if snap.cell_id in attribution[idx]:
                    rec = event.recurrence_at(t)
                    if rec is not None:
                        per_event[idx].setdefault(rec, KpiBucket()).add(
                            outcome, denied
                        )

    recurrence_kpis = []
    for idx, event in enumerate(scenario.events):
        buckets = per_event[idx]
        recurrence_kpis.append(
            {
                "event_index": idx,
                "kind": event.kind,
                "recurrences": [
                    buckets[r].to_dict() if r in buckets else KpiBucket().to_dict()
                    for r in range(event.recurrence_count(scenario.duration_steps))
                ],
            }
        )

    return ExperimentReport(
        policy=policy_kind,
        seed=scenario.seed,
        duration_steps=scenario.duration_steps,
        sla_violations=total.sla_violations,
        handover_failures=total.handover_failures,
        admissions_denied=total.admissions_denied,
        mean_throughput_mbps=(
            total.throughput_sum / total.steps if total.steps else 0.0
        ),
        recurrence_kpis=tuple(recurrence_kpis),
        trace_hash=hasher.hex,
    )


# --- canned scenarios ---------------------------------------------------------------------


def stadium_scenario(seed: int, recurrences: int = 5) -> ScenarioConfig:
    """Periodic demand surges on one cell; exercises admission control."""
    period, duration, offset = 140, 30, 40
    cells = (
        CellConfig(
            cell_id="hub-1",
            load_mean=0.55,
            load_amplitude=0.05,
            traffic_mix=(0.5, 0.2, 0.2, 0.1),
            neighbors=("hub-2",),
            neighbor_quality={"hub-2": 0.9},
        ),
        CellConfig(
            cell_id="hub-2",
            load_mean=0.45,
            load_amplitude=0.05,
            traffic_mix=(0.4, 0.3, 0.2, 0.1),
            neighbors=("hub-1",),
            neighbor_quality={"hub-1": 0.9},
        ),
    )
    events = (
        EventConfig(
            kind="stadium_surge",
            period_steps=period,
            duration_steps=duration,
            magnitude=0.5,
            affected_cells=("hub-1",),
            offset_steps=offset,
        ),
    )
    return ScenarioConfig(
        seed=seed,
        duration_steps=offset + period * (recurrences - 1) + duration + 10,
        cells=cells,
        events=events,
        noise_sigma=0.01,
    )


def corridor_scenario(seed: int, recurrences: int = 5) -> ScenarioConfig:
    """Recurring handover failures on the preferred target; exercises mobility.

    The edge cell sits below the handover trigger permanently, so every step
    is a handover decision; during corridor windows the best-quality target
    becomes failure-prone.
    """
    period, duration, offset = 140, 30, 40
    cells = (
        CellConfig(
            cell_id="edge-1",
            load_mean=0.4,
            load_amplitude=0.03,
            rsrp_mean_dbm=-112.0,
            neighbors=("road-a", "road-b"),
            neighbor_quality={"road-a": 1.0, "road-b": 0.8},
        ),
        CellConfig(
            cell_id="road-a",
            load_mean=0.4,
            load_amplitude=0.03,
            base_failure_prob=0.05,
            neighbors=("edge-1",),
            neighbor_quality={"edge-1": 0.7},
        ),
        CellConfig(
            cell_id="road-b",
            load_mean=0.4,
            load_amplitude=0.03,
            base_failure_prob=0.05,
            neighbors=("edge-1",),
            neighbor_quality={"edge-1": 0.7},
        ),
    )
    events = (
        EventConfig(
            kind="corridor_failure",
            period_steps=period,
            duration_steps=duration,
            magnitude=0.85,
            affected_cells=("road-a",),
            offset_steps=offset,
        ),
    )
    return ScenarioConfig(
        seed=seed,
        duration_steps=offset + period * (recurrences - 1) + duration + 10,
        cells=cells,
        events=events,
        noise_sigma=0.01,
    )
