"""Episodic recall for RAN control loops: encoder, memory, recall service,
policy kit and a synthetic scenario simulator."""

from .encoder import ContextEncoder, EncoderConfig, feature_vector
from .hnsw import HnswIndex, HnswParams
from .ingest import ingest_file
from .memory import (
    MemoryConfig,
    MemoryStore,
    Neighbor,
    RecordFilter,
    StoreVersionError,
    cosine_similarity,
)
from .model import (
    Action,
    AdmissionThreshold,
    EpisodeRecord,
    HandoverDirective,
    InvalidSnapshotError,
    NoOp,
    Outcome,
    RanStateSnapshot,
    is_salient,
    validate_snapshot,
)
from .policies import (
    PolicyConfig,
    augmented_admission,
    augmented_handover,
    decide_augmented,
    decide_stateless,
    record_episode,
    stateless_admission,
    stateless_handover,
)
from .recall import RecallEngine, RecallQuery, RecallResponse
from .service import CortexClient, CortexServer, ServiceConfig
from .simulator import (
    CellConfig,
    EventConfig,
    ExperimentReport,
    ScenarioConfig,
    World,
    apply_action,
    corridor_scenario,
    generate_state,
    run_experiment,
    stadium_scenario,
)
from .bench import BenchReport, bench_recall

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AdmissionThreshold",
    "BenchReport",
    "CellConfig",
    "ContextEncoder",
    "CortexClient",
    "CortexServer",
    "EncoderConfig",
    "EpisodeRecord",
    "EventConfig",
    "ExperimentReport",
    "HandoverDirective",
    "HnswIndex",
    "HnswParams",
    "InvalidSnapshotError",
    "MemoryConfig",
    "MemoryStore",
    "Neighbor",
    "NoOp",
    "Outcome",
    "PolicyConfig",
    "RanStateSnapshot",
    "RecallEngine",
    "RecallQuery",
    "RecallResponse",
    "RecordFilter",
    "ScenarioConfig",
    "ServiceConfig",
    "StoreVersionError",
    "World",
    "apply_action",
    "augmented_admission",
    "augmented_handover",
    "bench_recall",
    "corridor_scenario",
    "cosine_similarity",
    "decide_augmented",
    "decide_stateless",
    "feature_vector",
    "generate_state",
    "ingest_file",
    "is_salient",
    "record_episode",
    "run_experiment",
    "stadium_scenario",
    "stateless_admission",
    "stateless_handover",
    "validate_snapshot",
]
