import json
import pathlib

import numpy as np
import pytest

from ran_cortex.encoder import ContextEncoder, EncoderConfig
from ran_cortex.memory import MemoryConfig, MemoryStore
from ran_cortex.model import NoOp, Outcome, RanStateSnapshot

DATA_DIR = pathlib.Path(__file__).parent / "data"

NEUTRAL_OUTCOME = Outcome(
    achieved_throughput_mbps=0.0, drop_rate=0.0, sla_violated=False
)


def make_snapshot(**overrides) -> RanStateSnapshot:
    base = dict(
        cell_id="cell-007",
        timestamp_ms=5_400_000,
        rsrp_dbm=-95.5,
        sinr_db=12.25,
        cqi=11,
        prb_utilization=0.62,
        active_users=340,
        handover_attempts=6,
        handover_failures=2,
        traffic_mix=(0.45, 0.15, 0.25, 0.15),
        neighbor_cells=("cell-003", "cell-011", "cell-042"),
    )
    base.update(overrides)
    return RanStateSnapshot(**base)


def random_valid_snapshot(rng: np.random.Generator, **overrides) -> RanStateSnapshot:
    mix = rng.dirichlet(np.ones(4))
    mix = tuple(float(v) for v in mix[:3]) + (0.0,)
    mix = mix[:3] + (1.0 - sum(mix[:3]),)
    fields = dict(
        cell_id=f"cell-{rng.integers(0, 999):03d}",
        timestamp_ms=int(rng.integers(0, 86_400_000)),
        rsrp_dbm=float(rng.uniform(-140, -40)),
        sinr_db=float(rng.uniform(-10, 40)),
        cqi=int(rng.integers(0, 16)),
        prb_utilization=float(rng.uniform(0, 1)),
        active_users=int(rng.integers(0, 2000)),
        handover_attempts=int(rng.integers(0, 20)),
        traffic_mix=mix,
        neighbor_cells=tuple(
            f"cell-{rng.integers(0, 999):03d}" for _ in range(rng.integers(0, 6))
        ),
    )
    fields["handover_failures"] = int(rng.integers(0, fields["handover_attempts"] + 1))
    fields.update(overrides)
    return RanStateSnapshot(**fields)


@pytest.fixture(scope="session")
def encoder() -> ContextEncoder:
    return ContextEncoder(EncoderConfig())


@pytest.fixture(scope="session")
def reference_fixture() -> dict:
    with open(DATA_DIR / "reference_embedding.json") as f:
        return json.load(f)


@pytest.fixture()
def store(encoder) -> MemoryStore:
    return MemoryStore(MemoryConfig(), encoder_tag=encoder.version_tag)


def insert_vector(store: MemoryStore, namespace: str, vec, timestamp_ms=0,
                  action=None, outcome=None, salient=None):
    return store.insert(
        namespace,
        np.asarray(vec, dtype=np.float64),
        action if action is not None else NoOp(),
        outcome if outcome is not None else NEUTRAL_OUTCOME,
        timestamp_ms,
        salient=salient,
    )
