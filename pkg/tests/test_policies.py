import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ran_cortex.memory import MemoryConfig, MemoryStore, Neighbor
from ran_cortex.model import (
    AdmissionThreshold,
    HandoverDirective,
    NoOp,
    Outcome,
)
from ran_cortex.policies import (
    PolicyConfig,
    augmented_admission,
    augmented_handover,
    decide_augmented,
    decide_stateless,
    record_episode,
    stateless_admission,
    stateless_handover,
)
from ran_cortex.recall import RecallEngine, RecallQuery, RecallResponse

from conftest import make_snapshot

CFG = PolicyConfig()
QUALITY = {"n1": 1.0, "n2": 0.8, "n3": 0.6}


def neighbor(sim, *, sla=False, ho=None, target=None, ts=5_000_000, rid=0):
    action = (
        HandoverDirective(target_cell=target) if target is not None else NoOp()
    )
    return Neighbor(
        record_id=rid,
        similarity=sim,
        action=action,
        outcome=Outcome(
            achieved_throughput_mbps=100.0,
            drop_rate=0.0,
            sla_violated=sla,
            handover_success=ho,
        ),
        timestamp_ms=ts,
    )


def ok(neighbors):
    return RecallResponse(status="ok", neighbors=tuple(neighbors), latency_us=10)


# --- admission ---------------------------------------------------------------


def test_stateless_admission_is_constant_rule():
    low = make_snapshot(prb_utilization=0.2)
    high = make_snapshot(prb_utilization=0.99)
    assert stateless_admission(low, CFG) == AdmissionThreshold(0.85)
    assert stateless_admission(high, CFG) == AdmissionThreshold(0.85)
    assert stateless_admission(low, CFG) == stateless_admission(low, CFG)


@pytest.mark.parametrize(
    "response",
    [
        RecallResponse(status="timeout"),
        RecallResponse(status="error", error_detail="x"),
        RecallResponse(status="ok", neighbors=()),
        None,
    ],
)
def test_augmented_admission_fallback(response):
    snap = make_snapshot()
    assert augmented_admission(snap, response, CFG) == stateless_admission(snap, CFG)


def test_augmented_admission_quorum_tightens():
    # 5 neighbors, 3 gated violations >= quorum 2 -> 0.85 - 0.10 = 0.75
    snap = make_snapshot()
    neighbors = [
        neighbor(0.95, sla=True, rid=1),
        neighbor(0.90, sla=True, rid=2),
        neighbor(0.85, sla=True, rid=3),
        neighbor(0.84, sla=False, rid=4),
        neighbor(0.20, sla=True, rid=5),  # below the gate, ignored
    ]
    action = augmented_admission(snap, ok(neighbors), CFG)
    assert isinstance(action, AdmissionThreshold)
    assert action.load_threshold == pytest.approx(0.75)


def test_augmented_admission_below_gate_ignored():
    snap = make_snapshot()
    neighbors = [neighbor(0.5, sla=True, rid=i) for i in range(5)]
    assert augmented_admission(snap, ok(neighbors), CFG) == stateless_admission(snap, CFG)


def test_augmented_admission_below_quorum():
    snap = make_snapshot()
    neighbors = [neighbor(0.9, sla=True, rid=1)] + [
        neighbor(0.9, sla=False, rid=i) for i in range(2, 6)
    ]
    assert augmented_admission(snap, ok(neighbors), CFG) == stateless_admission(snap, CFG)


# --- handover ---------------------------------------------------------------


def eligible_snapshot(**overrides):
    return make_snapshot(
        rsrp_dbm=-110.0, neighbor_cells=("n1", "n2", "n3"), **overrides
    )


def test_stateless_handover_noop_above_trigger():
    snap = make_snapshot(rsrp_dbm=-90.0, neighbor_cells=("n1",))
    assert stateless_handover(snap, CFG, QUALITY) == NoOp()


def test_stateless_handover_single_neighbor():
    snap = make_snapshot(rsrp_dbm=-120.0, neighbor_cells=("n2",))
    assert stateless_handover(snap, CFG, QUALITY) == HandoverDirective(target_cell="n2")


def test_stateless_handover_argmax_of_quality_table():
    snap = eligible_snapshot()
    assert stateless_handover(snap, CFG, QUALITY) == HandoverDirective(target_cell="n1")
    flipped = {"n1": 0.2, "n2": 0.9, "n3": 0.6}
    assert stateless_handover(snap, CFG, flipped) == HandoverDirective(target_cell="n2")


def test_augmented_handover_fallback():
    snap = eligible_snapshot()
    for response in (RecallResponse(status="timeout"), ok([])):
        assert augmented_handover(snap, response, CFG, QUALITY) == stateless_handover(
            snap, CFG, QUALITY
        )


def test_augmented_handover_blacklists_after_quorum():
    # two similar failures on n1 within the window -> n1 out, n2 chosen
    snap = eligible_snapshot()
    neighbors = [
        neighbor(0.95, ho=False, target="n1", rid=1),
        neighbor(0.92, ho=False, target="n1", rid=2),
        neighbor(0.91, ho=True, target="n2", rid=3),
    ]
    action = augmented_handover(snap, ok(neighbors), CFG, QUALITY)
    assert action == HandoverDirective(target_cell="n2", blacklist=frozenset({"n1"}))


def test_augmented_handover_window_excludes_stale_failures():
    snap = eligible_snapshot()
    stale = snap.timestamp_ms - CFG.blacklist_window_ms - 1
    neighbors = [
        neighbor(0.95, ho=False, target="n1", ts=stale, rid=1),
        neighbor(0.92, ho=False, target="n1", ts=stale, rid=2),
    ]
    action = augmented_handover(snap, ok(neighbors), CFG, QUALITY)
    assert action == HandoverDirective(target_cell="n1")


def test_augmented_handover_single_failure_below_quorum():
    snap = eligible_snapshot()
    neighbors = [neighbor(0.95, ho=False, target="n1", rid=1)]
    assert augmented_handover(snap, ok(neighbors), CFG, QUALITY) == HandoverDirective(
        target_cell="n1"
    )


def test_augmented_handover_all_blacklisted_falls_back():
    snap = eligible_snapshot()
    neighbors = []
    rid = 0
    for cell in ("n1", "n2", "n3"):
        for _ in range(2):
            rid += 1
            neighbors.append(neighbor(0.95, ho=False, target=cell, rid=rid))
    action = augmented_handover(snap, ok(neighbors), CFG, QUALITY)
    assert action == stateless_handover(snap, CFG, QUALITY)


def test_blacklist_soundness_only_quorum_cells():
    snap = eligible_snapshot()
    neighbors = [
        neighbor(0.95, ho=False, target="n1", rid=1),
        neighbor(0.94, ho=False, target="n1", rid=2),
        neighbor(0.93, ho=False, target="n2", rid=3),  # single failure, stays
    ]
    action = augmented_handover(snap, ok(neighbors), CFG, QUALITY)
    assert isinstance(action, HandoverDirective)
    assert action.blacklist == frozenset({"n1"})


# --- combined + recording -------------------------------------------------------


def test_decide_routes_by_eligibility():
    assert isinstance(
        decide_stateless(eligible_snapshot(), CFG, QUALITY), HandoverDirective
    )
    assert isinstance(
        decide_stateless(make_snapshot(rsrp_dbm=-80.0), CFG, QUALITY),
        AdmissionThreshold,
    )


def test_record_episode_salience_and_self_retrieval(encoder):
    store = MemoryStore(MemoryConfig(), encoder_tag=encoder.version_tag)
    snap = make_snapshot()
    outcome = Outcome(
        achieved_throughput_mbps=10.0, drop_rate=0.0, sla_violated=True
    )
    rid = record_episode(snap, NoOp(), outcome, store, "ns", encoder)
    record = store.get("ns", rid)
    assert record.salient is True
    engine = RecallEngine(store, encoder)
    response = engine.recall(
        RecallQuery(namespace="ns", snapshot=snap, k=1, deadline_ms=1000.0)
    )
    assert response.neighbors[0].record_id == rid
    assert response.neighbors[0].similarity == pytest.approx(1.0, abs=1e-6)


def test_record_episode_capacity_bound(encoder):
    store = MemoryStore(MemoryConfig(capacity=10), encoder_tag=encoder.version_tag)
    outcome = Outcome(achieved_throughput_mbps=1.0, drop_rate=0.0, sla_violated=False)
    for i in range(25):
        record_episode(
            make_snapshot(timestamp_ms=i * 1000), NoOp(), outcome, store, "ns", encoder
        )
    assert store.size("ns") == 10


# --- properties ---------------------------------------------------------------------

neighbor_strategy = st.builds(
    neighbor,
    st.floats(min_value=-1.0, max_value=1.0),
    sla=st.booleans(),
    ho=st.sampled_from([None, True, False]),
    target=st.sampled_from([None, "n1", "n2", "n3"]),
    ts=st.integers(min_value=0, max_value=10_000_000),
    rid=st.integers(min_value=0, max_value=100),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(neighbor_strategy, max_size=8), st.sampled_from(["timeout", "error"]))
def test_fallback_equivalence_property(neighbors, status):
    snap = eligible_snapshot()
    unusable = RecallResponse(status=status, neighbors=())
    assert augmented_admission(snap, unusable, CFG) == stateless_admission(snap, CFG)
    assert augmented_handover(snap, unusable, CFG, QUALITY) == stateless_handover(
        snap, CFG, QUALITY
    )
    assert decide_augmented(snap, unusable, CFG, QUALITY) == decide_stateless(
        snap, CFG, QUALITY
    )


@settings(max_examples=200, deadline=None)
@given(
    st.lists(neighbor_strategy, max_size=8),
    st.floats(min_value=0.05, max_value=0.9),
    st.floats(min_value=0.05, max_value=0.9),
)
def test_monotone_gating_property(neighbors, gate_a, gate_b):
    """Raising the similarity gate never turns a stateless action into a
    memory-modified one."""
    lo, hi = sorted((gate_a, gate_b))
    snap = make_snapshot()
    cfg_lo = PolicyConfig(similarity_gate=lo)
    cfg_hi = PolicyConfig(similarity_gate=hi)
    recall = ok(neighbors)
    stateless = stateless_admission(snap, cfg_lo, )
    if augmented_admission(snap, recall, cfg_lo) == stateless:
        assert augmented_admission(snap, recall, cfg_hi) == stateless


@settings(max_examples=100, deadline=None)
@given(st.lists(neighbor_strategy, max_size=10))
def test_blacklist_soundness_property(neighbors):
    snap = eligible_snapshot()
    action = augmented_handover(snap, ok(neighbors), CFG, QUALITY)
    if not isinstance(action, HandoverDirective):
        return
    for cell in action.blacklist:
        qualifying = [
            n
            for n in neighbors
            if n.similarity >= CFG.similarity_gate
            and isinstance(n.action, HandoverDirective)
            and n.action.target_cell == cell
            and n.outcome.handover_success is False
            and abs(n.timestamp_ms - snap.timestamp_ms) <= CFG.blacklist_window_ms
        ]
        assert len(qualifying) >= CFG.failure_quorum
