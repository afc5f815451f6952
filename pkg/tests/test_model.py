import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ran_cortex.model import (
    AdmissionThreshold,
    EpisodeRecord,
    HandoverDirective,
    NoOp,
    Outcome,
    RanStateSnapshot,
    action_from_dict,
    action_to_dict,
    is_salient,
    validate_snapshot,
)

from conftest import make_snapshot


def test_valid_snapshot_passes():
    assert validate_snapshot(make_snapshot(prb_utilization=0.5)) == []


def test_cqi_out_of_range():
    violations = validate_snapshot(make_snapshot(cqi=16))
    assert violations == ["cqi out of range"]


def test_traffic_mix_sum_violation():
    violations = validate_snapshot(make_snapshot(traffic_mix=(0.5, 0.5, 0.5, 0.0)))
    assert "traffic_mix sum != 1" in violations


def test_handover_failures_bounded_by_attempts():
    violations = validate_snapshot(
        make_snapshot(handover_attempts=2, handover_failures=3)
    )
    assert "handover_failures exceeds handover_attempts" in violations


def test_rsrp_and_sinr_clamp_ranges():
    assert validate_snapshot(make_snapshot(rsrp_dbm=-150.0))
    assert validate_snapshot(make_snapshot(rsrp_dbm=-30.0))
    assert validate_snapshot(make_snapshot(sinr_db=45.0))
    assert validate_snapshot(make_snapshot(rsrp_dbm=-140.0, sinr_db=-10.0)) == []


def test_blacklist_must_not_contain_target():
    with pytest.raises(ValueError):
        HandoverDirective(target_cell="a", blacklist=frozenset({"a", "b"}))


def test_load_threshold_range():
    with pytest.raises(ValueError):
        AdmissionThreshold(load_threshold=1.2)


def test_action_round_trip():
    actions = [
        AdmissionThreshold(load_threshold=0.75),
        HandoverDirective(target_cell="c1", blacklist=frozenset({"c2", "c3"})),
        NoOp(),
    ]
    for action in actions:
        encoded = json.dumps(action_to_dict(action))
        assert action_from_dict(json.loads(encoded)) == action


def test_snapshot_round_trip_bit_identical():
    snap = make_snapshot(rsrp_dbm=-95.123456789012345, prb_utilization=1 / 3)
    wire = json.dumps(snap.to_dict())
    assert RanStateSnapshot.from_dict(json.loads(wire)) == snap


def test_outcome_round_trip_and_salience():
    bad = Outcome(
        achieved_throughput_mbps=812.25, drop_rate=0.125, sla_violated=True
    )
    assert Outcome.from_dict(json.loads(json.dumps(bad.to_dict()))) == bad
    assert is_salient(bad)
    assert is_salient(
        Outcome(achieved_throughput_mbps=1.0, drop_rate=0.0, sla_violated=False,
                handover_success=False)
    )
    assert not is_salient(
        Outcome(achieved_throughput_mbps=1.0, drop_rate=0.0, sla_violated=False,
                handover_success=True)
    )


def test_episode_record_round_trip():
    record = EpisodeRecord(
        id=42,
        embedding=np.array([0.6, 0.8, 0.0]),
        action=HandoverDirective(target_cell="x"),
        outcome=Outcome(
            achieved_throughput_mbps=5.5, drop_rate=0.0, sla_violated=False,
            handover_success=True,
        ),
        timestamp_ms=123,
        namespace="ns",
        salient=False,
    )
    restored = EpisodeRecord.from_dict(json.loads(json.dumps(record.to_dict())))
    assert restored.id == record.id
    assert np.array_equal(restored.embedding, record.embedding)
    assert restored.action == record.action
    assert restored.outcome == record.outcome
    assert restored.salient == record.salient


# property: validate_snapshot accepts exactly the invariant-satisfying set


@st.composite
def snapshots(draw, valid: bool):
    attempts = draw(st.integers(0, 50))
    mix3 = draw(
        st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    )
    total = sum(mix3) or 1.0
    scale = draw(st.floats(0.2, 0.95))
    mix3 = tuple(v / total * scale for v in mix3)
    mix = mix3 + (1.0 - sum(mix3),)
    snap = make_snapshot(
        rsrp_dbm=draw(st.floats(-140, -40)),
        sinr_db=draw(st.floats(-10, 40)),
        cqi=draw(st.integers(0, 15)),
        prb_utilization=draw(st.floats(0, 1)),
        active_users=draw(st.integers(0, 10_000)),
        handover_attempts=attempts,
        handover_failures=draw(st.integers(0, attempts)),
        traffic_mix=mix,
    )
    if valid:
        return snap
    breakage = draw(st.sampled_from(["cqi", "prb", "rsrp", "failures", "mix"]))
    if breakage == "cqi":
        return make_snapshot(cqi=draw(st.sampled_from([-1, 16, 99])))
    if breakage == "prb":
        return make_snapshot(prb_utilization=draw(st.sampled_from([-0.1, 1.5])))
    if breakage == "rsrp":
        return make_snapshot(rsrp_dbm=draw(st.sampled_from([-141.0, -39.0, 0.0])))
    if breakage == "failures":
        return make_snapshot(handover_attempts=1, handover_failures=2)
    return make_snapshot(traffic_mix=(0.5, 0.5, 0.5, 0.5))


@settings(max_examples=200, deadline=None)
@given(snapshots(valid=True))
def test_generated_valid_snapshots_accepted(snap):
    assert validate_snapshot(snap) == []


@settings(max_examples=100, deadline=None)
@given(snapshots(valid=False))
def test_generated_invalid_snapshots_rejected(snap):
    assert validate_snapshot(snap) != []
