"""Smoke tests for the Python bindings."""

import math
import os

import pytest

import rplmesh


def test_path_delivery_reference_points():
    assert rplmesh.path_delivery([0.5], 1) == 0.75
    assert rplmesh.path_delivery([0.5, 0.5], 1) == 0.5625
    assert rplmesh.path_delivery_down([0.3, 0.9], 0) == pytest.approx(0.27)
    assert rplmesh.hop_success(0.5, 8) == pytest.approx(1 - 0.5**9)


def test_lr_rank_matches_complement_of_delivery():
    lr = 0.0
    prrs = [0.6, 0.8, 0.7]
    for prr in prrs:
        lr = rplmesh.rank_lr(lr, prr, 8)
    assert lr == pytest.approx(1 - rplmesh.path_delivery(prrs, 8), abs=1e-12)


def test_rank_etxn_squares_link_cost():
    assert rplmesh.rank_etxn(1.0, 0.5, 2.0) == 5.0
    assert math.isinf(rplmesh.rank_etxn(1.0, 0.0, 2.0))


def test_rule_of_three():
    assert rplmesh.rule_of_three(500000, 0) == 6e-6
    assert rplmesh.rule_of_three(1000, 2) == 2e-3
    with pytest.raises(ValueError):
        rplmesh.rule_of_three(0, 0)


def test_rssi_seeding():
    assert rplmesh.etx_from_rssi(-60) == 1.0
    assert rplmesh.etx_from_rssi(-90) == 4.0


def test_header_size_bounds():
    addrs = rplmesh.make_addresses(8, False)
    assert rplmesh.header_size([1, 2, 3], addrs, 0) == 12
    hetero = rplmesh.make_addresses(8, True, seed=3)
    assert rplmesh.header_size([], hetero, 0) == 0


def test_synthetic_topology_determinism():
    params = rplmesh.SynthParams()
    params.asymmetry_sigma = 0.15
    a = rplmesh.generate_synthetic(20, 1, params)
    b = rplmesh.generate_synthetic(20, 1, params)
    assert a.node_count == 20
    assert a.root == 0
    for nb in a.neighbors_out(0):
        assert a.prr_at(0, nb, 0) == b.prr_at(0, nb, 0)


def test_trace_round_trip(tmp_path):
    fixtures = os.environ.get("RPLMESH_FIXTURES_DIR")
    if not fixtures:
        pytest.skip("fixture dir not exported")
    topo = rplmesh.load_trace(os.path.join(fixtures, "two_window.trace"))
    assert topo.prr_at(0, 1, 0) == 0.8
    assert topo.prr_at(0, 1, 60000) == 0.2
    out = tmp_path / "roundtrip.trace"
    rplmesh.save_trace(topo, str(out))
    again = rplmesh.load_trace(str(out))
    assert again.prr_at(0, 1, 0) == 0.8
    assert again.prr_at(0, 1, 60000) == 0.2


CONFIG = """
node_count = 12
asymmetry_sigma = 0.1
rate_hz = 4
duration_s = 90
warmup_s = 30
seed = 4
"""


def test_full_run_conserves_packets():
    report = rplmesh.run(CONFIG)
    totals = report["totals"]
    assert totals["packets_sent"] > 0
    assert totals["packets_sent"] == totals["delivered"] + totals["lost"]
    assert set(report["causes"]) == {
        "mac_drop",
        "route_not_found",
        "spurious_duplicate",
        "queue_overflow",
    }


def test_full_run_is_deterministic():
    assert rplmesh.run(CONFIG) == rplmesh.run(CONFIG)
    assert rplmesh.run(CONFIG, seed=99) != rplmesh.run(CONFIG)


def test_replay_study_orders_metrics():
    params = rplmesh.SynthParams()
    params.asymmetry_sigma = 0.15
    topo = rplmesh.generate_synthetic(50, 1, params)
    rows = rplmesh.replay_study(topo, "etx,etxn:2,lr", retries=8)
    by_name = {row["metric"]: row for row in rows}
    assert by_name["etxn:2"]["min_up_prr"] >= by_name["etx"]["min_up_prr"]
    assert by_name["lr"]["median_up_pdr"] >= by_name["etx"]["median_up_pdr"]
