import dataclasses
import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vecrm.config import ExperimentConfig, ScenarioConfig, preset
from vecrm.exceptions import ConfigError, GeometryError, NoUpcomingRSUError
from vecrm.scenario import (
    Task, Vehicle, build_scenario, chain_star_hops, gap_distance_to_next_rsu, hop_count, lane_direction,
    position_at, residual_coverage_distance, serving_node,
)


def vehicle(x0, direction=1, speed=25.0, lane=None):
    lane = lane if lane is not None else (1 if direction > 0 else 4)
    return Vehicle(0, lane, float(x0), direction, speed, 20.0, Task(0, 200.0, 1.0))


def place(sc, x0, direction=1, speed=25.0):
    """Copy of ``sc`` whose vehicle 0 sits at ``x0`` (cache dropped)."""
    v = dataclasses.replace(sc.vehicles[0], initial_axial_position=float(x0), direction=direction, speed=speed)
    return dataclasses.replace(sc, vehicles=[v] + sc.vehicles[1:], _cache={}), v


def bfs_hops(n_rsus):
    """Hop counts by breadth-first search over the chain edges plus BS spokes;
    the BS only terminates traffic, it never forwards RSU-to-RSU traffic."""
    m = n_rsus + 1
    bs = n_rsus
    adj = {k: set() for k in range(m)}
    for k in range(n_rsus - 1):
        adj[k].add(k + 1)
        adj[k + 1].add(k)
    out = np.zeros((m, m), dtype=int)
    for src in range(m):
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        for dst in range(m):
            out[src, dst] = dist.get(dst, 0 if dst == src else 1 if bs in (src, dst) else -1)
    return out


# -- build ---------------------------------------------------------------

def test_scenario1_shape():
    sc = build_scenario(preset("scenario1"), 3)
    assert sc.n_nodes == 3 and sc.n_vehicles == 10
    assert [q.kind for q in sc.nodes] == ["RSU", "RSU", "BS"]


def test_scenario2_shape():
    sc = build_scenario(preset("scenario2"), 3)
    assert sc.n_nodes == 11 and sc.n_vehicles == 100


def test_same_seed_same_scenario():
    a = build_scenario(preset("scenario1"), 42)
    b = build_scenario(preset("scenario1"), 42)
    assert a.to_dict() == b.to_dict()
    assert build_scenario(preset("scenario1"), 43).to_dict() != a.to_dict()


def test_layout():
    sc = build_scenario(ScenarioConfig(n_rsus=4, inter_rsu_distance=3000.0), 0)
    rsu_x = [q.axial_position for q in sc.nodes if q.is_rsu]
    assert np.allclose(np.diff(rsu_x), 3000.0)
    assert sc.nodes[-1].axial_position == pytest.approx(sc.highway_length / 2)
    assert sc.highway_length == 12000.0


def test_capacity_sampled_in_range():
    sc = build_scenario(preset("scenario2"), 1)
    F = sc.allocated_capacity
    assert F.shape == (11, 100)
    assert F.min() >= 1.0 and F.max() <= 3.0
    caps = np.array([q.capacity_ghz for q in sc.nodes])
    assert (F <= caps[:, None]).all()


def test_vehicle_invariants(large_scenario):
    for v in large_scenario.vehicles:
        assert 1 <= v.lane <= 6
        assert v.speed > 0
        assert v.direction == (1 if v.lane <= 3 else -1)
        assert v.task.owner == v.id and v.task.size_mb > 0 and v.task.cycles > 0


@pytest.mark.parametrize("change", [
    {"task_cycles": [2.0, 1.0]},
    {"capacity_range": [3.0, 1.0]},
    {"n_vehicles": 0},
    {"n_rsus": 0},
    {"inter_rsu_distance": 0.0},
])
def test_invalid_config_rejected(change):
    cfg = ScenarioConfig(**change)
    with pytest.raises(ConfigError):
        build_scenario(cfg, 0)


# -- kinematics -------------------------------------------------------------

def test_position_examples():
    assert position_at(vehicle(0.0), 0.0) == 0.0
    assert position_at(vehicle(0.0), 10.0) == 250.0
    assert position_at(vehicle(1000.0, -1), 40.0) == 0.0


def test_position_frozen_at_boundary(small_scenario):
    v = vehicle(5900.0)
    assert small_scenario.position_at(v, 100.0) == small_scenario.highway_length
    assert small_scenario.position_at(vehicle(100.0, -1), 100.0) == 0.0


def test_negative_time_rejected():
    with pytest.raises(GeometryError):
        position_at(vehicle(0.0), -1.0)


# -- coverage ---------------------------------------------------------------

def test_serving_examples(small_scenario):
    sc, v = place(small_scenario, 1500.0)
    assert serving_node(sc, v, 0.0) == 0
    sc, v = place(small_scenario, 3000.0)
    assert serving_node(sc, v, 0.0) == sc.bs_id
    sc, v = place(small_scenario, 2000.0)
    assert serving_node(sc, v, 0.0) == 0


def test_serving_matches_grid_scan():
    """Brute-force membership scan on a fine grid, overlapping coverage included."""
    sc = build_scenario(ScenarioConfig(n_rsus=3, inter_rsu_distance=800.0, coverage_radius=500.0), 0)
    rsu_x = [q.axial_position for q in sc.nodes if q.is_rsu]
    for x in np.linspace(0.0, sc.highway_length, 2401):
        covering = [(abs(x - c), k) for k, c in enumerate(rsu_x) if abs(x - c) <= 500.0]
        expected = min(covering)[1] if covering else sc.bs_id
        s, v = place(sc, x)
        assert serving_node(s, v, 0.0) == expected
        assert s.serving_nodes(0.0)[0] == expected


@given(x=st.floats(0.0, 6000.0), t=st.floats(0.0, 500.0))
@settings(max_examples=200, deadline=None)
def test_exactly_one_serving_node(small_scenario, x, t):
    sc, v = place(small_scenario, x)
    s = serving_node(sc, v, t)
    assert 0 <= s < sc.n_nodes
    assert s == sc.serving_nodes(t)[0]


def test_residual_examples(small_scenario):
    sc, v = place(small_scenario, 1500.0)
    assert residual_coverage_distance(sc, v, 0.0) == 500.0
    sc, v = place(small_scenario, 1000.0)
    assert residual_coverage_distance(sc, v, 0.0) == 1000.0
    sc, v = place(small_scenario, 2000.0)
    assert residual_coverage_distance(sc, v, 0.0) == 0.0
    sc, v = place(small_scenario, 2000.0, direction=-1)
    assert residual_coverage_distance(sc, v, 0.0) == 1000.0


def test_residual_outside_coverage_errors(small_scenario):
    sc, v = place(small_scenario, 3000.0)
    with pytest.raises(GeometryError):
        residual_coverage_distance(sc, v, 0.0)
    with pytest.raises(GeometryError):
        residual_coverage_distance(sc, v, 0.0, node=0)


@given(x=st.floats(1000.0, 2000.0), dt=st.floats(0.0, 40.0), speed=st.floats(5.0, 40.0))
@settings(max_examples=200, deadline=None)
def test_residual_decreases_linearly(small_scenario, x, dt, speed):
    sc, v = place(small_scenario, x, speed=speed)
    if x + speed * dt > 2000.0:
        return
    before = residual_coverage_distance(sc, v, 0.0, node=0)
    after = residual_coverage_distance(sc, v, dt, node=0)
    assert before - after == pytest.approx(speed * dt, abs=1e-6)
    assert 0.0 <= after <= 1000.0


def test_gap_examples(small_scenario):
    sc, v = place(small_scenario, 3200.0)
    assert gap_distance_to_next_rsu(sc, v, 0.0) == (800.0, 1)
    sc, v = place(small_scenario, 4000.0)
    assert gap_distance_to_next_rsu(sc, v, 0.0) == (0.0, 1)


def test_gap_picks_nearest():
    sc = build_scenario(ScenarioConfig(n_rsus=4), 0)  # RSUs at 1500, 4500, 7500, 10500
    s, v = place(sc, 3200.0)
    d, r = gap_distance_to_next_rsu(s, v, 0.0)
    entries = [(q.axial_position - 500.0 - 3200.0, q.id) for q in sc.nodes if q.is_rsu]
    expected = min(e for e in entries if e[0] >= 0)
    assert (d, r) == expected == (800.0, 1)


def test_no_rsu_ahead(small_scenario):
    sc, v = place(small_scenario, 5500.0)
    with pytest.raises(NoUpcomingRSUError):
        gap_distance_to_next_rsu(sc, v, 0.0)
    sc, v = place(small_scenario, 500.0, direction=-1)
    with pytest.raises(NoUpcomingRSUError):
        gap_distance_to_next_rsu(sc, v, 0.0)


# -- backhaul ---------------------------------------------------------------

def test_hop_examples():
    sc = build_scenario(ScenarioConfig(n_rsus=10, n_vehicles=5), 0)
    bh = sc.backhaul
    assert hop_count(bh, 2, 2) == 0
    assert hop_count(bh, 3, 4) == 1
    assert hop_count(bh, 0, 3) == 3
    assert hop_count(bh, sc.bs_id, 6) == 1


@pytest.mark.parametrize("n_rsus", [1, 2, 5, 10])
def test_hops_match_bfs(n_rsus):
    assert (chain_star_hops(n_rsus) == bfs_hops(n_rsus)).all()


@pytest.mark.parametrize("n_rsus", [1, 3, 10])
def test_hops_symmetric_and_triangle(n_rsus):
    h = chain_star_hops(n_rsus)
    assert (h == h.T).all() and (np.diag(h) == 0).all()
    rsus = range(n_rsus)
    # triangle inequality along the chain (the BS does not forward)
    for a, b, c in itertools.product(rsus, repeat=3):
        assert h[a, c] <= h[a, b] + h[b, c]


def test_lane_direction():
    assert [lane_direction(k) for k in range(1, 7)] == [1, 1, 1, -1, -1, -1]


def test_accepts_experiment_config():
    cfg = ExperimentConfig()
    assert build_scenario(cfg, 5).to_dict() == build_scenario(cfg.scenario, 5).to_dict()
