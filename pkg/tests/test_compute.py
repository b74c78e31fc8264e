import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import vecrm.compute as compute
from vecrm.compute import (
    INFINITE_DELAY, CostBreakdown, DelayBreakdown, cost_breakdown, delay_breakdown, is_infinite,
    placement_tables,
)

from conftest import tiny_scenario
from oracles import cost_terms, delay_terms, random_scenario, serving


@pytest.fixture
def fixed_rate(monkeypatch):
    monkeypatch.setattr(compute, "data_rate", lambda *args: 10.0)


def _with_capacity(sc, value):
    sc.allocated_capacity = np.full_like(sc.allocated_capacity, value)
    return sc


def test_local_delay_example(fixed_rate):
    sc = _with_capacity(tiny_scenario(n_vehicles=1), 2.0)
    task = sc.vehicles[0].task
    task = type(task)(0, 200.0, 1.0)
    d = delay_breakdown(sc, task, 0, 0, 0.0)
    assert (d.upload, d.migration, d.processing) == (160.0, 0.0, 0.5)
    assert d.total == 160.5


def test_migration_delay_example(fixed_rate):
    sc = tiny_scenario(n_rsus=3, n_vehicles=1)
    task = type(sc.vehicles[0].task)(0, 200.0, 1.0)
    d = delay_breakdown(sc, task, 0, 2, 0.0)
    assert d.migration == pytest.approx(16.08, rel=1e-15)


def test_zero_size_task(fixed_rate):
    sc = tiny_scenario(n_rsus=3, n_vehicles=1)
    task = type(sc.vehicles[0].task)(0, 0.0, 1.0)
    d = delay_breakdown(sc, task, 0, 2, 0.0)
    assert d.upload == 0.0
    assert d.migration == pytest.approx(2 * 0.02 * 2)


def test_zero_rate_is_infinite(monkeypatch):
    monkeypatch.setattr(compute, "data_rate", lambda *args: 0.0)
    sc = tiny_scenario(n_vehicles=1)
    assert delay_breakdown(sc, sc.vehicles[0].task, 0, 0, 0.0) is INFINITE_DELAY


def test_zero_capacity_is_infinite():
    sc = _with_capacity(tiny_scenario(n_vehicles=1), 0.0)
    assert is_infinite(delay_breakdown(sc, sc.vehicles[0].task, 0, 1, 0.0))


def test_infinite_marker_is_singleton_and_picklable():
    import pickle
    assert pickle.loads(pickle.dumps(INFINITE_DELAY)) is INFINITE_DELAY


def test_local_cost_example():
    sc = _with_capacity(tiny_scenario(n_vehicles=1), 2.0)
    c = cost_breakdown(sc, sc.vehicles[0].task, 0, 0)
    assert (c.upload, c.migration, c.processing, c.total) == (2.0, 0.0, 20.0, 22.0)


def test_migration_cost_example():
    sc = tiny_scenario(n_vehicles=1)
    assert cost_breakdown(sc, sc.vehicles[0].task, 0, 1).migration == pytest.approx(1.0)


def test_zero_prices():
    from vecrm.config import ScenarioConfig
    from vecrm.scenario import build_scenario
    cfg = ScenarioConfig(n_vehicles=2)
    for p in (cfg.rsu, cfg.bs):
        p.upload_price = p.compute_price = 0.0
    cfg.backhaul.migration_price = 0.0
    sc = build_scenario(cfg, 0)
    for r in range(3):
        for k in range(3):
            assert cost_breakdown(sc, sc.vehicles[0].task, r, k) == CostBreakdown(0.0, 0.0, 0.0)


def test_breakdowns_sum():
    assert DelayBreakdown(1.0, 2.0, 3.5).total == 6.5
    assert CostBreakdown(1.0, 0.0, 3.0).total == 4.0


def test_local_vs_migration_exclusive(large_scenario):
    sc = large_scenario
    for i in range(0, 100, 9):
        r = serving(sc, sc.vehicles[i], 0.0)
        for k in range(sc.n_nodes):
            d = delay_breakdown(sc, sc.vehicles[i].task, r, k, 0.0)
            c = cost_breakdown(sc, sc.vehicles[i].task, r, k)
            if k == r:
                assert d.migration == 0.0 and c.migration == 0.0
            else:
                assert d.migration > 0.0


def test_oracle_agreement():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        sc = random_scenario(rng)
        i = int(rng.integers(sc.n_vehicles))
        t = float(rng.uniform(0.0, 300.0))
        r = serving(sc, sc.vehicles[i], t)
        k = int(rng.integers(sc.n_nodes))
        d = delay_breakdown(sc, sc.vehicles[i].task, r, k, t)
        c = cost_breakdown(sc, sc.vehicles[i].task, r, k)
        for got, want in zip((d.upload, d.migration, d.processing, c.upload, c.migration, c.processing),
                             delay_terms(sc, i, r, k, t) + cost_terms(sc, i, r, k)):
            assert got == pytest.approx(want, rel=1e-12, abs=0.0)
        checked += 1


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("t", [0.0, 37.0])
def test_tables_match_scalar_path(seed, t):
    sc = random_scenario(np.random.default_rng(seed))
    tab = placement_tables(sc, t)
    for i in range(sc.n_vehicles):
        r = int(tab.serving[i])
        assert r == serving(sc, sc.vehicles[i], t)
        for k in range(sc.n_nodes):
            d = delay_breakdown(sc, sc.vehicles[i].task, r, k, t)
            c = cost_breakdown(sc, sc.vehicles[i].task, r, k)
            assert tab.delay[i, k] == pytest.approx(d.total, rel=1e-12)
            assert tab.cost[i, k] == pytest.approx(c.total, rel=1e-12)


@given(scale=st.floats(1.01, 10.0))
@settings(max_examples=50, deadline=None)
def test_delay_monotone_in_capacity(scale):
    sc = tiny_scenario(n_vehicles=1)
    task = sc.vehicles[0].task
    before = delay_breakdown(sc, task, 0, 1, 0.0).total
    sc.allocated_capacity = sc.allocated_capacity * scale
    assert delay_breakdown(sc, task, 0, 1, 0.0).total <= before


@given(boost=st.floats(1.0, 30.0))
@settings(max_examples=50, deadline=None)
def test_delay_monotone_in_rate(boost):
    import dataclasses
    sc = tiny_scenario(n_vehicles=1)
    v = sc.vehicles[0]
    r = serving(sc, v, 0.0)
    louder = dataclasses.replace(v, transmit_power_dbm=v.transmit_power_dbm + boost)
    sc2 = dataclasses.replace(sc, vehicles=[louder], _cache={})
    assert delay_breakdown(sc2, v.task, r, r, 0.0).total <= delay_breakdown(sc, v.task, r, r, 0.0).total
