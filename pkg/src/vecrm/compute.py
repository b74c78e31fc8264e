"""Per-task delay and cost of a placement (upload, migration, processing).

Task sizes are in megabytes and are converted to megabits (x8) before being
divided by a rate in Mbps. The wired backhaul bandwidth is read as Mbps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import data_rate, dbm_to_watts, db_to_linear

BITS_PER_BYTE = 8.0


class _InfiniteDelay:
    """Marker for a placement whose delay is unbounded (zero rate or zero capacity).

    It is never used in arithmetic; the game layer turns it into the
    infeasibility penalty.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE_DELAY"

    def __reduce__(self):
        return (_InfiniteDelay, ())


INFINITE_DELAY = _InfiniteDelay()


def is_infinite(value) -> bool:
    return value is INFINITE_DELAY


@dataclass(frozen=True)
class DelayBreakdown:
    upload: float
    migration: float
    processing: float

    @property
    def total(self) -> float:
        return self.upload + self.migration + self.processing


@dataclass(frozen=True)
class CostBreakdown:
    upload: float
    migration: float
    processing: float

    @property
    def total(self) -> float:
        return self.upload + self.migration + self.processing


def delay_breakdown(scenario, task, serving: int, target: int, t: float):
    """Delay of processing ``task`` at ``target`` after uploading it to ``serving``.

    Returns :data:`INFINITE_DELAY` when the upload rate or the allocated
    capacity is zero.
    """
    vehicle = scenario.vehicles[task.owner]
    rate = data_rate(scenario, scenario.nodes[serving], vehicle, t)
    capacity = scenario.allocated_capacity[target, task.owner]
    if not rate > 0 or not capacity > 0:
        return INFINITE_DELAY
    upload = BITS_PER_BYTE * task.size_mb / rate
    if target == serving:
        migration = 0.0
    else:
        bh = scenario.backhaul
        migration = (BITS_PER_BYTE * task.size_mb / bh.wired_bandwidth_mbps
                     + 2.0 * bh.hop_delay * bh.hop_count(serving, target))
    processing = task.cycles / capacity
    return DelayBreakdown(float(upload), float(migration), float(processing))


def cost_breakdown(scenario, task, serving: int, target: int) -> CostBreakdown:
    src = scenario.nodes[serving]
    upload = src.upload_price * src.bandwidth_mhz
    if target == serving:
        migration = 0.0
    else:
        bh = scenario.backhaul
        migration = bh.migration_price * bh.service_entity_size_mb
    dst = scenario.nodes[target]
    processing = dst.compute_price * scenario.allocated_capacity[target, task.owner]
    return CostBreakdown(float(upload), float(migration), float(processing))


@dataclass
class PlacementTables:
    """Every (vehicle, target) delay and cost at one instant.

    ``finite[i, k]`` is False where the delay is unbounded; the matching
    ``delay`` entry is then meaningless and must not be used.
    """

    serving: np.ndarray      # (n,) serving node per vehicle
    delay: np.ndarray        # (n, m) total delay
    cost: np.ndarray         # (n, m) total cost
    finite: np.ndarray       # (n, m) bool
    load: np.ndarray         # (n, m) GHz the vehicle would occupy at node k


def placement_tables(scenario, t: float) -> PlacementTables:
    """Vectorized :func:`delay_breakdown` / :func:`cost_breakdown` over all pairs."""
    a = scenario.arrays()
    n, m = scenario.n_vehicles, scenario.n_nodes
    x = scenario.positions(t)
    serving = scenario.serving_nodes(t)

    bw = np.array([q.bandwidth_mhz for q in scenario.nodes])
    up_price = np.array([q.upload_price for q in scenario.nodes])
    cp_price = np.array([q.compute_price for q in scenario.nodes])
    g0 = np.array([db_to_linear(q.radio.reference_gain_db) for q in scenario.nodes])
    d0 = np.array([q.radio.reference_distance for q in scenario.nodes])
    expo = np.array([q.radio.pathloss_exponent for q in scenario.nodes])
    noise = np.array([dbm_to_watts(q.radio.noise_dbm) for q in scenario.nodes])

    s = serving
    dist = np.hypot(x - a["node_x"][s], a["y"] - a["node_y"][s])
    gain = g0[s] * (d0[s] / dist) ** expo[s]
    snr = dbm_to_watts(a["power_dbm"]) * gain / noise[s]
    rate = bw[s] * np.log1p(snr) / np.log(2.0)

    cap = scenario.allocated_capacity.T  # (n, m)
    finite = (rate > 0)[:, None] & (cap > 0)
    safe_rate = np.where(rate > 0, rate, 1.0)
    safe_cap = np.where(cap > 0, cap, 1.0)

    bh = scenario.backhaul
    upload = BITS_PER_BYTE * a["size_mb"] / safe_rate
    is_local = np.arange(m)[None, :] == s[:, None]
    mig_delay = (BITS_PER_BYTE * a["size_mb"][:, None] / bh.wired_bandwidth_mbps
                 + 2.0 * bh.hop_delay * bh.hops[s, :])
    mig_delay = np.where(is_local, 0.0, mig_delay)
    processing = a["cycles"][:, None] / safe_cap
    delay = upload[:, None] + mig_delay + processing

    mig_cost = np.where(is_local, 0.0, bh.migration_price * bh.service_entity_size_mb)
    cost = (up_price[s] * bw[s])[:, None] + mig_cost + cp_price[None, :] * cap
    return PlacementTables(serving=s, delay=delay, cost=cost, finite=finite, load=cap.copy())
