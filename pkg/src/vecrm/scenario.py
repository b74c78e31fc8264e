"""Highway world: node placement, vehicle kinematics, coverage geometry, backhaul hops.

Coordinates: ``x`` runs along the highway in ``[0, highway_length]``; ``y`` is
the lateral coordinate with the road occupying ``[0, n_lanes * lane_width]``
and roadside nodes sitting at ``y = -perpendicular_offset``.

Node ids double as action indices: RSUs are ``0 .. n_rsus - 1`` in axial
order and the BS is the last id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import BackhaulParams, ExperimentConfig, RadioParams, ScenarioConfig, validate
from .exceptions import ConfigError, GeometryError, NoUpcomingRSUError

RSU = "RSU"
BS = "BS"

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    axial_position: float
    perpendicular_offset: float
    coverage_radius: Optional[float]
    bandwidth_mhz: float
    upload_price: float
    compute_price: float
    capacity_ghz: float
    radio: RadioParams

    @property
    def is_rsu(self) -> bool:
        return self.kind == RSU


@dataclass(frozen=True)
class Task:
    owner: int
    size_mb: float
    cycles: float


@dataclass(frozen=True)
class Vehicle:
    id: int
    lane: int
    initial_axial_position: float
    direction: int
    speed: float
    transmit_power_dbm: float
    task: Task


@dataclass
class Backhaul:
    wired_bandwidth_mbps: float
    hop_delay: float
    migration_price: float
    service_entity_size_mb: float
    hops: np.ndarray

    def hop_count(self, a: int, b: int) -> int:
        return int(self.hops[a, b])


@dataclass
class Scenario:
    nodes: list
    vehicles: list
    backhaul: Backhaul
    allocated_capacity: np.ndarray  # GHz, shape (n_nodes, n_vehicles)
    highway_length: float
    inter_rsu_distance: float
    coverage_radius: float
    lane_width: float
    rng_seed: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    @property
    def bs_id(self) -> int:
        return self.nodes[-1].id

    @property
    def rsu_ids(self) -> list:
        return [n.id for n in self.nodes if n.is_rsu]

    # -- kinematics ---------------------------------------------------------

    def position_at(self, vehicle: Vehicle, t: float) -> float:
        return position_at(vehicle, t, self.highway_length)

    def lateral_position(self, vehicle: Vehicle) -> float:
        return (vehicle.lane - 0.5) * self.lane_width

    # -- vectorized views used by the game tables -----------------------------

    def arrays(self) -> dict:
        if "arrays" not in self._cache:
            v = self.vehicles
            n = self.nodes
            self._cache["arrays"] = {
                "x0": np.array([q.initial_axial_position for q in v]),
                "direction": np.array([q.direction for q in v], dtype=float),
                "speed": np.array([q.speed for q in v]),
                "y": np.array([self.lateral_position(q) for q in v]),
                "power_dbm": np.array([q.transmit_power_dbm for q in v]),
                "size_mb": np.array([q.task.size_mb for q in v]),
                "cycles": np.array([q.task.cycles for q in v]),
                "node_x": np.array([q.axial_position for q in n]),
                "node_y": np.array([-q.perpendicular_offset for q in n]),
                "rsu_x": np.array([q.axial_position for q in n if q.is_rsu]),
            }
        return self._cache["arrays"]

    def positions(self, t: float) -> np.ndarray:
        a = self.arrays()
        if t < 0:
            raise GeometryError("t must be >= 0")
        return np.clip(a["x0"] + a["direction"] * a["speed"] * t, 0.0, self.highway_length)

    def serving_nodes(self, t: float) -> np.ndarray:
        x = self.positions(t)
        dist = np.abs(x[:, None] - self.arrays()["rsu_x"][None, :])
        covered = dist <= self.coverage_radius + _EDGE_TOL
        masked = np.where(covered, dist, np.inf)
        best = np.argmin(masked, axis=1)
        return np.where(covered.any(axis=1), best, self.bs_id)

    def to_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "highway_length": self.highway_length,
            "inter_rsu_distance": self.inter_rsu_distance,
            "coverage_radius": self.coverage_radius,
            "lane_width": self.lane_width,
            "nodes": [
                {
                    "id": q.id, "kind": q.kind, "axial_position": q.axial_position,
                    "perpendicular_offset": q.perpendicular_offset, "coverage_radius": q.coverage_radius,
                    "bandwidth_mhz": q.bandwidth_mhz, "upload_price": q.upload_price,
                    "compute_price": q.compute_price, "capacity_ghz": q.capacity_ghz,
                    "radio": vars(q.radio).copy(),
                }
                for q in self.nodes
            ],
            "vehicles": [
                {
                    "id": q.id, "lane": q.lane, "initial_axial_position": q.initial_axial_position,
                    "direction": q.direction, "speed": q.speed,
                    "transmit_power_dbm": q.transmit_power_dbm,
                    "task": {"size_mb": q.task.size_mb, "cycles": q.task.cycles},
                }
                for q in self.vehicles
            ],
            "backhaul": {
                "wired_bandwidth_mbps": self.backhaul.wired_bandwidth_mbps,
                "hop_delay": self.backhaul.hop_delay,
                "migration_price": self.backhaul.migration_price,
                "service_entity_size_mb": self.backhaul.service_entity_size_mb,
                "hops": self.backhaul.hops.tolist(),
            },
            "allocated_capacity": self.allocated_capacity.tolist(),
        }


def lane_direction(lane: int, n_lanes: int = 6) -> int:
    return 1 if lane <= n_lanes // 2 else -1


def lane_speed(lane: int, speeds_kmh, n_lanes: int = 6) -> float:
    """Speed in m/s; lanes ``k`` and ``k + n_lanes/2`` share a speed."""
    return speeds_kmh[(lane - 1) % (n_lanes // 2)] / 3.6


def chain_star_hops(n_rsus: int) -> np.ndarray:
    """Hop matrix for an RSU chain plus a BS wired to every RSU.

    RSU-to-RSU traffic is routed along the chain only (the BS does not relay
    between RSUs), so ``h(r, r') = |r - r'|`` and ``h(BS, r) = 1``.
    """
    idx = np.arange(n_rsus)
    hops = np.zeros((n_rsus + 1, n_rsus + 1), dtype=np.int64)
    hops[:n_rsus, :n_rsus] = np.abs(idx[:, None] - idx[None, :])
    hops[n_rsus, :n_rsus] = 1
    hops[:n_rsus, n_rsus] = 1
    return hops


def build_scenario(config, seed: int) -> Scenario:
    """Sample a scenario; a pure function of ``(config, seed)``.

    ``config`` may be an :class:`ExperimentConfig` or a bare :class:`ScenarioConfig`.
    """
    if isinstance(config, ExperimentConfig):
        validate(config)
        sc = config.scenario
    elif isinstance(config, ScenarioConfig):
        wrapper = ExperimentConfig(scenario=config)
        validate(wrapper)
        sc = config
    else:
        raise ConfigError(f"build_scenario: unsupported config type {type(config).__name__}")

    n_rsus, n_veh = int(sc.n_rsus), int(sc.n_vehicles)
    length = n_rsus * sc.inter_rsu_distance
    rng = np.random.default_rng(seed)

    nodes = []
    for k in range(n_rsus):
        p = sc.rsu
        nodes.append(Node(k, RSU, sc.inter_rsu_distance * k + sc.inter_rsu_distance / 2.0, sc.rsu_offset,
                          sc.coverage_radius, p.bandwidth_mhz, p.upload_price, p.compute_price,
                          p.capacity_ghz, p.radio))
    p = sc.bs
    nodes.append(Node(n_rsus, BS, length / 2.0, sc.bs_offset, None, p.bandwidth_mhz, p.upload_price,
                      p.compute_price, p.capacity_ghz, p.radio))

    lanes = rng.integers(1, sc.n_lanes + 1, size=n_veh)
    x0 = rng.uniform(0.0, length, size=n_veh)
    cycles = rng.uniform(sc.task_cycles[0], sc.task_cycles[1], size=n_veh)
    capacity = rng.uniform(sc.capacity_range[0], sc.capacity_range[1], size=(n_rsus + 1, n_veh))

    vehicles = []
    for i in range(n_veh):
        lane = int(lanes[i])
        vehicles.append(Vehicle(
            id=i, lane=lane, initial_axial_position=float(x0[i]),
            direction=lane_direction(lane, sc.n_lanes),
            speed=lane_speed(lane, sc.lane_speeds_kmh, sc.n_lanes),
            transmit_power_dbm=float(sc.transmit_power_dbm),
            task=Task(owner=i, size_mb=float(sc.task_size_mb), cycles=float(cycles[i])),
        ))

    bh: BackhaulParams = sc.backhaul
    backhaul = Backhaul(bh.wired_bandwidth_mbps, bh.hop_delay, bh.migration_price,
                        bh.service_entity_size_mb, chain_star_hops(n_rsus))
    return Scenario(nodes=nodes, vehicles=vehicles, backhaul=backhaul, allocated_capacity=capacity,
                    highway_length=float(length), inter_rsu_distance=float(sc.inter_rsu_distance),
                    coverage_radius=float(sc.coverage_radius), lane_width=float(sc.lane_width),
                    rng_seed=int(seed))


def position_at(vehicle: Vehicle, t: float, highway_length: Optional[float] = None) -> float:
    """Axial position at ``t`` under constant speed; frozen at the segment ends."""
    if t < 0:
        raise GeometryError("t must be >= 0")
    x = vehicle.initial_axial_position + vehicle.direction * vehicle.speed * t
    if highway_length is not None:
        x = min(max(x, 0.0), highway_length)
    return x


def serving_node(scenario: Scenario, vehicle: Vehicle, t: float) -> int:
    x = scenario.position_at(vehicle, t)
    best, best_dist = scenario.bs_id, math.inf
    for node in scenario.nodes:
        if not node.is_rsu:
            continue
        dist = abs(x - node.axial_position)
        if dist <= node.coverage_radius + _EDGE_TOL and dist < best_dist:
            best, best_dist = node.id, dist
    return best


def residual_coverage_distance(scenario: Scenario, vehicle: Vehicle, t: float,
                               node: Optional[int] = None) -> float:
    """Distance left to travel before ``vehicle`` exits the coverage of ``node``
    (its serving RSU by default)."""
    if node is None:
        node = serving_node(scenario, vehicle, t)
    rsu = scenario.nodes[node]
    if not rsu.is_rsu:
        raise GeometryError(f"vehicle {vehicle.id} is not served by an RSU at t={t}")
    x = scenario.position_at(vehicle, t)
    if abs(x - rsu.axial_position) > rsu.coverage_radius + _EDGE_TOL:
        raise GeometryError(f"vehicle {vehicle.id} is outside the coverage of node {node}")
    exit_x = rsu.axial_position + vehicle.direction * rsu.coverage_radius
    return min(max(vehicle.direction * (exit_x - x), 0.0), 2.0 * rsu.coverage_radius)


def gap_distance_to_next_rsu(scenario: Scenario, vehicle: Vehicle, t: float):
    """``(distance, rsu_id)`` to the entry edge of the first RSU ahead."""
    x = scenario.position_at(vehicle, t)
    best, best_dist = None, math.inf
    for node in scenario.nodes:
        if not node.is_rsu:
            continue
        entry = node.axial_position - vehicle.direction * node.coverage_radius
        ahead = vehicle.direction * (entry - x)
        if ahead >= -_EDGE_TOL and ahead < best_dist:
            best, best_dist = node.id, max(ahead, 0.0)
    if best is None:
        raise NoUpcomingRSUError(f"vehicle {vehicle.id} has no RSU ahead at t={t}")
    return best_dist, best


def hop_count(backhaul: Backhaul, a: int, b: int) -> int:
    return backhaul.hop_count(a, b)

