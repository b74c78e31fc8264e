"""Binary placement variables, mobility/capacity constraints and the weighted objective."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compute import INFINITE_DELAY, cost_breakdown, delay_breakdown, is_infinite
from .exceptions import InputError, NoUpcomingRSUError
from .scenario import gap_distance_to_next_rsu, residual_coverage_distance

_EDGE_TOL = 1e-9

# which mobility constraint governs a placement
LOCAL_RSU = "local-rsu"        # processed at the serving RSU
RSU_TO_RSU = "rsu-to-rsu"      # migrated between RSUs
BS_TO_RSU = "bs-to-rsu"        # uploaded to the BS, migrated to an RSU
UNCONSTRAINED = "none"         # anything ending at the BS


@dataclass
class DecisionMatrix:
    """``local[r, i]`` and ``migrated[r, r_hat, i]`` for one joint action."""

    local: np.ndarray
    migrated: np.ndarray
    serving: np.ndarray
    targets: np.ndarray

    def n_ones(self) -> int:
        return int(self.local.sum() + self.migrated.sum())

    def placements(self):
        """Yield ``(task, serving, target)`` for every task."""
        for i, (r, k) in enumerate(zip(self.serving, self.targets)):
            yield i, int(r), int(k)


@dataclass
class ConstraintReport:
    mobility_ok: np.ndarray                 # (n,) bool
    mobility_kind: list                     # (n,) which constraint applied
    mobility_margin: list                   # (n,) seconds of slack; None when undefined
    capacity_ok: np.ndarray                 # (m,) bool
    capacity_margin: np.ndarray             # (m,) GHz of slack
    violated_list: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return bool(self.mobility_ok.all() and self.capacity_ok.all())

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "mobility_ok": [bool(v) for v in self.mobility_ok],
            "mobility_kind": list(self.mobility_kind),
            "mobility_margin": list(self.mobility_margin),
            "capacity_ok": [bool(v) for v in self.capacity_ok],
            "capacity_margin": [float(v) for v in self.capacity_margin],
            "violated": list(self.violated_list),
        }


def decision_from_actions(scenario, joint_action, t: float) -> DecisionMatrix:
    actions = np.asarray(joint_action, dtype=np.int64)
    n, m = scenario.n_vehicles, scenario.n_nodes
    if actions.shape != (n,):
        raise InputError(f"joint action must have one entry per vehicle ({n}), got shape {actions.shape}")
    if actions.min() < 0 or actions.max() >= m:
        raise InputError("joint action refers to an unknown node")
    serving = scenario.serving_nodes(t)
    local = np.zeros((m, n), dtype=bool)
    migrated = np.zeros((m, m, n), dtype=bool)
    idx = np.arange(n)
    here = actions == serving
    local[serving[here], idx[here]] = True
    migrated[serving[~here], actions[~here], idx[~here]] = True
    return DecisionMatrix(local=local, migrated=migrated, serving=serving, targets=actions)


def mobility_deadline(scenario, vehicle, serving: int, target: int, t: float):
    """``(kind, deadline_seconds)`` for one placement; the deadline is ``None``
    when no constraint applies and raises when it cannot be evaluated."""
    nodes = scenario.nodes
    if not nodes[target].is_rsu:
        return UNCONSTRAINED, None
    if nodes[serving].is_rsu:
        residual = residual_coverage_distance(scenario, vehicle, t, serving)
        if target == serving:
            return LOCAL_RSU, residual / vehicle.speed
        hops = scenario.backhaul.hop_count(serving, target)
        return RSU_TO_RSU, (residual + scenario.inter_rsu_distance * hops) / vehicle.speed
    gap, entry_rsu = gap_distance_to_next_rsu(scenario, vehicle, t)
    hops = scenario.backhaul.hop_count(entry_rsu, target)
    span = gap + 2.0 * scenario.coverage_radius + scenario.inter_rsu_distance * hops
    return BS_TO_RSU, span / vehicle.speed


def check_constraints(scenario, decision: DecisionMatrix, t: float) -> ConstraintReport:
    n, m = scenario.n_vehicles, scenario.n_nodes
    mobility_ok = np.ones(n, dtype=bool)
    kinds, margins, violated = [], [], []
    load = np.zeros(m)

    for i, r, k in decision.placements():
        vehicle = scenario.vehicles[i]
        load[k] += scenario.allocated_capacity[k, i]
        delay = delay_breakdown(scenario, vehicle.task, r, k, t)
        try:
            kind, deadline = mobility_deadline(scenario, vehicle, r, k, t)
        except NoUpcomingRSUError:
            kinds.append(BS_TO_RSU)
            margins.append(None)
            mobility_ok[i] = False
            violated.append({"kind": "mobility", "constraint": BS_TO_RSU, "task": i,
                             "margin": None, "reason": "no RSU ahead"})
            continue
        kinds.append(kind)
        if is_infinite(delay):
            margins.append(None)
            mobility_ok[i] = False
            violated.append({"kind": "mobility", "constraint": kind, "task": i,
                             "margin": None, "reason": "unbounded delay"})
            continue
        if deadline is None:
            margins.append(None)
            continue
        margin = deadline - delay.total
        margins.append(float(margin))
        if margin < 0:
            mobility_ok[i] = False
            violated.append({"kind": "mobility", "constraint": kind, "task": i, "margin": float(margin)})

    cap = np.array([q.capacity_ghz for q in scenario.nodes])
    capacity_margin = cap - load
    capacity_ok = capacity_margin >= -_EDGE_TOL
    for k in np.flatnonzero(~capacity_ok):
        violated.append({"kind": "capacity", "node": int(k), "margin": float(capacity_margin[k])})
    return ConstraintReport(mobility_ok, kinds, margins, capacity_ok, capacity_margin, violated)


def task_terms(scenario, i: int, serving: int, target: int, t: float):
    """``(delay, cost)`` totals for one placement, or INFINITE_DELAY for the delay."""
    task = scenario.vehicles[i].task
    d = delay_breakdown(scenario, task, serving, target, t)
    c = cost_breakdown(scenario, task, serving, target)
    return (INFINITE_DELAY if is_infinite(d) else d.total), c.total


def objective(scenario, decision: DecisionMatrix, t: float, beta: float = 1.0, gamma: float = 1.0):
    """Weighted total delay plus cost over all placements in ``decision``."""
    total = 0.0
    for i, r, k in decision.placements():
        delay, cost = task_terms(scenario, i, r, k, t)
        if is_infinite(delay):
            return INFINITE_DELAY
        total += beta * delay + gamma * cost
    return total


# -- vectorized feasibility used by the game layer -----------------------------

def mobility_table(scenario, t: float, tables) -> np.ndarray:
    """``ok[i, k]``: does sending vehicle i's task to node k meet its mobility deadline?"""
    a = scenario.arrays()
    n, m = scenario.n_vehicles, scenario.n_nodes
    x = scenario.positions(t)
    s = tables.serving
    R = scenario.coverage_radius
    d_r = scenario.inter_rsu_distance
    rsu_x = a["rsu_x"]
    n_rsus = len(rsu_x)
    direction, speed = a["direction"], a["speed"]

    deadline = np.full((n, m), math.inf)
    defined = np.ones((n, m), dtype=bool)
    hops = scenario.backhaul.hops

    by_rsu = s < n_rsus
    if by_rsu.any():
        idx = np.flatnonzero(by_rsu)
        exit_x = rsu_x[s[idx]] + direction[idx] * R
        residual = np.clip(direction[idx] * (exit_x - x[idx]), 0.0, 2.0 * R)
        span = residual[:, None] + d_r * hops[s[idx], :n_rsus]
        deadline[idx, :n_rsus] = span / speed[idx, None]

    by_bs = ~by_rsu
    if by_bs.any():
        idx = np.flatnonzero(by_bs)
        entry = rsu_x[None, :] - direction[idx, None] * R
        ahead = direction[idx, None] * (entry - x[idx, None])
        ahead = np.where(ahead >= -_EDGE_TOL, np.maximum(ahead, 0.0), math.inf)
        has_next = np.isfinite(ahead).any(axis=1)
        nxt = np.argmin(ahead, axis=1)
        gap = np.where(has_next, ahead[np.arange(len(idx)), nxt], 0.0)
        span = gap[:, None] + 2.0 * R + d_r * hops[nxt, :n_rsus]
        deadline[idx, :n_rsus] = span / speed[idx, None]
        defined[idx[~has_next], :n_rsus] = False

    ok = defined & tables.finite & (np.where(tables.finite, tables.delay, 0.0) <= deadline)
    return ok
