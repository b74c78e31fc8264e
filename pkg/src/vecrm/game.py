"""The assignment problem as a repeated game, plus a correlated-equilibrium verifier.

A game only has to answer one question for the learners and the verifier:
given a joint profile ``a``, what is ``u_i(k, a_-i)`` for every player ``i``
and every action ``k``? That is :meth:`utility_matrix`, shape ``(n, m)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .compute import is_infinite, placement_tables
from .exceptions import ConfigError, InputError
from .problem import check_constraints, decision_from_actions, mobility_table, task_terms

_CAP_TOL = 1e-9


class TaskAssignmentGame:
    """Players are vehicles, actions are node ids, utilities are negated weighted
    delay plus cost (or ``-(beta + gamma) * penalty`` for an infeasible placement).

    ``time_of_round`` maps a learning round to the environment clock: constant
    ``t0`` in snapshot mode, ``t0 + (round - 1) * dt`` in mobile mode.
    """

    def __init__(self, scenario, beta=1.0, gamma=1.0, penalty=1e6, mode="snapshot", t0=0.0, dt=1.0):
        if not (beta > 0 and gamma > 0):
            raise ConfigError("beta and gamma must be > 0")
        if mode not in ("snapshot", "mobile"):
            raise ConfigError(f"unknown clock mode {mode!r}")
        self.scenario = scenario
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.penalty = float(penalty)
        self.mode = mode
        self.t0 = float(t0)
        self.dt = float(dt)
        self.n_players = scenario.n_vehicles
        self.n_actions = scenario.n_nodes
        self.capacity = np.array([q.capacity_ghz for q in scenario.nodes])
        self._tables = lru_cache(maxsize=8)(self._build_tables)
        self.validate_penalty(self.t0)

    @property
    def penalty_utility(self) -> float:
        return -(self.beta + self.gamma) * self.penalty

    def time_of_round(self, rnd: int) -> float:
        if self.mode == "snapshot":
            return self.t0
        return self.t0 + (rnd - 1) * self.dt

    def _build_tables(self, t: float):
        tab = placement_tables(self.scenario, t)
        mobility_ok = mobility_table(self.scenario, t, tab)
        weighted = np.where(tab.finite, self.beta * np.where(tab.finite, tab.delay, 0.0) + self.gamma * tab.cost,
                            0.0)
        return tab, mobility_ok, weighted

    def tables(self, t: float):
        """``(PlacementTables, mobility_ok, weighted_cost)`` at time ``t``."""
        return self._tables(float(t))

    def validate_penalty(self, t: float) -> float:
        """Largest feasible ``beta*T + gamma*c``; raises if the penalty does not dominate it."""
        _, ok, weighted = self.tables(t)
        worst = float(weighted[ok].max()) if ok.any() else 0.0
        if not self.penalty > worst:
            raise ConfigError(f"penalty {self.penalty:g} does not exceed the largest feasible "
                              f"weighted delay+cost {worst:g}")
        return worst

    def utility_matrix(self, profile, t: float = None) -> np.ndarray:
        """``U[i, k] = u_i(k, a_-i)`` for the joint profile ``a``."""
        t = self.t0 if t is None else t
        tab, ok, weighted = self.tables(t)
        a = np.asarray(profile, dtype=np.int64)
        n, m = self.n_players, self.n_actions
        rows = np.arange(n)
        own = tab.load[rows, a]
        loads = np.bincount(a, weights=own, minlength=m)
        others = loads[None, :] - np.where(np.arange(m)[None, :] == a[:, None], own[:, None], 0.0)
        fits = others + tab.load <= self.capacity[None, :] + _CAP_TOL
        return np.where(ok & fits, -weighted, self.penalty_utility)

    def utilities(self, profile, t: float = None) -> np.ndarray:
        a = np.asarray(profile, dtype=np.int64)
        return self.utility_matrix(a, t)[np.arange(self.n_players), a]

    def objective(self, profile, t: float = None) -> float:
        """Penalized objective: equals the weighted delay+cost sum when every placement is feasible."""
        return float(-self.utilities(profile, t).sum())

    def feasible(self, profile, t: float = None) -> bool:
        return bool((self.utilities(profile, t) > self.penalty_utility).all())

    def utility_scale(self, t: float = None) -> float:
        """Spread of the non-penalty utilities (used to size CE tolerances)."""
        _, ok, weighted = self.tables(self.t0 if t is None else t)
        if not ok.any():
            return 1.0
        vals = weighted[ok]
        return max(float(vals.max() - vals.min()), 1.0)


def utility(game: TaskAssignmentGame, player: int, joint_action, t: float) -> float:
    """Scalar reference evaluation of one player's utility via the constraint checker."""
    sc = game.scenario
    decision = decision_from_actions(sc, joint_action, t)
    report = check_constraints(sc, decision, t)
    target = int(decision.targets[player])
    if not (report.mobility_ok[player] and report.capacity_ok[target]):
        return game.penalty_utility
    delay, cost = task_terms(sc, player, int(decision.serving[player]), target, t)
    if is_infinite(delay):
        return game.penalty_utility
    return -(game.beta * delay + game.gamma * cost)


class MatrixGame:
    """Normal-form game from a payoff tensor of shape ``(n, m, m, ..., m)``."""

    def __init__(self, payoffs):
        payoffs = np.asarray(payoffs, dtype=float)
        n = payoffs.shape[0]
        if payoffs.ndim != n + 1 or len(set(payoffs.shape[1:])) != 1:
            raise InputError("payoffs must have shape (n, m, ..., m) with n action axes")
        self.payoffs = payoffs
        self.n_players = n
        self.n_actions = payoffs.shape[1]
        self.penalty_utility = -math.inf

    def time_of_round(self, rnd: int) -> float:
        return 0.0

    def utility_matrix(self, profile, t: float = None) -> np.ndarray:
        a = list(int(x) for x in profile)
        out = np.empty((self.n_players, self.n_actions))
        for i in range(self.n_players):
            idx = a.copy()
            for k in range(self.n_actions):
                idx[i] = k
                out[i, k] = self.payoffs[(i, *idx)]
        return out

    def utilities(self, profile, t: float = None) -> np.ndarray:
        a = tuple(int(x) for x in profile)
        return np.array([self.payoffs[(i, *a)] for i in range(self.n_players)])

    def objective(self, profile, t: float = None) -> float:
        return float(-self.utilities(profile).sum())

    def feasible(self, profile, t: float = None) -> bool:
        return True

    def utility_scale(self, t: float = None) -> float:
        return max(float(self.payoffs.max() - self.payoffs.min()), 1e-12)

    def profiles(self):
        return itertools.product(range(self.n_actions), repeat=self.n_players)


@dataclass
class JointDistribution:
    """Sparse distribution over joint profiles (tuples of action ids)."""

    probs: dict

    def __post_init__(self):
        self.probs = {tuple(int(x) for x in k): float(v) for k, v in self.probs.items()}

    def validate(self, atol: float = 1e-9) -> None:
        vals = np.fromiter(self.probs.values(), dtype=float, count=len(self.probs))
        if vals.size == 0 or (vals < -atol).any() or abs(vals.sum() - 1.0) > atol:
            raise InputError("joint distribution must be non-negative and sum to 1")

    @classmethod
    def point_mass(cls, profile) -> "JointDistribution":
        return cls({tuple(profile): 1.0})

    def mix(self, other: "JointDistribution", w: float) -> "JointDistribution":
        keys = set(self.probs) | set(other.probs)
        return JointDistribution({k: (1 - w) * self.probs.get(k, 0.0) + w * other.probs.get(k, 0.0)
                                  for k in keys})


def deviation_gains(game, psi: JointDistribution, t: float = None) -> np.ndarray:
    """``G[i, j, k] = sum_{a_-i} psi(j, a_-i) * (u_i(k, a_-i) - u_i(j, a_-i))``."""
    psi.validate()
    n, m = game.n_players, game.n_actions
    gains = np.zeros((n, m, m))
    rows = np.arange(n)
    for profile, w in psi.probs.items():
        if w == 0.0:
            continue
        a = np.asarray(profile, dtype=np.int64)
        U = game.utility_matrix(a, t)
        gains[rows, a, :] += w * (U - U[rows, a][:, None])
    return gains


def is_correlated_equilibrium(game, psi: JointDistribution, t: float = None, eps: float = None):
    """Return ``(is_ce, worst_gain)``; ``eps`` defaults to ``1e-6 * game.utility_scale()``."""
    if eps is None:
        eps = 1e-6 * game.utility_scale(t)
    gains = deviation_gains(game, psi, t)
    worst = float(gains.max())
    return worst <= eps, worst
