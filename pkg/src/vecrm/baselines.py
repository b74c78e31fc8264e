"""Reference solvers: exhaustive search over joint profiles and classical regret matching."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import EnumerationTooLarge
from .learner import HARMONIC, ExperimentTrace, RegretMatchingLearner, _safe_jain

DEFAULT_CAP = 10**7
_CHUNK = 1 << 16


@dataclass
class SearchResult:
    profile: Optional[tuple]     # None when no feasible profile exists
    objective: Optional[float]
    n_profiles: int
    wall_time: float

    @property
    def feasible(self) -> bool:
        return self.profile is not None


def _profiles(start: int, stop: int, n: int, m: int) -> np.ndarray:
    """Profiles ``start .. stop-1`` in lexicographic order (player 0 most significant)."""
    idx = np.arange(start, stop, dtype=np.int64)
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % m


def exhaustive_search(game, t: float = None, cap: int = DEFAULT_CAP) -> SearchResult:
    """Feasible joint profile with the smallest weighted delay+cost.

    Ties go to the lexicographically smallest profile.
    """
    n, m = game.n_players, game.n_actions
    total = m ** n
    if total > cap:
        raise EnumerationTooLarge(f"{m}^{n} = {total:.3g} joint profiles exceeds the cap of {cap:.3g}")
    start = time.perf_counter()
    if hasattr(game, "tables"):
        best = _search_tables(game, game.t0 if t is None else t, n, m, total)
    else:
        best = _search_generic(game, t)
    wall = time.perf_counter() - start
    if best is None:
        return SearchResult(None, None, total, wall)
    return SearchResult(tuple(int(x) for x in best[1]), float(best[0]), total, wall)


def _search_tables(game, t, n, m, total):
    tab, ok, weighted = game.tables(t)
    cap = game.capacity
    rows = np.arange(n)
    best = None
    for lo in range(0, total, _CHUNK):
        P = _profiles(lo, min(lo + _CHUNK, total), n, m)
        mob = ok[rows, P].all(axis=1)
        own = tab.load[rows, P]
        loads = np.stack([(own * (P == k)).sum(axis=1) for k in range(m)], axis=1)
        fits = (loads <= cap[None, :] + 1e-9).all(axis=1)
        good = mob & fits
        if not good.any():
            continue
        obj = np.where(good, weighted[rows, P].sum(axis=1), np.inf)
        b = int(np.argmin(obj))
        if best is None or obj[b] < best[0]:
            best = (float(obj[b]), P[b])
    return best


def _search_generic(game, t):
    best = None
    for profile in itertools.product(range(game.n_actions), repeat=game.n_players):
        if not game.feasible(profile, t):
            continue
        obj = game.objective(profile, t)
        if best is None or obj < best[0]:
            best = (obj, np.array(profile))
    return best


def search_trace(game, result: SearchResult, t: float = None) -> ExperimentTrace:
    """One-row trace holding the exhaustive-search optimum (empty if infeasible)."""
    n = game.n_players
    if not result.feasible:
        empty = np.empty((0, n))
        return ExperimentTrace("es", np.empty((0, n), dtype=np.int64), empty, np.empty(0), np.empty(0, bool),
                               empty, np.empty(0), wall_time=result.wall_time)
    a = np.asarray(result.profile, dtype=np.int64)
    u = game.utilities(a, t)
    return ExperimentTrace("es", a[None, :], u[None, :], np.array([-u.sum()]), np.array([True]),
                           np.zeros((1, n)), np.array([_safe_jain(np.abs(u))]), wall_time=result.wall_time,
                           meta={"n_profiles": result.n_profiles})


def run_trm(game, rounds: int, seed: int = 0, mu_scale: float = 1.0, mu_min: float = 1.0,
            track_empirical: bool = True) -> ExperimentTrace:
    """Regret matching with plain ``1/t`` averaging of the regrets."""
    learner = RegretMatchingLearner(game, averaging=HARMONIC, mu_scale=mu_scale, mu_min=mu_min, seed=seed,
                                    track_empirical=track_empirical)
    return learner.run(rounds)
