"""Multi-agent regret matching with a forgetting factor.

Each player keeps a conditional regret table ``R[j, k]``: the (discounted)
average gain it would have had by playing ``k`` every time it played ``j``.
After every round the table of the action just played is refreshed with
the instantaneous regret, and the next action is drawn from

    pi(k) = max(R[j, k], 0) / mu      for k != j
    pi(j) = 1 - sum_{k != j} pi(k)

where ``j`` is the action just played. Two averaging modes are supported:
``forgetting`` (``R <- lam * R + (1 - lam) * D``) and ``harmonic``
(``R <- (1 - 1/t) * R + D / t``, classical regret matching).

All players are updated together as stacked arrays; each player still
draws from its own random stream so trajectories do not depend on how the
work is split.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ConfigError
from .game import JointDistribution
from .metrics import jain_fairness

FORGETTING = "forgetting"
HARMONIC = "harmonic"

_TINY = np.nextafter(0.0, 1.0)


@dataclass
class RegretState:
    """Learning state of every player; axis 0 indexes players."""

    regret: np.ndarray          # (n, m, m) cumulative regret, diagonal unused
    policy: np.ndarray          # (n, m)
    last_action: np.ndarray     # (n,), -1 before the first round
    averaging: str = FORGETTING
    lam: float = 0.5
    t: int = 0                  # rounds folded into ``regret``

    @classmethod
    def initial(cls, n_players: int, n_actions: int, averaging: str = FORGETTING, lam: float = 0.5):
        if averaging not in (FORGETTING, HARMONIC):
            raise ConfigError(f"unknown averaging mode {averaging!r}")
        if averaging == FORGETTING and not 0.0 <= lam <= 1.0:
            raise ConfigError(f"forgetting factor must lie in [0, 1], got {lam}")
        return cls(
            regret=np.zeros((n_players, n_actions, n_actions)),
            policy=np.full((n_players, n_actions), 1.0 / n_actions),
            last_action=np.full(n_players, -1, dtype=np.int64),
            averaging=averaging,
            lam=float(lam),
        )

    @property
    def n_players(self) -> int:
        return self.regret.shape[0]

    @property
    def n_actions(self) -> int:
        return self.regret.shape[1]


def update_regret(state: RegretState, utilities: np.ndarray, chosen) -> RegretState:
    """Fold one round into the regret tables (in place; the state is returned).

    ``utilities[i, k]`` is ``u_i(k, a_-i)`` and ``chosen[i]`` the action player i played.
    """
    if state.averaging == FORGETTING and not 0.0 <= state.lam <= 1.0:
        raise ConfigError(f"forgetting factor must lie in [0, 1], got {state.lam}")
    U = np.asarray(utilities, dtype=float)
    a = np.asarray(chosen, dtype=np.int64)
    rows = np.arange(state.n_players)
    instant = U - U[rows, a][:, None]
    t = state.t + 1
    if state.averaging == FORGETTING:
        keep, step = state.lam, 1.0 - state.lam
    else:
        keep, step = 1.0 - 1.0 / t, 1.0 / t
    state.regret *= keep
    state.regret[rows, a, :] += step * instant
    state.last_action = a.copy()
    state.t = t
    return state


def mu_rule(positive_row_max, n_actions: int, mu_scale: float = 1.0, mu_min: float = 1.0):
    """Normalizer keeping the probability of repeating the last action positive."""
    return np.maximum(mu_min, mu_scale * n_actions * np.asarray(positive_row_max, dtype=float))


def action_probabilities(state: RegretState, mu=None, mu_scale: float = 1.0, mu_min: float = 1.0) -> np.ndarray:
    """Next-round policy of every player; also stored on ``state.policy``.

    ``mu`` overrides the normalizer (scalar or one per player); otherwise
    :func:`mu_rule` picks it.
    """
    n, m = state.n_players, state.n_actions
    rows = np.arange(n)
    j = state.last_action
    if (j < 0).any():
        raise ConfigError("action_probabilities needs every player to have played once")
    pos = np.maximum(state.regret[rows, j, :], 0.0)
    pos[rows, j] = 0.0
    if mu is None:
        mu = mu_rule(pos.max(axis=1), m, mu_scale, mu_min)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (n,))
    pi = pos / mu[:, None]
    # a positive regret must never round down to a zero switching probability
    pi = np.where((pos > 0) & (pi == 0), _TINY, pi)
    pi[rows, j] = 1.0 - pi.sum(axis=1)
    state.policy = pi
    return pi


def lyapunov_potential(state: RegretState) -> np.ndarray:
    """Per-player ``0.5 * sum_{j != k} max(R[j, k], 0)^2``."""
    pos = np.maximum(state.regret, 0.0)
    m = state.n_actions
    pos[:, np.arange(m), np.arange(m)] = 0.0
    return 0.5 * (pos ** 2).sum(axis=(1, 2))


def sample_actions(policy: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of one action per player from ``uniforms`` in [0, 1)."""
    cdf = np.cumsum(policy, axis=1)
    a = (cdf <= uniforms[:, None]).sum(axis=1)
    return np.minimum(a, policy.shape[1] - 1)


class EmpiricalDistribution:
    """Discounted empirical distribution of joint profiles.

    Forgetting mode follows ``phi_t = phi_{t-1} + eps * (1{a_t} - phi_{t-1})``
    with ``eps = 1 - lam`` and ``phi_0 = 0``; entries are decayed lazily so an
    update costs O(1). Harmonic mode is the plain visit frequency.
    """

    def __init__(self, averaging: str = FORGETTING, lam: float = 0.5):
        self.averaging = averaging
        self.lam = float(lam)
        self.t = 0
        self._entries = {}  # profile -> (weight at time last, last)

    def update(self, profile) -> None:
        self.t += 1
        key = tuple(int(x) for x in profile)
        if self.averaging == HARMONIC or self.lam == 1.0:
            w, _ = self._entries.get(key, (0.0, 0))
            self._entries[key] = (w + 1.0, self.t)
            return
        w, last = self._entries.get(key, (0.0, self.t))
        self._entries[key] = (w * self.lam ** (self.t - last) + (1.0 - self.lam), self.t)

    def raw(self) -> dict:
        """``phi_t`` exactly as the recursion defines it (mass ``1 - lam**t``)."""
        if self.averaging == HARMONIC or self.lam == 1.0:
            return {k: w / self.t for k, (w, _) in self._entries.items()}
        return {k: w * self.lam ** (self.t - last) for k, (w, last) in self._entries.items()}

    def distribution(self):
        """``phi_t`` renormalized to a probability distribution."""
        raw = self.raw()
        total = sum(raw.values())
        return JointDistribution({k: v / total for k, v in raw.items() if v > 0.0})

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class ExperimentTrace:
    solver: str
    actions: np.ndarray          # (rounds, n)
    utilities: np.ndarray        # (rounds, n) realized utility per player
    objective: np.ndarray        # (rounds,) penalized weighted delay + cost
    feasible: np.ndarray         # (rounds,) bool
    lyapunov: np.ndarray         # (rounds, n) potential after the round's update
    jain: np.ndarray             # (rounds,) fairness of |u|
    empirical: Optional[EmpiricalDistribution] = None
    state: Optional[RegretState] = None
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.objective)

    @property
    def lyapunov_max(self) -> np.ndarray:
        return self.lyapunov.max(axis=1)


def player_streams(seed: int, n_players: int):
    """One independent generator per player, derived from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(n_players)]


def run_round(game, state: RegretState, rnd: int, uniforms: np.ndarray,
              mu_scale: float = 1.0, mu_min: float = 1.0):
    """One synchronized round: sample, broadcast, evaluate counterfactuals, update.

    Returns ``(profile, utility_matrix)``; ``state`` is updated in place.
    """
    a = sample_actions(state.policy, uniforms)
    U = game.utility_matrix(a, game.time_of_round(rnd))
    update_regret(state, U, a)
    action_probabilities(state, mu_scale=mu_scale, mu_min=mu_min)
    return a, U


class RegretMatchingLearner:
    """Runs regret matching for a fixed number of rounds and records a trace.

    >>> learner = RegretMatchingLearner(game, lam=0.5, seed=7)   # doctest: +SKIP
    >>> trace = learner.run(1000)                                # doctest: +SKIP
    """

    def __init__(self, game, lam: float = 0.5, averaging: str = FORGETTING, mu_scale: float = 1.0,
                 mu_min: float = 1.0, seed: int = 0, track_empirical: bool = True):
        if mu_scale < 1.0:
            raise ConfigError("mu_scale must be >= 1 so that repeating the last action stays possible")
        if mu_min <= 0:
            raise ConfigError("mu_min must be > 0")
        self.game = game
        self.lam = float(lam)
        self.averaging = averaging
        self.mu_scale = float(mu_scale)
        self.mu_min = float(mu_min)
        self.seed = int(seed)
        self.track_empirical = track_empirical
        # validates lam / averaging early
        RegretState.initial(1, 1, averaging, lam)

    @property
    def solver_name(self) -> str:
        return "trm" if self.averaging == HARMONIC else "rm"

    def run(self, rounds: int) -> ExperimentTrace:
        game = self.game
        n, m = game.n_players, game.n_actions
        state = RegretState.initial(n, m, self.averaging, self.lam)
        uniforms = np.stack([g.random(rounds) for g in player_streams(self.seed, n)], axis=1)
        empirical = EmpiricalDistribution(self.averaging, self.lam) if self.track_empirical else None

        actions = np.empty((rounds, n), dtype=np.int64)
        utils = np.empty((rounds, n))
        lyap = np.empty((rounds, n))
        rows = np.arange(n)
        start = time.perf_counter()
        for r in range(rounds):
            a, U = run_round(game, state, r + 1, uniforms[r], self.mu_scale, self.mu_min)
            actions[r] = a
            utils[r] = U[rows, a]
            lyap[r] = lyapunov_potential(state)
            if empirical is not None:
                empirical.update(a)
        wall = time.perf_counter() - start

        objective = -utils.sum(axis=1)
        feasible = (utils > game.penalty_utility).all(axis=1)
        jain = np.array([_safe_jain(np.abs(u)) for u in utils])
        return ExperimentTrace(self.solver_name, actions, utils, objective, feasible, lyap, jain,
                               empirical=empirical, state=state, wall_time=wall,
                               meta={"lam": self.lam, "averaging": self.averaging, "seed": self.seed})


def _safe_jain(values) -> float:
    if not np.any(values):
        return float("nan")
    return jain_fairness(values)
