"""Fairness and convergence measurements over utility vectors and traces."""
from __future__ import annotations

import numpy as np

from .exceptions import InputError


def jain_fairness(values) -> float:
    """Jain's index ``(sum x)^2 / (n * sum x^2)``; 1 means perfectly equal shares."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0 or not np.any(x):
        raise InputError("jain_fairness needs at least one nonzero value")
    return float(x.sum() ** 2 / (x.size * np.dot(x, x)))


def final_window(length: int) -> int:
    """Length of the tail used as the reference level: the last 10% of rounds."""
    return max(1, length // 10)


def convergence_iteration(objective, rel_tol: float = 0.01, window: int = None) -> int:
    """First (1-based) round from which the objective stays within ``rel_tol`` of
    the mean over the final window; ``len(objective)`` if it never settles."""
    y = np.asarray(objective, dtype=float)
    if y.size == 0:
        raise InputError("convergence_iteration needs a non-empty trace")
    w = final_window(y.size) if window is None else window
    ref = y[-w:].mean()
    tol = rel_tol * abs(ref) if ref != 0 else rel_tol
    inside = np.abs(y - ref) <= tol
    if not inside[-1]:
        return int(y.size)
    outside = np.flatnonzero(~inside)
    return int(outside[-1] + 2) if outside.size else 1


def has_converged(objective, rel_tol: float = 0.01) -> bool:
    """True when the objective is settled for at least the whole final window."""
    y = np.asarray(objective, dtype=float)
    return convergence_iteration(y, rel_tol) <= y.size - final_window(y.size) + 1
