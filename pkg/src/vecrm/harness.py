"""Experiment orchestration: seeded (solver, seed) cells and the files they produce.

A run is a grid of independent cells. Each cell rebuilds its scenario from
the seed, so cells can be farmed out to worker processes without changing
a single output byte; only the wall-clock fields of ``summary.json`` vary
between runs.
"""
from __future__ import annotations

import hashlib
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import exhaustive_search, run_trm, search_trace
from .config import ExperimentConfig, validate
from .exceptions import EnumerationTooLarge, VecrmError
from .game import TaskAssignmentGame
from .learner import ExperimentTrace, RegretMatchingLearner
from .metrics import convergence_iteration, has_converged
from .scenario import build_scenario

TRACE_COLUMNS = ("round", "objective", "lyapunov_max", "jain", "action_profile_hash")
HASH_CHARS = 16


class OutputError(VecrmError, OSError):
    """The results directory could not be written."""


@dataclass
class CellResult:
    solver: str
    seed: int
    variant: Optional[str]
    objective: np.ndarray
    lyapunov_max: np.ndarray
    jain: np.ndarray
    actions: np.ndarray
    feasible: np.ndarray
    wall_time: float
    rel_tol: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_trace(cls, trace: ExperimentTrace, seed: int, variant: Optional[str], rel_tol: float):
        return cls(trace.solver, seed, variant, trace.objective, trace.lyapunov_max, trace.jain,
                   trace.actions, trace.feasible, trace.wall_time, rel_tol, dict(trace.meta))

    @property
    def trace_name(self) -> str:
        stem = f"trace_{self.solver}_{self.seed}"
        return f"{stem}_{self.variant}.csv" if self.variant else f"{stem}.csv"

    def summary(self) -> dict:
        if len(self.objective) == 0:
            return {"min_objective": None, "final_objective": None, "convergence_iteration": None,
                    "converged": False, "feasible": False, "fairness": None, "rounds": 0,
                    "wall_time": self.wall_time}
        conv = convergence_iteration(self.objective, self.rel_tol)
        jain = float(self.jain[-1])
        return {
            "min_objective": float(self.objective.min()),
            "final_objective": float(self.objective[-1]),
            "convergence_iteration": conv,
            "converged": has_converged(self.objective, self.rel_tol),
            "feasible": bool(self.feasible[-1]),
            "fairness": None if np.isnan(jain) else jain,
            "lyapunov_final": float(self.lyapunov_max[-1]),
            "rounds": int(len(self.objective)),
            "wall_time": self.wall_time,
        }


@dataclass
class ExperimentResults:
    config: ExperimentConfig
    cells: list

    def by_variant(self):
        groups = {}
        for c in self.cells:
            groups.setdefault(c.variant, []).append(c)
        return groups


def profile_hash(actions) -> str:
    """Short stable digest of one joint action."""
    text = ",".join(str(int(a)) for a in actions)
    return hashlib.sha256(text.encode("ascii")).hexdigest()[:HASH_CHARS]


def variants(config: ExperimentConfig):
    """``[(label, config)]``; a single unlabeled entry unless a sweep is set."""
    if config.sweep is None:
        return [(None, config)]
    leaf = config.sweep.param.rsplit(".", 1)[-1]
    return [(f"{leaf}-{v!r}", config.override(config.sweep.param, v)) for v in config.sweep.values]


def build_game(config: ExperimentConfig, seed: int) -> TaskAssignmentGame:
    g, lc = config.game, config.learner
    scenario = build_scenario(config.scenario, seed)
    return TaskAssignmentGame(scenario, g.beta, g.gamma, g.penalty, mode=lc.mode, t0=0.0, dt=lc.dt)


def run_cell(config: ExperimentConfig, solver: str, seed: int, variant: Optional[str] = None) -> CellResult:
    game = build_game(config, seed)
    lc = config.learner
    if solver == "es":
        trace = search_trace(game, exhaustive_search(game, cap=config.es_cap))
    elif solver == "trm":
        trace = run_trm(game, lc.rounds, seed=seed, mu_scale=lc.mu_scale, mu_min=lc.mu_min, track_empirical=False)
    else:
        learner = RegretMatchingLearner(game, lam=lc.lam, mu_scale=lc.mu_scale, mu_min=lc.mu_min, seed=seed,
                                        track_empirical=False)
        trace = learner.run(lc.rounds)
    return CellResult.from_trace(trace, seed, variant, lc.convergence_rel_tol)


def _run_cell_args(args):
    return run_cell(*args)


def _check_es_cap(config: ExperimentConfig) -> None:
    if "es" not in config.solvers:
        return
    total = (config.scenario.n_rsus + 1) ** config.scenario.n_vehicles
    if total > config.es_cap:
        raise EnumerationTooLarge(f"exhaustive search over {total:.3g} joint profiles exceeds es_cap "
                                  f"{config.es_cap:.3g}; drop 'es' from the solvers")


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResults:
    """Run every (variant, solver, seed) cell; results come back in grid order."""
    validate(config)
    grid = []
    for label, cfg in variants(config):
        _check_es_cap(cfg)
        for solver in cfg.solvers:
            for seed in cfg.seeds:
                grid.append((cfg, solver, int(seed), label))
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_args, grid))
    else:
        cells = [run_cell(*args) for args in grid]
    return ExperimentResults(config, cells)


def trace_csv(cell: CellResult) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for r in range(len(cell.objective)):
        lines.append(",".join((
            str(r + 1),
            repr(float(cell.objective[r])),
            repr(float(cell.lyapunov_max[r])),
            repr(float(cell.jain[r])),
            profile_hash(cell.actions[r]),
        )))
    return "\n".join(lines) + "\n"


def _solver_block(cells) -> dict:
    out = {}
    for c in cells:
        entry = out.setdefault(c.solver, {"seeds": {}})
        entry["seeds"][str(c.seed)] = c.summary()
    for entry in out.values():
        rows = list(entry["seeds"].values())
        convs = [r["convergence_iteration"] for r in rows if r["convergence_iteration"] is not None]
        finals = [r["final_objective"] for r in rows if r["final_objective"] is not None]
        mins = [r["min_objective"] for r in rows if r["min_objective"] is not None]
        entry["min_objective"] = min(mins) if mins else None
        entry["mean_final_objective"] = statistics.fmean(finals) if finals else None
        entry["median_convergence_iteration"] = statistics.median(convs) if convs else None
    return out


def summarize(results: ExperimentResults) -> dict:
    cfg = results.config
    if cfg.sweep is None:
        return {"solvers": _solver_block(results.cells)}
    groups = results.by_variant()
    return {
        "sweep": {
            "param": cfg.sweep.param,
            "variants": [{"label": label, "value": value, "solvers": _solver_block(groups.get(label, []))}
                         for (label, _), value in zip(variants(cfg), cfg.sweep.values)],
        },
    }


def emit_outputs(results: ExperimentResults, out_dir=None) -> list:
    """Write traces, ``summary.json`` and ``config.json``; returns the written paths."""
    out = Path(out_dir if out_dir is not None else results.config.output_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for cell in results.cells:
            path = out / cell.trace_name
            path.write_bytes(trace_csv(cell).encode("utf-8"))
            written.append(path)
        path = out / "summary.json"
        path.write_bytes((json.dumps(summarize(results), indent=2, sort_keys=True) + "\n").encode("utf-8"))
        written.append(path)
        path = out / "config.json"
        path.write_bytes(results.config.to_json().encode("utf-8"))
        written.append(path)
    except OSError as exc:
        raise OutputError(f"cannot write results to {out}: {exc}") from exc
    return written
