"""Experiment configuration: dataclasses, JSON round-tripping, presets, validation.

Units used throughout the package: meters, seconds, MHz (wireless bandwidth),
Mbps (wired bandwidth, rates), megabytes (task / service-entity size),
gigacycles (task work) and GHz (CPU capacity).
"""
from __future__ import annotations

import copy
import dataclasses
import json
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .exceptions import ConfigError

SOLVERS = ("rm", "trm", "es")
MODES = ("snapshot", "mobile")


@dataclass
class RadioParams:
    noise_dbm: float = -114.0
    pathloss_exponent: float = 3.5
    reference_distance: float = 1.0
    reference_gain_db: float = -30.0


@dataclass
class NodeParams:
    """Per-kind server parameters (all RSUs share one set, the BS has its own)."""

    bandwidth_mhz: float
    upload_price: float
    compute_price: float
    capacity_ghz: float
    radio: RadioParams = field(default_factory=RadioParams)


def _rsu_defaults() -> NodeParams:
    return NodeParams(bandwidth_mhz=1.0, upload_price=2.0, compute_price=10.0, capacity_ghz=20.0,
                      radio=RadioParams(noise_dbm=-114.0, pathloss_exponent=3.5))


def _bs_defaults() -> NodeParams:
    # macrocell: elevated antenna, near free-space decay over the whole segment
    return NodeParams(bandwidth_mhz=0.25, upload_price=20.0, compute_price=100.0, capacity_ghz=30.0,
                      radio=RadioParams(noise_dbm=-120.0, pathloss_exponent=2.0))


@dataclass
class BackhaulParams:
    wired_bandwidth_mbps: float = 100.0
    hop_delay: float = 0.02
    migration_price: float = 0.002
    service_entity_size_mb: float = 500.0


@dataclass
class ScenarioConfig:
    n_rsus: int = 2
    n_vehicles: int = 10
    inter_rsu_distance: float = 3000.0
    coverage_radius: float = 500.0
    n_lanes: int = 6
    lane_width: float = 3.5
    rsu_offset: float = 5.0
    bs_offset: float = 50.0
    lane_speeds_kmh: list = field(default_factory=lambda: [90.0, 100.0, 120.0])
    task_size_mb: float = 200.0
    task_cycles: list = field(default_factory=lambda: [0.5, 1.2])
    capacity_range: list = field(default_factory=lambda: [1.0, 3.0])
    transmit_power_dbm: float = 20.0
    rsu: NodeParams = field(default_factory=_rsu_defaults)
    bs: NodeParams = field(default_factory=_bs_defaults)
    backhaul: BackhaulParams = field(default_factory=BackhaulParams)


@dataclass
class GameConfig:
    beta: float = 1.0
    gamma: float = 1.0
    penalty: float = 1e6


@dataclass
class LearnerConfig:
    lam: float = 0.5
    rounds: int = 1000
    mode: str = "snapshot"
    dt: float = 1.0
    mu_scale: float = 1.0
    mu_min: float = 1.0
    convergence_rel_tol: float = 0.01


@dataclass
class Sweep:
    """One-parameter sweep: ``param`` is a dotted path such as ``learner.lam``."""

    param: str
    values: list


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    game: GameConfig = field(default_factory=GameConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    solvers: list = field(default_factory=lambda: ["rm", "trm", "es"])
    seeds: list = field(default_factory=lambda: [0])
    output_dir: str = "results"
    es_cap: int = 10**7
    sweep: Optional[Sweep] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data, "config")

    def override(self, dotted: str, value: Any) -> "ExperimentConfig":
        """Return a copy with one (possibly nested) field replaced."""
        new = copy.deepcopy(self)
        *path, leaf = dotted.split(".")
        obj = new
        for name in path:
            if not dataclasses.is_dataclass(obj) or not hasattr(obj, name):
                raise ConfigError(f"unknown config field: {dotted}")
            obj = getattr(obj, name)
        if not dataclasses.is_dataclass(obj) or leaf not in {f.name for f in dataclasses.fields(obj)}:
            raise ConfigError(f"unknown config field: {dotted}")
        setattr(obj, leaf, value)
        return new


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        tp = hints[name]
        if typing.get_origin(tp) is typing.Union:
            args = [a for a in typing.get_args(tp) if a is not type(None)]
            if value is None:
                kwargs[name] = None
                continue
            tp = args[0]
        if dataclasses.is_dataclass(tp):
            kwargs[name] = _build(tp, value, f"{where}.{name}")
        else:
            kwargs[name] = value
    return cls(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    cfg = ExperimentConfig.from_dict(data)
    validate(cfg)
    return cfg


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _check_range(rng, name: str) -> None:
    _check(isinstance(rng, (list, tuple)) and len(rng) == 2, f"{name} must be a [min, max] pair")
    lo, hi = rng
    _check(math.isfinite(lo) and math.isfinite(hi), f"{name} must be finite")
    _check(lo <= hi, f"{name}: min {lo} > max {hi}")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    s = cfg.scenario
    _check(int(s.n_rsus) == s.n_rsus and s.n_rsus >= 1, "scenario.n_rsus must be >= 1")
    _check(int(s.n_vehicles) == s.n_vehicles and s.n_vehicles > 0, "scenario.n_vehicles must be > 0")
    _check(s.inter_rsu_distance > 0, "scenario.inter_rsu_distance must be > 0")
    _check(s.coverage_radius > 0, "scenario.coverage_radius must be > 0")
    _check(s.n_lanes >= 2 and s.n_lanes % 2 == 0, "scenario.n_lanes must be a positive even number")
    _check(len(s.lane_speeds_kmh) == s.n_lanes // 2, "scenario.lane_speeds_kmh needs one speed per lane pair")
    _check(all(v > 0 for v in s.lane_speeds_kmh), "lane speeds must be > 0")
    _check(s.task_size_mb >= 0, "scenario.task_size_mb must be >= 0")
    _check_range(s.task_cycles, "scenario.task_cycles")
    _check(s.task_cycles[0] > 0, "scenario.task_cycles must be > 0")
    _check_range(s.capacity_range, "scenario.capacity_range")
    _check(s.capacity_range[0] > 0, "scenario.capacity_range must be > 0")
    _check(math.isfinite(s.transmit_power_dbm), "scenario.transmit_power_dbm must be finite")
    for kind, p in (("rsu", s.rsu), ("bs", s.bs)):
        _check(p.bandwidth_mhz > 0, f"scenario.{kind}.bandwidth_mhz must be > 0")
        _check(p.upload_price >= 0 and p.compute_price >= 0, f"scenario.{kind} prices must be >= 0")
        _check(p.capacity_ghz > 0, f"scenario.{kind}.capacity_ghz must be > 0")
        _check(p.capacity_ghz >= s.capacity_range[0], f"scenario.{kind}.capacity_ghz below capacity_range")
        _check(math.isfinite(p.radio.noise_dbm), f"scenario.{kind}.radio.noise_dbm must be finite")
        _check(p.radio.pathloss_exponent >= 2, f"scenario.{kind}.radio.pathloss_exponent must be >= 2")
        _check(p.radio.reference_distance > 0, f"scenario.{kind}.radio.reference_distance must be > 0")
    b = s.backhaul
    _check(b.wired_bandwidth_mbps > 0, "backhaul.wired_bandwidth_mbps must be > 0")
    _check(b.hop_delay >= 0 and b.migration_price >= 0 and b.service_entity_size_mb >= 0,
           "backhaul parameters must be >= 0")

    g = cfg.game
    _check(g.beta > 0 and g.gamma > 0, "game.beta and game.gamma must be > 0")
    _check(g.penalty > 0, "game.penalty must be > 0")

    lc = cfg.learner
    _check(0.0 <= lc.lam <= 1.0, f"learner.lam must lie in [0, 1], got {lc.lam}")
    _check(int(lc.rounds) == lc.rounds and lc.rounds >= 1, "learner.rounds must be >= 1")
    _check(lc.mode in MODES, f"learner.mode must be one of {MODES}")
    _check(lc.dt > 0, "learner.dt must be > 0")
    _check(lc.mu_scale >= 1.0, "learner.mu_scale must be >= 1")
    _check(lc.mu_min > 0, "learner.mu_min must be > 0")
    _check(lc.convergence_rel_tol > 0, "learner.convergence_rel_tol must be > 0")

    _check(all(sv in SOLVERS for sv in cfg.solvers), f"solvers must be drawn from {SOLVERS}")
    _check(len(set(cfg.solvers)) == len(cfg.solvers), "duplicate solver")
    _check(all(int(x) == x for x in cfg.seeds), "seeds must be integers")
    _check(cfg.es_cap >= 1, "es_cap must be >= 1")
    if cfg.sweep is not None:
        _check(len(cfg.sweep.values) > 0, "sweep.values must be non-empty")
        cfg.override(cfg.sweep.param, cfg.sweep.values[0])
    return cfg


def preset(name: str) -> ExperimentConfig:
    """Embedded layouts: ``scenario1`` (1 BS + 2 RSUs, 10 vehicles) and
    ``scenario2`` (1 BS + 10 RSUs, 100 vehicles)."""
    if name == "scenario1":
        cfg = ExperimentConfig()
        cfg.learner.rounds = 500
        return cfg
    if name == "scenario2":
        cfg = ExperimentConfig()
        cfg.scenario.n_rsus = 10
        cfg.scenario.n_vehicles = 100
        cfg.learner.rounds = 2000
        cfg.solvers = ["rm", "trm"]
        return cfg
    if name == "lambda_sweep":
        cfg = preset("scenario2")
        cfg.solvers = ["rm"]
        cfg.sweep = Sweep(param="learner.lam", values=[0.5, 0.99, 0.9999])
        return cfg
    if name == "dr_sweep":
        cfg = preset("scenario2")
        cfg.solvers = ["rm"]
        cfg.sweep = Sweep(param="scenario.inter_rsu_distance", values=[3000.0, 6000.0, 9000.0])
        return cfg
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")


PRESETS = ("scenario1", "scenario2", "lambda_sweep", "dr_sweep")
