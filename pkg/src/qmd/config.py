"""JSON experiment configuration."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .engine import GameDims
from .strategies import (
    ClassicalGreedyResponder,
    MagnusPlan,
    Responder,
    Strategy2Responder,
    Strategy3Responder,
    StrategyError,
    identity_responder,
    single_hadamard_responder,
    strategy1_responder,
)

SEED_ENV = "QMD_SEED"
DEREK_KINDS = ("identity", "strategy1", "single_h", "strategy2", "strategy3", "classical_greedy")
MAGNUS_KINDS = ("ruler", "list", "constant", "random")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    visit: float = 1e-9
    attain: float = 1e-6
    restricted: float = 1e-12


@dataclass(frozen=True)
class Outputs:
    trace_csv: Optional[str] = "trace.csv"
    summary_json: Optional[str] = "summary.json"
    heatmap_pgm: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    steps: int
    magnus: dict
    derek: dict
    start: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    outputs: Outputs = field(default_factory=Outputs)

    @property
    def dims(self) -> GameDims:
        return GameDims(self.n)

    def plan(self) -> MagnusPlan:
        kind = self.magnus["kind"]
        payload = self.magnus.get("payload")
        if kind == "ruler":
            return MagnusPlan.ruler()
        if kind == "list":
            return MagnusPlan.explicit(payload)
        if kind == "constant":
            return MagnusPlan.constant(payload)
        return MagnusPlan.random(self.magnus["seed"], payload)

    def responder(self) -> Responder:
        """A fresh responder; responders are single-use."""
        d = self.derek
        kind = d["kind"]
        if kind == "identity":
            return identity_responder()
        if kind == "strategy1":
            return strategy1_responder()
        if kind == "single_h":
            return single_hadamard_responder()
        if kind == "strategy2":
            return Strategy2Responder(self.n, d["p"], d["q"], self.start)
        if kind == "strategy3":
            return Strategy3Responder(
                self.n, d["p"], self.start, d.get("hadamard_steps", [1])
            )
        return ClassicalGreedyResponder(self.n, d["p"], d["c"], self.start)


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return obj[key]


def _object(value: Any, what: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a JSON object, got {value!r}")
    return value


def _int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return value


def parse_config(raw: dict, env: Optional[dict] = None) -> ExperimentConfig:
    env = os.environ if env is None else env
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    n = _int(_require(raw, "n", "config"), "n")
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    steps = _int(_require(raw, "steps", "config"), "steps")
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    start = _int(raw.get("start", 0), "start")
    if not 0 <= start < n:
        raise ConfigError(f"start {start} out of range for n={n}")

    magnus = dict(_object(_require(raw, "magnus", "config"), "magnus"))
    mkind = _require(magnus, "kind", "magnus")
    if mkind not in MAGNUS_KINDS:
        raise ConfigError(f"magnus.kind must be one of {MAGNUS_KINDS}, got {mkind!r}")
    if mkind in ("list", "constant"):
        _require(magnus, "payload", "magnus")
    if mkind == "random":
        if SEED_ENV in env:
            try:
                magnus["seed"] = int(env[SEED_ENV])
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}")
        _int(_require(magnus, "seed", "magnus"), "magnus.seed")

    derek = dict(_object(_require(raw, "derek", "config"), "derek"))
    dkind = _require(derek, "kind", "derek")
    if dkind not in DEREK_KINDS:
        raise ConfigError(f"derek.kind must be one of {DEREK_KINDS}, got {dkind!r}")
    if dkind == "strategy2":
        p = _int(_require(derek, "p", "derek"), "derek.p")
        q = _int(_require(derek, "q", "derek"), "derek.q")
        if n % (p * q):
            raise ConfigError(f"strategy2 requires pq | n; got p={p}, q={q}, n={n}")
    elif dkind == "strategy3":
        p = _int(_require(derek, "p", "derek"), "derek.p")
        if p <= 3 or n % p:
            raise ConfigError(f"strategy3 requires p > 3 and p | n; got p={p}, n={n}")
    elif dkind == "classical_greedy":
        _int(_require(derek, "p", "derek"), "derek.p")
        _int(_require(derek, "c", "derek"), "derek.c")

    try:
        tol = Tolerances(**_object(raw.get("tolerances", {}), "tolerances"))
        outputs = Outputs(**_object(raw.get("outputs", {}), "outputs"))
    except TypeError as exc:
        raise ConfigError(f"unknown field: {exc}") from exc
    cfg = ExperimentConfig(n, steps, magnus, derek, start, tol, outputs)
    # surface strategy and plan errors before anything runs
    try:
        cfg.responder()
        cfg.plan().magnitudes(n, steps)
    except (StrategyError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path, env: Optional[dict] = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(raw, env)
