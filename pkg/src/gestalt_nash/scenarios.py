"""Scenario definitions and JSON config handling.

A config file looks like::

    {
      "schema_version": 1,
      "kind": "two-group",
      "parameters": {"group_sizes": [5, 10], "group_returns": [40, 25], "budget": 3},
      "solver": {"outer_tol": 1e-6},
      "verification": {"n_probes": 100},
      "phenomena": {"support_eps": 1e-3, "baseline_budget": null},
      "rng_seed": 0
    }

Missing keys take the defaults below; ``resolve_config`` fills them in so
the resolved dict alone reproduces a run.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .cognition import ApgConfig
from .engine import GneConfig
from .equilibrium import METHODS, BrSolverConfig
from .game import SecurityGame, validate_game

SCHEMA_VERSION = 1
KINDS = ("homogeneous", "two-group", "heterogeneous-sine", "custom")


class ConfigError(ValueError):
    """Malformed config; the message starts with the offending field."""

    def __init__(self, field_path, msg):
        super().__init__(f"{field_path}: {msg}")
        self.field = field_path


class ScenarioError(ValueError):
    pass


DEFAULT_PARAMETERS = {
    "homogeneous": {
        "n_agents": 10,
        "self_influence": 20.0,
        "cross_influence": 1.0,
        "return": 25.0,
        "budget": 3.0,
    },
    "two-group": {
        "group_sizes": [5, 10],
        "group_returns": [40.0, 25.0],
        "group_names": ["G1", "G2"],
        "self_influence": 20.0,
        "cross_influence": 1.0,
        "budget": 3.0,
    },
    "heterogeneous-sine": {
        "n_agents": 10,
        "self_base": 20.0,
        "self_amplitude": 3.0,
        "cross_influence": 1.0,
        "return_intercept": 15.0,
        "return_slope": 2.0,
        "budget": 3.0,
    },
    "custom": {
        "group_labels": None,
        "budgets": None,
    },
}

DEFAULT_SOLVER = {
    "outer_tol": 1e-6,
    "max_rounds": 1000,
    "br_method": "direct",
    "br_tol": 1e-10,
    "br_max_iters": 10_000,
    "apg_tol": 1e-10,
    "apg_max_iters": 50_000,
    "force_nonconvex_path": False,
    "budget_mode": "beta",
    "alphas": None,
    "calib_tol": 1e-9,
}

DEFAULT_VERIFICATION = {"n_probes": 100}
DEFAULT_PHENOMENA = {"support_eps": 1e-3, "baseline_budget": None}

BUILTINS = {
    "homogeneous": {"kind": "homogeneous", "parameters": {}},
    "two-group": {"kind": "two-group", "parameters": {"budget": 3.0}},
    "two-group-b8": {
        "kind": "two-group",
        "parameters": {"budget": 8.0},
        "phenomena": {"baseline_budget": 3.0},
    },
    "heterogeneous": {"kind": "heterogeneous-sine", "parameters": {}},
}


@dataclass
class ScenarioSpec:
    kind: str
    parameters: dict
    solver: dict = field(default_factory=lambda: dict(DEFAULT_SOLVER))
    verification: dict = field(default_factory=lambda: dict(DEFAULT_VERIFICATION))
    phenomena: dict = field(default_factory=lambda: dict(DEFAULT_PHENOMENA))
    rng_seed: int = 0
    name: str | None = None

    def as_config(self) -> dict:
        cfg = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "parameters": copy.deepcopy(self.parameters),
            "solver": copy.deepcopy(self.solver),
            "verification": copy.deepcopy(self.verification),
            "phenomena": copy.deepcopy(self.phenomena),
            "rng_seed": self.rng_seed,
        }
        if self.name is not None:
            cfg["name"] = self.name
        return cfg


def _merge(section, given, defaults, allow_extra=False):
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError(section, "must be an object")
    unknown = set(given) - set(defaults)
    if unknown and not allow_extra:
        raise ConfigError(f"{section}.{sorted(unknown)[0]}", "unknown field")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


def _num(path, x, positive=False, integer=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(path, f"expected a number, got {x!r}")
    if integer and int(x) != x:
        raise ConfigError(path, f"expected an integer, got {x!r}")
    if positive and not x > 0:
        raise ConfigError(path, f"must be positive, got {x!r}")
    return int(x) if integer else float(x)


def _matrix(path, x):
    try:
        arr = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected an array of numbers") from None
    return arr


def resolve_config(raw: dict) -> ScenarioSpec:
    """Validate a parsed config and fill in defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {"schema_version", "kind", "parameters", "solver", "verification",
             "phenomena", "rng_seed", "name"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {KINDS}, got {kind!r}")

    params = raw.get("parameters", {})
    if kind == "custom":
        params = _merge("parameters", params, {**DEFAULT_PARAMETERS["custom"],
                                               "influence": None, "returns": None})
        for key in ("influence", "returns"):
            if params[key] is None:
                raise ConfigError(f"parameters.{key}", "required for kind 'custom'")
    else:
        params = _merge("parameters", params, DEFAULT_PARAMETERS[kind])

    solver = _merge("solver", raw.get("solver"), DEFAULT_SOLVER)
    if solver["br_method"] not in METHODS:
        raise ConfigError("solver.br_method", f"must be one of {METHODS}")
    for key in ("outer_tol", "br_tol", "apg_tol", "calib_tol"):
        solver[key] = _num(f"solver.{key}", solver[key], positive=True)
    for key in ("max_rounds", "br_max_iters", "apg_max_iters"):
        solver[key] = _num(f"solver.{key}", solver[key], positive=True, integer=True)
    if solver["budget_mode"] not in ("beta", "alpha"):
        raise ConfigError("solver.budget_mode", "must be 'beta' or 'alpha'")
    if solver["budget_mode"] == "alpha" and solver["alphas"] is None:
        raise ConfigError("solver.alphas", "required when budget_mode is 'alpha'")

    verification = _merge("verification", raw.get("verification"), DEFAULT_VERIFICATION)
    verification["n_probes"] = _num("verification.n_probes", verification["n_probes"],
                                    integer=True)
    phenomena = _merge("phenomena", raw.get("phenomena"), DEFAULT_PHENOMENA)
    phenomena["support_eps"] = _num("phenomena.support_eps", phenomena["support_eps"],
                                    positive=True)
    seed = _num("rng_seed", raw.get("rng_seed", 0), integer=True)

    spec = ScenarioSpec(kind, params, solver, verification, phenomena, seed, raw.get("name"))
    build_scenario(spec, validate=False)  # surfaces shape errors early
    return spec


def load_config(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return resolve_config(raw)


def builtin_config(name: str) -> dict:
    if name not in BUILTINS:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(BUILTINS)}")
    raw = copy.deepcopy(BUILTINS[name])
    raw["name"] = name
    return resolve_config(raw).as_config()


def _budget(path, b, n):
    if isinstance(b, list):
        if len(b) != n:
            raise ConfigError(path, f"expected {n} budgets, got {len(b)}")
        return np.array([_num(path, x) for x in b])
    return np.full(n, _num(path, b))


def build_scenario(spec: ScenarioSpec, validate: bool = True):
    """Build the game and optional group labels.

    Returns
    -------
    game : SecurityGame
    labels : list of str or None
    """
    p = spec.parameters
    labels = None
    if spec.kind == "homogeneous":
        n = _num("parameters.n_agents", p["n_agents"], positive=True, integer=True)
        R = np.full((n, n), _num("parameters.cross_influence", p["cross_influence"]))
        np.fill_diagonal(R, _num("parameters.self_influence", p["self_influence"]))
        r = np.full(n, _num("parameters.return", p["return"]))
        b = _budget("parameters.budget", p["budget"], n)
    elif spec.kind == "two-group":
        sizes = [_num("parameters.group_sizes", s, positive=True, integer=True)
                 for s in p["group_sizes"]]
        rets = p["group_returns"]
        names = p["group_names"]
        if len(rets) != len(sizes) or len(names) != len(sizes):
            raise ConfigError("parameters.group_returns",
                              "group_sizes, group_returns and group_names must align")
        n = sum(sizes)
        R = np.full((n, n), _num("parameters.cross_influence", p["cross_influence"]))
        np.fill_diagonal(R, _num("parameters.self_influence", p["self_influence"]))
        r = np.concatenate([np.full(s, _num("parameters.group_returns", x))
                            for s, x in zip(sizes, rets)])
        labels = [str(nm) for s, nm in zip(sizes, names) for _ in range(s)]
        b = _budget("parameters.budget", p["budget"], n)
    elif spec.kind == "heterogeneous-sine":
        n = _num("parameters.n_agents", p["n_agents"], positive=True, integer=True)
        k = np.arange(1, n + 1)  # 1-based agent numbers, sine in radians
        R = np.full((n, n), _num("parameters.cross_influence", p["cross_influence"]))
        amp = _num("parameters.self_amplitude", p["self_amplitude"])
        base = _num("parameters.self_base", p["self_base"])
        np.fill_diagonal(R, amp * np.sin(k) + base)
        r = (_num("parameters.return_intercept", p["return_intercept"])
             + _num("parameters.return_slope", p["return_slope"]) * k)
        b = _budget("parameters.budget", p["budget"], n)
    else:
        R = _matrix("parameters.influence", p["influence"])
        r = _matrix("parameters.returns", p["returns"]).reshape(-1)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ConfigError("parameters.influence", f"must be square, got shape {R.shape}")
        n = R.shape[0]
        if r.shape != (n,):
            raise ConfigError("parameters.returns", f"expected {n} entries")
        b = None if p["budgets"] is None else _budget("parameters.budgets", p["budgets"], n)
        if p["group_labels"] is not None:
            if len(p["group_labels"]) != n:
                raise ConfigError("parameters.group_labels", f"expected {n} labels")
            labels = [str(x) for x in p["group_labels"]]

    game = SecurityGame(R, r, b)
    if validate:
        report = validate_game(game)
        if not report.ok:
            raise ScenarioError("invalid game: " + "; ".join(report.violations))
    return game, labels


def gne_config(spec: ScenarioSpec, threads=None) -> GneConfig:
    s = spec.solver
    return GneConfig(
        outer_tol=s["outer_tol"],
        max_rounds=s["max_rounds"],
        br_config=BrSolverConfig(method=s["br_method"], tol=s["br_tol"],
                                 max_iters=s["br_max_iters"]),
        apg_config=ApgConfig(tol=s["apg_tol"], max_iters=s["apg_max_iters"],
                             force_nonconvex_path=s["force_nonconvex_path"]),
        budget_mode=s["budget_mode"],
        alphas=None if s["alphas"] is None else np.asarray(s["alphas"], dtype=float),
        calib_tol=s["calib_tol"],
        threads=threads,
    )
