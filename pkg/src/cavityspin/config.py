"""Run-configuration parsing for the command-line front end.

Configs are single JSON documents with lower_snake_case keys.  Complex
numbers are written as ``[re, im]`` pairs (plain numbers are accepted for
real values).  All frequencies and rates are in units of the hopping rate
unless a ``units.scale`` block rescales them globally.  Exactly one task
block must be present; result files embed the resolved config, and the
loader accepts such a result file in place of a config (round-trip runs).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dynamics import EvolutionSettings
from .errors import ConfigError
from .graphs import CavityGraph, chain, from_edge_list, single_cavity
from .params import PhysicalParams
from .regime import RegimeThresholds

TASK_NAMES = ("validate", "map_params", "ground_state", "evolve", "compare", "adiabatic", "sweep")

_PHYSICAL_KEYS = {
    "g1", "g2", "delta1", "delta2", "splitting", "hopping",
    "rabi1", "rabi2", "rabi3", "rabi4", "aux_detuning", "stark_drive",
    "decay", "atoms_per_cavity",
}
_COMPLEX_KEYS = {"rabi1", "rabi2", "rabi3", "rabi4", "stark_drive"}


@dataclass
class RunConfig:
    physical: PhysicalParams
    graph: CavityGraph
    model: str
    seed: int
    task_name: str
    task: dict
    output_path: str | None
    output_format: str
    resolved: dict  # canonical dict embedded into every result file


def _require(condition, message, field=None):
    if not condition:
        raise ConfigError(message, field=field)


def parse_complex(value, field):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError("expected a number or an [re, im] pair", field=field)


def parse_physical(data, scale=1.0) -> PhysicalParams:
    _require(isinstance(data, dict), "expected an object", "physical")
    unknown = set(data) - _PHYSICAL_KEYS
    _require(not unknown, f"unknown keys {sorted(unknown)}", "physical")
    kwargs = {}
    for key, value in data.items():
        field = f"physical.{key}"
        if key == "atoms_per_cavity":
            _require(isinstance(value, int) and value >= 1, "expected a positive integer", field)
            kwargs[key] = value
        elif key in _COMPLEX_KEYS:
            kwargs[key] = parse_complex(value, field)
        else:
            _require(isinstance(value, (int, float)), "expected a number", field)
            kwargs[key] = float(value)
    for required in ("g1", "g2", "delta1", "delta2", "splitting", "hopping"):
        _require(required in kwargs, "missing required key", f"physical.{required}")
    try:
        params = PhysicalParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), field="physical") from exc
    return params.scaled(scale) if scale != 1.0 else params


def parse_graph(data) -> CavityGraph:
    _require(isinstance(data, dict), "expected an object", "graph")
    kind = data.get("kind", "chain")
    try:
        if kind == "chain":
            n = data.get("n")
            _require(isinstance(n, int), "chain needs an integer 'n'", "graph.n")
            if n == 1:
                return single_cavity()
            return chain(n, periodic=bool(data.get("periodic", False)))
        if kind == "edges":
            n = data.get("n")
            edges = data.get("edges")
            _require(isinstance(n, int), "edge list needs an integer 'n'", "graph.n")
            _require(isinstance(edges, list), "edge list needs 'edges'", "graph.edges")
            return from_edge_list(n, edges)
    except ValueError as exc:
        raise ConfigError(str(exc), field="graph") from exc
    raise ConfigError(f"unknown graph kind '{kind}'", field="graph.kind")


def parse_settings(data) -> EvolutionSettings:
    if data is None:
        return EvolutionSettings()
    _require(isinstance(data, dict), "expected an object", "settings")
    allowed = {"krylov_dim", "step_tolerance", "max_step", "renormalize",
               "min_steps_per_period", "use_periodic_cache", "dense_cutoff"}
    unknown = set(data) - allowed
    _require(not unknown, f"unknown keys {sorted(unknown)}", "settings")
    try:
        return EvolutionSettings(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="settings") from exc


def parse_thresholds(data) -> RegimeThresholds:
    if data is None:
        return RegimeThresholds()
    _require(isinstance(data, dict), "expected an object", "thresholds")
    allowed = {"much_ratio", "similar_ratio", "balance_rtol", "budget_margin"}
    unknown = set(data) - allowed
    _require(not unknown, f"unknown keys {sorted(unknown)}", "thresholds")
    try:
        return RegimeThresholds(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="thresholds") from exc


def parse_config(data: dict, expected_task: str | None = None) -> RunConfig:
    """Validate a raw config dict (already JSON-decoded)."""
    _require(isinstance(data, dict), "config must be a JSON object")
    units = data.get("units", {})
    scale = 1.0
    if units:
        _require(isinstance(units, dict) and set(units) <= {"scale"},
                 "units supports only a numeric 'scale'", "units")
        scale = float(units.get("scale", 1.0))
        _require(scale > 0, "scale must be positive", "units.scale")

    _require("physical" in data, "missing 'physical' block", "physical")
    physical = parse_physical(data["physical"], scale)
    graph = parse_graph(data.get("graph", {"kind": "chain", "n": 1}))

    model = data.get("model", "effective")
    _require(model in ("full", "intermediate", "eliminated", "effective"),
             "model must be full|intermediate|eliminated|effective", "model")

    seed = data.get("seed", 0)
    _require(isinstance(seed, int), "seed must be an integer", "seed")

    present = [name for name in TASK_NAMES if name in data]
    _require(len(present) == 1, f"exactly one task block required, found {present or 'none'}")
    task_name = present[0]
    task = data[task_name]
    _require(isinstance(task, dict), "task block must be an object", task_name)
    if expected_task is not None:
        _require(task_name == expected_task,
                 f"config carries task '{task_name}' but the subcommand expects '{expected_task}'",
                 task_name)

    output = data.get("output", {})
    _require(isinstance(output, dict), "output must be an object", "output")
    output_path = output.get("path")
    output_format = output.get("format", "csv")
    _require(output_format in ("csv", "json"), "format must be csv or json", "output.format")

    known_top = {"physical", "graph", "model", "seed", "output", "units", *TASK_NAMES}
    unknown = set(data) - known_top
    _require(not unknown, f"unknown top-level keys {sorted(unknown)}")

    return RunConfig(
        physical=physical,
        graph=graph,
        model=model,
        seed=seed,
        task_name=task_name,
        task=task,
        output_path=output_path,
        output_format=output_format,
        resolved=_canonicalize(data),
    )


def _canonicalize(data):
    """Deep-copy with deterministic ordering (dicts sorted by key)."""
    if isinstance(data, dict):
        return {key: _canonicalize(data[key]) for key in sorted(data)}
    if isinstance(data, list):
        return [_canonicalize(item) for item in data]
    return data


def load_config_file(path: str | Path, expected_task: str | None = None) -> RunConfig:
    """Read a config, accepting a previously emitted result file too.

    JSON result files carry the resolved config under a ``config`` key;
    CSV results carry it on a leading ``# config:`` comment line.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("#"):
        for line in text.splitlines():
            if line.startswith("# config: "):
                data = json.loads(line[len("# config: "):])
                return parse_config(data, expected_task)
        raise ConfigError(f"{path} looks like a CSV result but has no '# config:' line")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "results" in data:
        data = data["config"]
    return parse_config(data, expected_task)
