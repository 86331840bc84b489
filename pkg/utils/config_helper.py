"""
Configuration helper for scenario files
Loads a YAML scenario, checks every field and reports problems with their line
"""

import dataclasses
import typing
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from mechanism import MECHANISM_KINDS
from network.generators import GRAPH_KINDS
from rewards.distribution import InvalidDistribution, PiecewiseDistribution
from rewards.partition import REPLICA_MODES
from simulation.scenario import (ArrivalConfig, AuditConfig, GraphConfig, RegimeConfig,
                                 ReplicaConfig, ScenarioConfig, SimulationConfig,
                                 SweepConfig, ToleranceConfig)
from utils.errors import SimulatorError

DEFAULT_CONFIG = Path(__file__).parent.parent / "config.yaml"

ARRIVAL_ORDERS = ('identity', 'permutation', 'shuffle')
FILE_GRAPH_KINDS = ('edge_list', 'inline')

# top-level keys of the `scenario:` section
SCENARIO_FIELDS = ('name', 'n_agents', 'mechanism', 'dist_a', 'dist_b', 'test_positions')


class ConfigError(SimulatorError):
    """Invalid scenario file; carries the offending field and line"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None,
                 source: Optional[str] = None):
        self.field = field
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = ": ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


def _line_index(node, prefix: Tuple[str, ...] = ()) -> Dict[Tuple[str, ...], int]:
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = prefix + (str(key_node.value),)
            lines[path] = key_node.start_mark.line + 1
            lines.update(_line_index(value_node, path))
    return lines


class _Reader:
    """Field access with line lookup for error messages"""

    def __init__(self, lines: Dict[Tuple[str, ...], int], source: str):
        self.lines = lines
        self.source = source

    def error(self, path: Tuple[str, ...], message: str) -> ConfigError:
        line = None
        for cut in range(len(path), 0, -1):
            line = self.lines.get(path[:cut])
            if line is not None:
                break
        return ConfigError(message, '.'.join(path), line, self.source)

    def coerce(self, value: Any, hint, path: Tuple[str, ...]):
        origin = typing.get_origin(hint)
        args = typing.get_args(hint)
        if origin is typing.Union and type(None) in args:
            if value is None:
                return None
            inner = [a for a in args if a is not type(None)][0]
            return self.coerce(value, inner, path)
        if hint is bool:
            if not isinstance(value, bool):
                raise self.error(path, f"expected true/false, got {value!r}")
            return value
        if hint is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.error(path, f"expected an integer, got {value!r}")
            return value
        if hint is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self.error(path, f"expected a number, got {value!r}")
            return float(value)
        if hint is str:
            if not isinstance(value, str):
                raise self.error(path, f"expected a string, got {value!r}")
            return value
        if origin in (list, typing.List):
            if not isinstance(value, list):
                raise self.error(path, f"expected a list, got {value!r}")
            return [self.coerce(item, args[0], path + (str(i),)) for i, item in enumerate(value)]
        return value


def _fill(cls, raw: Any, reader: _Reader, path: Tuple[str, ...], allowed=None):
    """Build dataclass `cls` from a mapping, rejecting unknown keys"""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise reader.error(path, "expected a mapping")
    hints = typing.get_type_hints(cls)
    names = allowed or [f.name for f in dataclasses.fields(cls)]
    unknown = sorted(set(raw) - set(names))
    if unknown:
        raise reader.error(path + (str(unknown[0]),), f"unknown field '{unknown[0]}'")
    values = {name: reader.coerce(raw[name], hints[name], path + (name,)) for name in names if name in raw}
    return values


def parse_scenario(data: Dict, lines: Optional[Dict] = None, source: str = '<config>',
                   base_dir: Optional[Path] = None):
    """
    Turn a loaded YAML mapping into a validated ScenarioConfig

    Args:
        data: Result of yaml.safe_load
        lines: Key path -> line number, from yaml.compose
        source: Name used in error messages
        base_dir: Directory that relative edge-list paths are resolved against

    Returns:
        ScenarioConfig

    Raises:
        ConfigError: naming the field and line of the first problem
    """
    reader = _Reader(lines or {}, source)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", source=source)

    sections = {
        'graph': GraphConfig, 'regime': RegimeConfig, 'arrival': ArrivalConfig,
        'replica': ReplicaConfig, 'simulation': SimulationConfig, 'tolerances': ToleranceConfig,
        'audit': AuditConfig, 'sweep': SweepConfig,
    }
    unknown = sorted(set(data) - set(sections) - {'scenario'})
    if unknown:
        raise reader.error((str(unknown[0]),), f"unknown section '{unknown[0]}'")

    top = _fill(ScenarioConfig, data.get('scenario'), reader, ('scenario',), SCENARIO_FIELDS)
    parts = {name: cls(**_fill(cls, data.get(name), reader, (name,))) for name, cls in sections.items()}
    config = ScenarioConfig(**top, **parts)
    _validate(config, reader, base_dir)
    return config


def _validate(config, reader: _Reader, base_dir: Optional[Path]):
    if config.n_agents < 1:
        raise reader.error(('scenario', 'n_agents'), "must be at least 1")
    if config.mechanism not in MECHANISM_KINDS:
        raise reader.error(('scenario', 'mechanism'),
                           f"unknown mechanism '{config.mechanism}' (one of {', '.join(MECHANISM_KINDS)})")
    means = {}
    for name in ('dist_a', 'dist_b'):
        try:
            means[name] = PiecewiseDistribution(getattr(config, name)).mean()
        except InvalidDistribution as e:
            raise reader.error(('scenario', name), str(e))
    if means['dist_a'] <= means['dist_b']:
        raise reader.error(('scenario', 'dist_a'),
                           f"mean(dist_a) = {means['dist_a']:.6g} must exceed mean(dist_b) = "
                           f"{means['dist_b']:.6g}; swap dist_a and dist_b to relabel the actions")

    graph = config.graph
    if graph.kind not in GRAPH_KINDS + FILE_GRAPH_KINDS:
        raise reader.error(('graph', 'kind'), f"unknown graph kind '{graph.kind}'")
    if graph.kind == 'edge_list':
        if not graph.path:
            raise reader.error(('graph', 'path'), "edge_list graphs need a path")
        path = Path(graph.path)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.exists():
            raise reader.error(('graph', 'path'), f"edge list '{path}' not found")
        graph.path = str(path)
    if graph.kind == 'inline':
        for i, pair in enumerate(graph.edges or []):
            if len(pair) != 2 or not all(0 <= a < config.n_agents for a in pair) or pair[0] == pair[1]:
                raise reader.error(('graph', 'edges', str(i)), f"bad edge {pair!r}")
    if config.regime.alpha < 0 or config.regime.beta < 0:
        raise reader.error(('regime',), "alpha and beta must be non-negative")

    if config.arrival.order not in ARRIVAL_ORDERS:
        raise reader.error(('arrival', 'order'), f"unknown arrival order '{config.arrival.order}'")
    if config.arrival.order == 'permutation':
        if sorted(config.arrival.permutation or []) != list(range(config.n_agents)):
            raise reader.error(('arrival', 'permutation'), f"must list agents 0..{config.n_agents - 1} once each")

    if config.replica.mode not in REPLICA_MODES:
        raise reader.error(('replica', 'mode'), f"unknown replica mode '{config.replica.mode}'")
    if config.replica.count is not None and config.replica.count < 1:
        raise reader.error(('replica', 'count'), "must be at least 1")
    if config.replica.granularity < 1:
        raise reader.error(('replica', 'granularity'), "must be at least 1")

    if config.simulation.replications < 1:
        raise reader.error(('simulation', 'replications'), "must be at least 1")
    if config.simulation.seed < 0:
        raise reader.error(('simulation', 'seed'), "must be non-negative")
    if config.simulation.max_workers < 1:
        raise reader.error(('simulation', 'max_workers'), "must be at least 1")
    for name in ('partition', 'bisection', 'comb'):
        if getattr(config.tolerances, name) <= 0:
            raise reader.error(('tolerances', name), "must be positive")
    if config.audit.n_outer < 1 or config.audit.min_matched < 2:
        raise reader.error(('audit',), "n_outer must be >= 1 and min_matched >= 2")
    for agent in config.audit.agents or []:
        if not 0 <= agent < config.n_agents:
            raise reader.error(('audit', 'agents'), f"agent {agent} not in 0..{config.n_agents - 1}")
    if config.sweep.replications < 1 or not config.sweep.n_grid:
        raise reader.error(('sweep',), "needs a non-empty n_grid and replications >= 1")


def load_scenario(path=None):
    """
    Load and validate a scenario YAML file

    Args:
        path: Scenario file (default: the root config.yaml)

    Returns:
        ScenarioConfig
    """
    path = Path(path) if path is not None else DEFAULT_CONFIG
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario file: {e.strerror}", source=str(path))
    return loads_scenario(text, str(path), path.parent)


def loads_scenario(text: str, source: str = '<string>', base_dir: Optional[Path] = None):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError(f"invalid YAML: {getattr(e, 'problem', e)}",
                          line=mark.line + 1 if mark else None, source=source)
    return parse_scenario(data, _line_index(node), source, base_dir)
