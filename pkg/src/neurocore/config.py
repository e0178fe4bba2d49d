"""Run configuration: a sectioned key-value text file.

Sections:

    [simulation]              duration, seed, backend, analysis window ...
    [population <name>]       size plus the neuron parameters
    [generator <name>]        Poisson source: size, rate, targets, weight, prob
    [connection <pre> -> <post>]   weight and connection probability

The shipped default (``data/bg_default.cfg``) encodes the basal ganglia
circuit; a test pins it against the table constants in :mod:`neurocore.bg`.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .network import ConfigError, ConnectionSpec, PopulationSpec
from .neuron import NeuronParams

DEFAULT_CONFIG_RESOURCE = "bg_default.cfg"


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    size: int
    rate_hz: float
    targets: tuple[str, ...]
    weight: float
    prob: float


@dataclass
class RunConfig:
    populations: dict[str, tuple[int, NeuronParams]]
    generators: list[GeneratorSpec]
    connections: list[ConnectionSpec]
    duration_ms: float = 1000.0
    settle_ms: float = 200.0
    seed: int = 1
    backend: str = "fixed"
    threads: int = 1
    record: tuple[str, ...] | None = None
    out_dir: str = "out"

    def population_specs(self) -> list[PopulationSpec]:
        specs = [
            PopulationSpec(name=name, size=size, params=params)
            for name, (size, params) in self.populations.items()
        ]
        specs.extend(
            PopulationSpec(name=g.name, size=g.size, rate_hz=g.rate_hz)
            for g in self.generators
        )
        return specs

    def connection_specs(self) -> list[ConnectionSpec]:
        conns = list(self.connections)
        for g in self.generators:
            conns.extend(
                ConnectionSpec(pre=g.name, post=target, weight=g.weight, prob=g.prob)
                for target in g.targets
            )
        return conns


def default_config_text() -> str:
    return (
        resources.files("neurocore").joinpath(f"data/{DEFAULT_CONFIG_RESOURCE}").read_text()
    )


def load_default_config() -> RunConfig:
    return parse_config_text(default_config_text(), source="<default>")


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config_text(text, source=str(path))


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    populations: dict[str, tuple[int, NeuronParams]] = {}
    generators: list[GeneratorSpec] = []
    connections: list[ConnectionSpec] = []
    sim: dict = {}

    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "simulation":
            sim = _parse_simulation(items, source)
        elif section.startswith("population "):
            name = section[len("population "):].strip()
            populations[name] = _parse_population(name, items, source)
        elif section.startswith("generator "):
            name = section[len("generator "):].strip()
            generators.append(_parse_generator(name, items, source))
        elif section.startswith("connection "):
            connections.append(_parse_connection(section, items, source))
        else:
            raise ConfigError(f"{source}: unknown section [{section}]")

    if not populations:
        raise ConfigError(f"{source}: no [population ...] sections")
    config = RunConfig(
        populations=populations, generators=generators, connections=connections, **sim
    )
    _check_references(config, source)
    return config


def _get(items: dict, key: str, section: str, source: str) -> str:
    if key not in items:
        raise ConfigError(f"{source}: [{section}] is missing {key!r}")
    return items[key]


def _number(items, key, section, source, cast=float):
    value = _get(items, key, section, source)
    try:
        return cast(value)
    except ValueError as exc:
        raise ConfigError(f"{source}: [{section}] {key} = {value!r} is not a number") from exc


def _parse_simulation(items: dict, source: str) -> dict:
    sim: dict = {}
    casts = {
        "duration_ms": float,
        "settle_ms": float,
        "seed": int,
        "threads": int,
        "backend": str,
        "out": str,
        "record": str,
    }
    for key, value in items.items():
        if key not in casts:
            raise ConfigError(f"{source}: [simulation] has unknown key {key!r}")
        if key == "record":
            sim["record"] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key == "out":
            sim["out_dir"] = value.strip()
        elif casts[key] is str:
            sim[key] = value.strip()
        else:
            try:
                sim[key] = casts[key](value)
            except ValueError as exc:
                raise ConfigError(
                    f"{source}: [simulation] {key} = {value!r} is not a number"
                ) from exc
    backend = sim.get("backend", "fixed")
    if backend not in ("fixed", "float"):
        raise ConfigError(f"{source}: [simulation] backend must be fixed|float, got {backend!r}")
    return sim


def _parse_population(name: str, items: dict, source: str) -> tuple[int, NeuronParams]:
    section = f"population {name}"
    size = _number(items, "size", section, source, int)
    kwargs = {key: _number(items, key, section, source) for key in ("a", "b", "c", "d")}
    kwargs["i_const"] = _number(items, "i_const", section, source) if "i_const" in items else 0.0
    kwargs["beta"] = _number(items, "beta", section, source) if "beta" in items else 0.0
    if "v_peak" in items:
        kwargs["v_peak"] = _number(items, "v_peak", section, source)
    try:
        params = NeuronParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: [{section}]: {exc}") from exc
    if size <= 0:
        raise ConfigError(f"{source}: [{section}] size must be positive")
    return size, params


def _parse_generator(name: str, items: dict, source: str) -> GeneratorSpec:
    section = f"generator {name}"
    targets = tuple(
        t.strip() for t in _get(items, "targets", section, source).split(",") if t.strip()
    )
    if not targets:
        raise ConfigError(f"{source}: [{section}] has an empty target list")
    return GeneratorSpec(
        name=name,
        size=_number(items, "size", section, source, int),
        rate_hz=_number(items, "rate_hz", section, source),
        targets=targets,
        weight=_number(items, "weight", section, source),
        prob=_number(items, "prob", section, source),
    )


def _parse_connection(section: str, items: dict, source: str) -> ConnectionSpec:
    route = section[len("connection "):]
    if "->" not in route:
        raise ConfigError(f"{source}: [{section}] must be named 'connection PRE -> POST'")
    pre, _, post = route.partition("->")
    try:
        return ConnectionSpec(
            pre=pre.strip(),
            post=post.strip(),
            weight=_number(items, "weight", section, source),
            prob=_number(items, "prob", section, source),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: [{section}]: {exc}") from exc


def _check_references(config: RunConfig, source: str) -> None:
    known = set(config.populations) | {g.name for g in config.generators}
    for conn in config.connections:
        for endpoint in (conn.pre, conn.post):
            if endpoint not in known:
                raise ConfigError(
                    f"{source}: connection {conn.pre} -> {conn.post} references "
                    f"unknown population {endpoint!r}"
                )
    for g in config.generators:
        for target in g.targets:
            if target not in config.populations:
                raise ConfigError(
                    f"{source}: generator {g.name} targets unknown population {target!r}"
                )
    if config.record:
        for name in config.record:
            if name not in known:
                raise ConfigError(f"{source}: record filter names unknown population {name!r}")
