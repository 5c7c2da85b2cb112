"""Sectioned key=value experiment configs and the deterministic x0 generator.

Config files are flat INI-style text with [graph], [law], [sim], [run], and
optional [sweep] / [linear_et] sections; arrays are comma-separated. All
validation failures raise ConfigError naming the offending field.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .engine import SimConfig, sim_config
from .errors import ConfigError, InvalidParameter
from .graph import WeightedDigraph, load_graph
from .triggers import (
    CentralizedNorm,
    DecentralizedState,
    DirectedStateDependent,
    PeriodicStateDependent,
    StateDependent,
    TimeDependent,
    TriggerLaw,
    validate_law,
)


class Xorshift64Star:
    """xorshift64* generator, pinned so runs reproduce across implementations.

    State update: s ^= s >> 12; s ^= s << 25; s ^= s >> 27 (mod 2^64).
    Output: (s * 0x2545F4914F6CDD1D) mod 2^64; uniform doubles take the top
    53 bits over 2^53. A zero seed is remapped to 0x9E3779B97F4A7C15 because
    the all-zero state is a fixed point.
    """

    MASK = (1 << 64) - 1
    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int) -> None:
        self.state = int(seed) & self.MASK
        if self.state == 0:
            self.state = 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        s = self.state
        s ^= s >> 12
        s = (s ^ (s << 25)) & self.MASK
        s ^= s >> 27
        self.state = s
        return (s * self.MULTIPLIER) & self.MASK

    def uniform(self, lo: float, hi: float) -> float:
        u = (self.next_u64() >> 11) / float(1 << 53)
        return lo + u * (hi - lo)


def random_x0(seed: int, lo: float, hi: float, n: int) -> np.ndarray:
    """Deterministic initial condition: n xorshift64* uniforms in [lo, hi)."""
    gen = Xorshift64Star(seed)
    return np.array([gen.uniform(lo, hi) for _ in range(n)])


# ---------------------------------------------------------------------------
# Experiment configs
# ---------------------------------------------------------------------------

LAW_KEYS = {
    "ideal": (),
    "centralized": ("sigma",),
    "decentralized_state": ("a", "sigma_i"),
    "time_dependent": ("c0", "c1", "alpha"),
    "state_dependent": ("sigma_i",),
    "directed_state_dependent": ("sigma_i",),
    "periodic_state_dependent": ("h", "sigma_i"),
}

SIM_KEYS = ("dt", "horizon", "event_tol", "zeno_floor", "sample_every")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed experiment: graph, one law (None = ideal continuous controller),
    resolved x0, simulation settings, output directory, optional sweep."""

    graph: WeightedDigraph
    law: Optional[TriggerLaw]
    x0: np.ndarray
    sim: SimConfig
    output_dir: str
    sweep: tuple = ()
    sim_raw: tuple = ()  # explicit [sim] keys, kept for sweep rebuilds

    def __post_init__(self) -> None:
        x0 = np.asarray(self.x0, dtype=float)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)


def _parser(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), inline_comment_prefixes=("#",)
    )
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}")
    return parser


def _floats(raw: str, field: str) -> list:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{field}: expected comma-separated numbers, got {raw!r}")


def _float(raw: str, field: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{field}: expected a number, got {raw!r}")


def _parse_graph_section(parser, base: Path) -> WeightedDigraph:
    if not parser.has_section("graph"):
        raise ConfigError("missing [graph] section")
    section = dict(parser.items("graph"))
    try:
        if "file" in section:
            extra = set(section) - {"file"}
            if extra:
                raise ConfigError(f"graph: unexpected keys {sorted(extra)} next to 'file'")
            return load_graph(base / section["file"])
        unknown = set(section) - {"n", "mode", "edges"}
        if unknown:
            raise ConfigError(f"graph: unknown keys {sorted(unknown)}")
        for key in ("n", "mode", "edges"):
            if key not in section:
                raise ConfigError(f"graph.{key}: missing")
        if section["mode"] not in ("directed", "undirected"):
            raise ConfigError(
                f"graph.mode: must be 'directed' or 'undirected', got {section['mode']!r}"
            )
        n = int(section["n"])
        edges = []
        for chunk in section["edges"].split(","):
            parts = chunk.split()
            if len(parts) != 3:
                raise ConfigError(f"graph.edges: each entry must be 'i j w', got {chunk!r}")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        return WeightedDigraph.from_edges(
            n, edges, directed=section["mode"] == "directed"
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"graph: {exc}")


def _parse_law_section(parser, g: WeightedDigraph) -> Optional[TriggerLaw]:
    if not parser.has_section("law"):
        raise ConfigError("missing [law] section")
    section = dict(parser.items("law"))
    law_type = section.pop("type", None)
    if law_type is None:
        raise ConfigError("law.type: missing")
    if law_type not in LAW_KEYS:
        raise ConfigError(
            f"law.type: unknown law {law_type!r}; choose from {sorted(LAW_KEYS)}"
        )
    allowed = set(LAW_KEYS[law_type])
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"law: keys {sorted(unknown)} not valid for type {law_type}")

    def sigma_i_value():
        raw = section.get("sigma_i")
        if raw is None:
            return None
        values = _floats(raw, "law.sigma_i")
        return values[0] if len(values) == 1 else tuple(values)

    try:
        if law_type == "ideal":
            return None
        if law_type == "centralized":
            if "sigma" not in section:
                raise ConfigError("law.sigma: missing")
            law: TriggerLaw = CentralizedNorm(sigma=_float(section["sigma"], "law.sigma"))
        elif law_type == "decentralized_state":
            if "a" not in section:
                raise ConfigError("law.a: missing")
            kwargs = {"a": _float(section["a"], "law.a")}
            si = sigma_i_value()
            if si is not None:
                kwargs["sigma_i"] = si
            law = DecentralizedState(**kwargs)
        elif law_type == "time_dependent":
            for key in ("c0", "c1", "alpha"):
                if key not in section:
                    raise ConfigError(f"law.{key}: missing")
            law = TimeDependent(
                c0=_float(section["c0"], "law.c0"),
                c1=_float(section["c1"], "law.c1"),
                alpha=_float(section["alpha"], "law.alpha"),
            )
        elif law_type in ("state_dependent", "directed_state_dependent"):
            cls = StateDependent if law_type == "state_dependent" else DirectedStateDependent
            si = sigma_i_value()
            law = cls() if si is None else cls(sigma_i=si)
        else:  # periodic_state_dependent
            if "h" not in section:
                raise ConfigError("law.h: missing")
            kwargs = {"h": _float(section["h"], "law.h")}
            si = sigma_i_value()
            if si is not None:
                kwargs["sigma_i"] = si
            law = PeriodicStateDependent(**kwargs)
        validate_law(law, g)
        return law
    except InvalidParameter as exc:
        raise ConfigError(f"law: {exc}")


def _parse_sim_section(parser, g: WeightedDigraph):
    if not parser.has_section("sim"):
        raise ConfigError("missing [sim] section")
    section = dict(parser.items("sim"))
    unknown = set(section) - set(SIM_KEYS)
    if unknown:
        raise ConfigError(f"sim: unknown keys {sorted(unknown)}")
    if "horizon" not in section:
        raise ConfigError("sim.horizon: missing")
    kwargs = {}
    for key in SIM_KEYS:
        if key not in section:
            continue
        if key == "sample_every":
            try:
                kwargs[key] = int(section[key])
            except ValueError:
                raise ConfigError(f"sim.sample_every: expected integer, got {section[key]!r}")
        else:
            kwargs[key] = _float(section[key], f"sim.{key}")
    try:
        cfg = sim_config(g, **kwargs)
    except InvalidParameter as exc:
        raise ConfigError(f"sim: {exc}")
    return cfg, tuple(sorted(kwargs.items()))


_RANDOM_X0 = re.compile(
    r"^random\(\s*(-?\d+)\s*,\s*(-?[\d.eE+-]+)\s*,\s*(-?[\d.eE+-]+)\s*\)$"
)


def _parse_run_section(parser, g: WeightedDigraph):
    if not parser.has_section("run"):
        raise ConfigError("missing [run] section")
    section = dict(parser.items("run"))
    unknown = set(section) - {"x0", "output_dir"}
    if unknown:
        raise ConfigError(f"run: unknown keys {sorted(unknown)}")
    if "x0" not in section:
        raise ConfigError("run.x0: missing")
    raw = section["x0"].strip()
    match = _RANDOM_X0.match(raw)
    if match:
        seed, lo, hi = int(match.group(1)), float(match.group(2)), float(match.group(3))
        if not hi > lo:
            raise ConfigError(f"run.x0: random(...) needs hi > lo, got {raw!r}")
        x0 = random_x0(seed, lo, hi, g.n)
    else:
        values = _floats(raw, "run.x0")
        if len(values) != g.n:
            raise ConfigError(f"run.x0: expected {g.n} values, got {len(values)}")
        x0 = np.array(values)
    return x0, section.get("output_dir", "out")


def _parse_sweep_section(parser, law, law_type_keys) -> tuple:
    if not parser.has_section("sweep"):
        return ()
    entries = []
    for key, raw in parser.items("sweep"):
        if "." not in key:
            raise ConfigError(f"sweep.{key}: parameter path must be 'law.<field>' or 'sim.<field>'")
        target, field = key.split(".", 1)
        if target == "law":
            if law is None or field not in law_type_keys:
                raise ConfigError(f"sweep.{key}: law has no field {field!r}")
        elif target == "sim":
            if field not in SIM_KEYS:
                raise ConfigError(f"sweep.{key}: sim has no field {field!r}")
        else:
            raise ConfigError(f"sweep.{key}: target must be 'law' or 'sim'")
        values = _floats(raw, f"sweep.{key}")
        if not values:
            raise ConfigError(f"sweep.{key}: empty value list")
        entries.append((key, tuple(values)))
    return tuple(entries)


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment config file."""
    path = Path(path)
    parser = _parser(path)
    g = _parse_graph_section(parser, path.parent)
    law = _parse_law_section(parser, g)
    sim, sim_raw = _parse_sim_section(parser, g)
    x0, output_dir = _parse_run_section(parser, g)
    unknown = set(parser.sections()) - {"graph", "law", "sim", "run", "sweep", "linear_et"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    law_type = next(k for k, v in LAW_KEYS.items() if _law_matches(law, k))
    sweep = _parse_sweep_section(parser, law, LAW_KEYS[law_type])
    return ExperimentConfig(
        graph=g,
        law=law,
        x0=x0,
        sim=sim,
        output_dir=output_dir,
        sweep=sweep,
        sim_raw=sim_raw,
    )


def _law_matches(law, law_type: str) -> bool:
    mapping = {
        "ideal": type(None),
        "centralized": CentralizedNorm,
        "decentralized_state": DecentralizedState,
        "time_dependent": TimeDependent,
        "state_dependent": StateDependent,
        "directed_state_dependent": DirectedStateDependent,
        "periodic_state_dependent": PeriodicStateDependent,
    }
    return isinstance(law, mapping[law_type])


def sweep_points(cfg: ExperimentConfig):
    """Cartesian product of sweep values as dicts {parameter path: value}."""
    points = [dict()]
    for key, values in cfg.sweep:
        points = [dict(pt, **{key: v}) for pt in points for v in values]
    return points


def apply_overrides(cfg: ExperimentConfig, overrides: dict):
    """Rebuild (law, sim) for one sweep point; validates against the graph."""
    law = cfg.law
    sim_kwargs = dict(cfg.sim_raw)
    try:
        for key, value in overrides.items():
            target, field = key.split(".", 1)
            if target == "law":
                if law is None:
                    raise ConfigError(f"sweep.{key}: the ideal law has no parameters")
                law = dataclasses.replace(law, **{field: value})
            else:
                sim_kwargs[field] = int(value) if field == "sample_every" else value
        if law is not None:
            validate_law(law, cfg.graph)
        sim = sim_config(cfg.graph, **sim_kwargs)
    except InvalidParameter as exc:
        raise ConfigError(f"sweep point {overrides}: {exc}")
    return law, sim


# ---------------------------------------------------------------------------
# Single-plant (linear_et) configs
# ---------------------------------------------------------------------------

LINEAR_ET_KEYS = {
    "n", "m", "a", "b", "k", "q", "r", "a_s",
    "x0", "horizon", "t_max", "samples_per_interval",
}


@dataclass(frozen=True)
class LinearEtConfig:
    """Row-major system matrices plus run settings for linear-et mode."""

    a: np.ndarray
    b: np.ndarray
    k: np.ndarray
    q: np.ndarray
    r: np.ndarray
    a_s: Optional[np.ndarray]
    x0: np.ndarray
    horizon: Optional[float]
    t_max: Optional[float]
    samples_per_interval: int
    output_dir: str


def load_linear_et_config(path) -> LinearEtConfig:
    """Parse the [linear_et] section (matrices as row-major numeric arrays)."""
    path = Path(path)
    parser = _parser(path)
    if not parser.has_section("linear_et"):
        raise ConfigError("missing [linear_et] section")
    section = dict(parser.items("linear_et"))
    unknown = set(section) - LINEAR_ET_KEYS
    if unknown:
        raise ConfigError(f"linear_et: unknown keys {sorted(unknown)}")
    for key in ("n", "m", "a", "b", "k", "q", "r", "x0"):
        if key not in section:
            raise ConfigError(f"linear_et.{key}: missing")
    try:
        n = int(section["n"])
        m = int(section["m"])
    except ValueError:
        raise ConfigError("linear_et.n / linear_et.m must be integers")

    def mat(key: str, rows: int, cols: int) -> np.ndarray:
        values = _floats(section[key], f"linear_et.{key}")
        if len(values) != rows * cols:
            raise ConfigError(
                f"linear_et.{key}: expected {rows * cols} row-major entries, got {len(values)}"
            )
        return np.array(values).reshape(rows, cols)

    a = mat("a", n, n)
    b = mat("b", n, m)
    k = mat("k", m, n)
    q = mat("q", n, n)
    r = mat("r", n, n)
    a_s = mat("a_s", n, n) if "a_s" in section else None
    x0_values = _floats(section["x0"], "linear_et.x0")
    if len(x0_values) != n:
        raise ConfigError(f"linear_et.x0: expected {n} values, got {len(x0_values)}")
    horizon = _float(section["horizon"], "linear_et.horizon") if "horizon" in section else None
    t_max = _float(section["t_max"], "linear_et.t_max") if "t_max" in section else None
    spi = int(section.get("samples_per_interval", 20))
    if spi < 1:
        raise ConfigError("linear_et.samples_per_interval: must be >= 1")
    output_dir = "out"
    if parser.has_section("run"):
        output_dir = dict(parser.items("run")).get("output_dir", "out")
    return LinearEtConfig(
        a=a, b=b, k=k, q=q, r=r, a_s=a_s,
        x0=np.array(x0_values),
        horizon=horizon,
        t_max=t_max,
        samples_per_interval=spi,
        output_dir=output_dir,
    )
