"""Scenario files: INI-style sections of ``key = value`` pairs.

Example::

    [sets]
    1.kind = ball
    1.center = (-1, 0)
    1.radius = 2

    [agents]
    1.x0 = (-4, 3)

    [graph]
    segments = [{edges=[(2,1),(3,2)], duration=1},
                {edges=[(1,3)], duration=1}]
    periodic = true
    undirected = false

Agents, sets and arc endpoints are numbered from 1. Vectors are written
as Python tuples; anything else goes through :func:`ast.literal_eval`.
"""

from __future__ import annotations

import ast
import configparser
import re
from dataclasses import dataclass
from pathlib import Path

from .approx import ApproxMode
from .geometry import Ball, Box, HalfSpace, SetFamily
from .network import DirectedGraph, GraphSchedule
from .schedules import Constant, Rational
from .simulator import SimConfig

SECTIONS = ("sets", "agents", "graph", "stepsize", "angle", "approx", "integrator", "output")
FIXED_KEYS = {
    "graph": {"segments", "periodic", "undirected"},
    "stepsize": {"kind", "value", "a", "b"},
    "angle": {"kind", "value", "a", "b"},
    "approx": {"mode", "axis", "seed", "sign"},
    "integrator": {"dt", "t_end"},
    "output": {"stride", "dir"},
}
INDEXED_KEYS = {
    "sets": {"kind", "center", "radius", "lower", "upper", "normal", "offset"},
    "agents": {"x0"},
}
BUNDLED_DIR = Path(__file__).parent / "scenarios"


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where = f"{source}:{where}: " if source else f"{where}: "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass
class Scenario:
    """A parsed scenario: the raw key table plus where each key came from."""

    values: dict[str, str]
    positions: dict[str, tuple[int, int]]
    source: str = "<scenario>"

    def error(self, key: str, message: str) -> ScenarioError:
        line, col = self.positions.get(key, (None, None))
        return ScenarioError(f"{key}: {message}", line, col, self.source)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ScenarioError(f"missing required key {key}", source=self.source)
        return self.values[key]

    def literal(self, key: str, default=None):
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise ScenarioError(f"missing required key {key}", source=self.source)
            return default
        try:
            return ast.literal_eval(raw)
        except (ValueError, SyntaxError) as exc:
            raise self.error(key, f"cannot parse value {raw!r}") from exc

    def number(self, key: str, default=None) -> float:
        v = self.literal(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(key, f"expected a number, got {v!r}")
        return float(v)

    def boolean(self, key: str, default: bool = False) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        low = raw.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise self.error(key, f"expected a boolean, got {raw!r}")

    def with_overrides(self, overrides) -> "Scenario":
        values = dict(self.values)
        for item in overrides:
            if "=" not in item:
                raise ScenarioError(f"override {item!r} is not key=value")
            key, value = (s.strip() for s in item.split("=", 1))
            _check_key(key, source="--override")
            values[key] = value
        return Scenario(values, dict(self.positions), self.source)

    def indices(self, section: str) -> list[int]:
        idx = sorted({int(k.split(".")[1]) for k in self.values if k.startswith(section + ".")})
        if idx != list(range(1, len(idx) + 1)):
            raise ScenarioError(f"[{section}] must be numbered 1..n, found {idx}", source=self.source)
        return idx


def _check_key(key: str, line=None, column=None, source=None):
    parts = key.split(".")
    section = parts[0]
    if section in FIXED_KEYS:
        if len(parts) != 2 or parts[1] not in FIXED_KEYS[section]:
            raise ScenarioError(f"unknown key {key}", line, column, source)
    elif section in INDEXED_KEYS:
        if len(parts) != 3 or not parts[1].isdigit() or parts[2] not in INDEXED_KEYS[section]:
            raise ScenarioError(f"unknown key {key}", line, column, source)
    else:
        raise ScenarioError(f"unknown section in key {key}", line, column, source)


def _locate(lines: list[str], section: str, option: str) -> tuple[int, int]:
    current = None
    pat = re.compile(r"\s*" + re.escape(option) + r"\s*[=:]")
    for no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            continue
        if current == section:
            m = pat.match(line)
            if m:
                # column of the first character of the value
                rest = line[m.end():]
                return no, m.end() + len(rest) - len(rest.lstrip()) + 1
    return 0, 0


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError("expected a [section] header", exc.lineno, 1, source) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ScenarioError(exc.message.split(": ", 1)[-1], exc.lineno, 1, source) from exc
    except configparser.ParsingError as exc:
        lineno, _ = exc.errors[0]
        raise ScenarioError("line is not 'key = value'", lineno, 1, source) from exc

    lines = text.splitlines()
    values, positions = {}, {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ScenarioError(f"unknown section [{section}]", _locate_section(lines, section), 1, source)
        for option, value in parser.items(section):
            key = f"{section}.{option}"
            line, col = _locate(lines, section, option)
            _check_key(key, line, col, source)
            values[key] = value.strip()
            positions[key] = (line, col)
    return Scenario(values, positions, source)


def _locate_section(lines, section):
    for no, line in enumerate(lines, start=1):
        if line.strip() == f"[{section}]":
            return no
    return None


def load_scenario(path) -> Scenario:
    """Read a scenario file; bare names fall back to the bundled scenarios."""
    p = Path(path)
    if not p.exists() and (BUNDLED_DIR / p.name).exists():
        p = BUNDLED_DIR / p.name
    if not p.exists():
        raise FileNotFoundError(f"no scenario file {path}")
    return parse_scenario(p.read_text(), source=str(p))


def bundled_scenarios() -> list[str]:
    return sorted(p.name for p in BUNDLED_DIR.glob("*.cfg"))


_FIELD = re.compile(r"(?<=[{,])\s*(\w+)\s*=")


def _parse_segments(sc: Scenario):
    raw = sc.require("graph.segments")
    try:
        segs = ast.literal_eval(_FIELD.sub(r' "\1":', raw))
    except (ValueError, SyntaxError) as exc:
        raise sc.error("graph.segments", "expected [{edges=[(j,i), ...], duration=d}, ...]") from exc
    if isinstance(segs, dict):
        segs = [segs]
    if not isinstance(segs, (list, tuple)) or not segs:
        raise sc.error("graph.segments", "expected a non-empty list of segments")
    out = []
    for seg in segs:
        if not isinstance(seg, dict) or set(seg) - {"edges", "duration"} or "duration" not in seg:
            raise sc.error("graph.segments", f"bad segment {seg!r}")
        out.append((list(seg.get("edges", [])), float(seg["duration"])))
    return out


def _schedule(sc: Scenario, section: str):
    kind = sc.get(f"{section}.kind", "constant").strip()
    try:
        if kind == "constant":
            return Constant(sc.number(f"{section}.value"))
        if kind in ("rational", "rational-decay"):
            return Rational(sc.number(f"{section}.a"), sc.number(f"{section}.b"))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise sc.error(f"{section}.kind", str(exc)) from exc
    raise sc.error(f"{section}.kind", f"unknown schedule kind {kind!r} (constant|rational)")


def _vector(sc: Scenario, key: str):
    v = sc.literal(key)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = (v,)
    if not isinstance(v, (tuple, list)) or not all(isinstance(c, (int, float)) for c in v):
        raise sc.error(key, f"expected a vector like (1, 2), got {v!r}")
    return [float(c) for c in v]


def build_family(sc: Scenario) -> SetFamily:
    sets = []
    for i in sc.indices("sets"):
        key = f"sets.{i}"
        kind = sc.require(f"{key}.kind").strip()
        try:
            if kind == "ball":
                sets.append(Ball(_vector(sc, f"{key}.center"), sc.number(f"{key}.radius")))
            elif kind == "box":
                sets.append(Box(_vector(sc, f"{key}.lower"), _vector(sc, f"{key}.upper")))
            elif kind == "halfspace":
                center = _vector(sc, f"{key}.center") if f"{key}.center" in sc.values else None
                sets.append(HalfSpace(_vector(sc, f"{key}.normal"), sc.number(f"{key}.offset"),
                                      sc.number(f"{key}.radius"), center))
            else:
                raise sc.error(f"{key}.kind", f"unknown set kind {kind!r} (ball|box|halfspace)")
        except ScenarioError:
            raise
        except ValueError as exc:
            raise sc.error(f"{key}.kind", str(exc)) from exc
    try:
        return SetFamily(sets)
    except ValueError as exc:
        raise ScenarioError(str(exc), source=sc.source) from exc


def build_config(sc: Scenario) -> SimConfig:
    family = build_family(sc)
    n = len(family)
    agents = sc.indices("agents")
    if len(agents) != n:
        raise ScenarioError(f"{len(agents)} agents but {n} sets", source=sc.source)
    x0 = [_vector(sc, f"agents.{i}.x0") for i in agents]
    for i, x in zip(agents, x0):
        if len(x) != family.dim:
            raise sc.error(f"agents.{i}.x0", f"has {len(x)} coordinates, the sets live in dimension {family.dim}")

    undirected = sc.boolean("graph.undirected")
    periodic = sc.boolean("graph.periodic")
    segs = []
    for edges, duration in _parse_segments(sc):
        try:
            segs.append((DirectedGraph.from_one_based(n, edges, undirected), duration))
        except ValueError as exc:
            raise sc.error("graph.segments", str(exc)) from exc
    try:
        graph = GraphSchedule(segs, periodic=periodic)
    except ValueError as exc:
        raise sc.error("graph.segments", str(exc)) from exc

    mode_name = sc.get("approx.mode", "exact").strip()
    try:
        if mode_name == "exact":
            mode = ApproxMode.exact()
        elif mode_name == "planar":
            mode = ApproxMode.planar(_vector(sc, "approx.axis"), sc.number("approx.sign", 1.0))
        elif mode_name == "random":
            mode = ApproxMode.random(int(sc.number("approx.seed", 0)))
        else:
            raise sc.error("approx.mode", f"unknown mode {mode_name!r} (exact|planar|random)")
    except ScenarioError:
        raise
    except ValueError as exc:
        raise sc.error("approx.mode", str(exc)) from exc

    stride = sc.number("output.stride", 1)
    if stride != int(stride):
        raise sc.error("output.stride", "stride must be an integer")
    return SimConfig(
        family=family,
        graph=graph,
        stepsize=_schedule(sc, "stepsize"),
        angle=_schedule(sc, "angle"),
        mode=mode,
        x0=x0,
        dt=sc.number("integrator.dt", 0.01),
        t_end=sc.number("integrator.t_end"),
        stride=int(stride),
    )
