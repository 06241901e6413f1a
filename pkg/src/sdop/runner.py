"""Scenario-level operations behind the command line: run, sweep, check, oracle."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export
from .diagnostics import DiagnosticsRecord, OptimalSolution, project_intersection, solve_centralized
from .network import is_ujsc
from .scenario import Scenario, build_config, load_scenario
from .simulator import (ConditionReport, ConfigError, SimConfig, Trajectory, _ujsc_window, integrate,
                        validate_conditions)
from .schedules import Constant


class ValidationError(ValueError):
    """A scenario breaks a rule the runner will not simulate past."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _as_scenario(scenario, overrides=()) -> Scenario:
    sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
    return sc.with_overrides(overrides) if overrides else sc


def theorems_for(config: SimConfig, oracle: OptimalSolution) -> list[str]:
    tags = ["T3" if oracle.intersection_nonempty else "T4"]
    if isinstance(config.stepsize, Constant) and isinstance(config.angle, Constant):
        tags.append("T6")
    return tags


def hard_errors(config: SimConfig, theorems: list[str]) -> list[str]:
    if "T4" in theorems and not config.graph.is_undirected:
        return ["Theorem 4 requires undirected graphs (the sets do not intersect)"]
    return []


def terminal_residual(config: SimConfig, oracle: OptimalSolution, X: np.ndarray) -> float:
    """Distance of the agents' average to the optimal set."""
    x_bar = X.mean(axis=0)
    if oracle.intersection_nonempty:
        return float(np.linalg.norm(x_bar - project_intersection(config.family, x_bar, check_nonempty=False)))
    return float(np.linalg.norm(x_bar - oracle.x_star))


@dataclass
class RunReport:
    conditions: list[ConditionReport]
    final: DiagnosticsRecord
    files: dict[str, str]
    wall_clock: float
    clamp_events: int
    x_bar: np.ndarray
    residual: float
    oracle: OptimalSolution
    trajectory: Trajectory | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        f = self.final
        return {
            "conditions": [
                {"theorem": r.theorem, "ok": r.ok, "notes": r.notes,
                 "conditions": [{"name": c.name, "status": c.status, "reason": c.reason} for c in r.conditions]}
                for r in self.conditions
            ],
            "final": {"t": f.t, "H": f.H, "h": f.h, "hbar": f.hbar, "f_bar": f.f_bar,
                      "gamma": f.gamma.tolist(), "alpha": f.alpha.tolist(), "theta": f.theta.tolist()},
            "x_bar": self.x_bar.tolist(),
            "residual": self.residual,
            "oracle": {"x_star": self.oracle.x_star.tolist(), "f_star": self.oracle.f_star,
                       "intersection_nonempty": self.oracle.intersection_nonempty},
            "files": self.files,
            "wall_clock": self.wall_clock,
            "clamp_events": self.clamp_events,
        }

    def summary(self) -> str:
        f = self.final
        lines = [str(r) for r in self.conditions]
        lines.append(f"t_end={f.t:g}  H={f.H:.3e}  h={'n/a' if f.h is None else format(f.h, '.3e')}  "
                     f"f_bar={f.f_bar:.6g}  residual={self.residual:.3e}")
        lines.append(f"x_bar={np.array2string(self.x_bar, precision=6)}  clamp events={self.clamp_events}  "
                     f"wall clock={self.wall_clock:.1f}s")
        lines += [f"wrote {p}" for p in self.files.values()]
        return "\n".join(lines)


def run(scenario, overrides=(), out_dir=None, write: bool = True) -> RunReport:
    """Simulate a scenario and write trajectory/diagnostics CSV, SVG and a JSON report."""
    sc = _as_scenario(scenario, overrides)
    config = build_config(sc)
    oracle = solve_centralized(config.family, check_unique=False)
    theorems = theorems_for(config, oracle)
    problems = hard_errors(config, theorems)
    if problems:
        raise ValidationError(problems)
    conditions = [validate_conditions(config, t) for t in theorems]

    start = time.perf_counter()
    traj = integrate(config)
    wall = time.perf_counter() - start

    X = traj.final
    files = {}
    if write:
        out = Path(out_dir or sc.get("output.dir") or "out")
        out.mkdir(parents=True, exist_ok=True)
        files["trajectory"] = str(export.write_trajectory_csv(traj, out / "trajectory.csv"))
        files["diagnostics"] = str(export.write_diagnostics_csv(traj, out / "diagnostics.csv"))
        files["plot"] = str(export.write_svg(traj, out / "plot.svg"))
    report = RunReport(conditions, traj.diagnostics[-1], files, wall, traj.meta["clamp_events"],
                       X.mean(axis=0), terminal_residual(config, oracle, X), oracle, traj)
    if write:
        path = Path(files["trajectory"]).parent / "report.json"
        files["report"] = str(path)
        path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


SWEEPABLE = {"stepsize.value": "stepsize", "angle.value": "angle"}


@dataclass(frozen=True)
class SweepRow:
    value: float
    residual: float
    H: float
    status: str = "ok"
    error: str = ""


def _sweep_one(job):
    sc, parameter, value, out_dir = job
    section = SWEEPABLE[parameter]
    sc = sc.with_overrides([f"{section}.kind=constant", f"{parameter}={value!r}"])
    try:
        rep = run(sc, out_dir=out_dir, write=out_dir is not None)
    except Exception as exc:  # row-level failure, the table still comes back
        return SweepRow(value, math.nan, math.nan, "error", f"{type(exc).__name__}: {exc}")
    return SweepRow(value, rep.residual, rep.final.H)


def sweep(scenario, parameter: str, values, overrides=(), out_dir=None, workers: int | None = None) -> list[SweepRow]:
    """One run per value of a constant stepsize or angle; rows sorted by value.

    Runs fan out over processes. Each writes into its own subdirectory of
    ``out_dir`` when one is given.
    """
    if parameter not in SWEEPABLE:
        raise ValueError(f"can only sweep {sorted(SWEEPABLE)}, not {parameter!r}")
    sc = _as_scenario(scenario, overrides)
    values = sorted(float(v) for v in values)
    jobs = [(sc, parameter, v, None if out_dir is None else str(Path(out_dir) / f"{parameter}={v!r}"))
            for v in values]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1 or len(jobs) == 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    return sorted(rows, key=lambda r: r.value)


def write_sweep_csv(rows: list[SweepRow], path) -> Path:
    path = Path(path)
    lines = ["value,residual,H,status,error"]
    for r in rows:
        err = r.error.replace('"', "'")
        lines.append(f'{export.fmt(r.value)},{export.fmt(r.residual)},{export.fmt(r.H)},{r.status},"{err}"')
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class CheckReport:
    hard_errors: list[str]
    notes: list[str]
    conditions: list[ConditionReport]

    @property
    def ok(self) -> bool:
        return not self.hard_errors

    def __str__(self):
        lines = [f"HARD: {e}" for e in self.hard_errors]
        lines += [f"- {n}" for n in self.notes]
        lines += [str(c) for c in self.conditions]
        return "\n".join(lines)


def check(scenario, overrides=(), theorems=None) -> CheckReport:
    """Assumption and hypothesis checks without simulating."""
    sc = _as_scenario(scenario, overrides)
    try:
        config = build_config(sc)
    except ConfigError as exc:
        return CheckReport([f"integrator config error: {exc}"], [], [])
    g = config.graph
    notes = []
    window = _ujsc_window(g)
    try:
        ujsc = is_ujsc(g, window, horizon=config.t_end if not g.periodic else None)
        notes.append(f"A1 {'satisfied' if ujsc else 'violated'} (window {window:g})")
    except ValueError as exc:
        notes.append(f"A1 unknown: {exc}")
    notes.append("graphs are undirected" if g.is_undirected else "graphs are directed")
    notes.append(f"dwell time {g.dwell_time:g}, dt {config.dt:g} (need dt <= dwell/10)")
    oracle = solve_centralized(config.family, check_unique=False)
    notes.append("sets intersect" if oracle.intersection_nonempty else
                 f"sets do not intersect; optimum {np.array2string(oracle.x_star, precision=6)} "
                 f"with f* = {oracle.f_star:.6g}")
    tags = [t.upper() for t in theorems] if theorems else theorems_for(config, oracle)
    return CheckReport(hard_errors(config, tags), notes, [validate_conditions(config, t) for t in tags])


def oracle(scenario, overrides=(), tol: float = 1e-12) -> OptimalSolution:
    sc = _as_scenario(scenario, overrides)
    return solve_centralized(build_config(sc).family, tol=tol)
