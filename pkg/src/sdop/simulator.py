"""Fixed-step RK4 integration of the approximate-projected consensus flow.

Each agent moves as::

    dx_i/dt = sum_{j in N_i(t)} (x_j - x_i) + alpha(t) * (Pa_i(x_i) - x_i)

with ``Pa_i`` the approximate projection onto its own set at the angle
``theta(t)``. The step grid is cut at every graph switch so a step never
straddles one, and the graph is frozen over each step.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .approx import ApproxMode, approx_project, approx_project_balls
from .diagnostics import DiagnosticsRecord, diagnostics_for, solve_centralized
from .geometry import Ball, Box, HalfSpace, SetFamily, hull_diameter
from .network import GraphSchedule, is_ujsc, laplacian
from .schedules import Constant, Rational, Schedule


class ConfigError(ValueError):
    pass


class DivergenceError(RuntimeError):
    def __init__(self, t: float, magnitude: float):
        super().__init__(f"state diverged at t={t:.6g} (|x| = {magnitude:.3e})")
        self.t = t
        self.magnitude = magnitude


@dataclass(frozen=True, eq=False)
class SimConfig:
    family: SetFamily
    graph: GraphSchedule
    stepsize: Schedule
    angle: Schedule
    mode: ApproxMode
    x0: np.ndarray
    dt: float = 0.01
    t_end: float = 100.0
    stride: int = 1

    def __post_init__(self):
        try:
            x0 = np.array(self.x0, dtype=float)
        except ValueError as exc:
            raise ConfigError(f"initial states do not form an n x m array: {exc}") from exc
        n, m = len(self.family), self.family.dim
        if x0.shape != (n, m):
            raise ConfigError(f"initial states have shape {x0.shape}, expected {(n, m)}")
        if not np.all(np.isfinite(x0)):
            raise ConfigError("initial states must be finite")
        if self.graph.n != n:
            raise ConfigError(f"graph has {self.graph.n} nodes but there are {n} agents")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.dt > self.graph.dwell_time / 10:
            raise ConfigError(
                f"dt={self.dt} exceeds a tenth of the dwell time {self.graph.dwell_time}")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if int(self.stride) < 1:
            raise ConfigError("stride must be a positive integer")
        if self.angle.sup() >= math.pi / 2:
            raise ConfigError("requested angles must stay below pi/2")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "stride", int(self.stride))

    def fingerprint(self) -> str:
        """Stable hash of every parameter that affects the trajectory."""
        def set_desc(s):
            if isinstance(s, Ball):
                return ["ball", s.center.tolist(), s.radius]
            if isinstance(s, Box):
                return ["box", s.lower.tolist(), s.upper.tolist()]
            if isinstance(s, HalfSpace):
                return ["halfspace", s.normal.tolist(), s.offset, s.bound_center.tolist(), s.bound_radius]
            return [repr(s)]

        desc = {
            "sets": [set_desc(s) for s in self.family],
            "graph": [[sorted(g.arcs), d] for g, d in zip(self.graph.graphs, self.graph.durations)],
            "periodic": self.graph.periodic,
            "stepsize": self.stepsize.as_dict(),
            "angle": self.angle.as_dict(),
            "mode": [self.mode.kind, None if self.mode.axis is None else self.mode.axis.tolist(),
                     self.mode.sign, self.mode.seed],
            "x0": self.x0.tolist(),
            "dt": self.dt, "t_end": self.t_end, "stride": self.stride,
        }
        return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diagnostics: list[DiagnosticsRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class _Projector:
    """Approximate projections for all agents at once."""

    def __init__(self, family: SetFamily, mode: ApproxMode):
        self.family = family
        self.mode = mode
        self.balls = family.all_balls
        if self.balls:
            self.centers = np.array([s.center for s in family])
            self.radii = np.array([s.radius for s in family])

    def __call__(self, X, angle, step):
        if self.balls:
            return approx_project_balls(self.centers, self.radii, X, angle, self.mode, step)
        res = [approx_project(s, X[i], angle, self.mode, agent=i, step=step)
               for i, s in enumerate(self.family)]
        return (np.array([r.pa for r in res]), np.array([r.realized_angle for r in res]),
                np.array([r.gamma for r in res]), np.array([r.clamped for r in res]))


def step_rhs(state, t: float, config: SimConfig, step: int = 0) -> np.ndarray:
    """Velocity of every agent with the graph frozen at ``graph_at(t)``."""
    X = np.asarray(state, dtype=float)
    L = laplacian(config.graph.graph_at(t))
    proj = _Projector(config.family, config.mode)
    return _rhs(X, t, L, config, proj, step)[0]


def _rhs(X, t, L, config, proj, step):
    alpha = config.stepsize(t)
    PA, _, _, clamped = proj(X, config.angle(t), step)
    return -L @ X + alpha * (PA - X), clamped


def integrate(config: SimConfig, diagnostics: bool = True) -> Trajectory:
    """Classical RK4 from ``t = 0`` to ``config.t_end``.

    Samples every ``stride`` steps plus the final state. Raises
    :class:`DivergenceError` as soon as a state leaves the ball of radius
    ``1e6 * (1 + xi)``.
    """
    fam = config.family
    proj = _Projector(fam, config.mode)
    xi = hull_diameter(fam).value
    limit = 1e6 * (1.0 + xi)
    nonempty = None
    if diagnostics:
        nonempty = solve_centralized(fam, check_unique=False).intersection_nonempty

    times = [0.0]
    states = [config.x0.copy()]
    records = []

    def record(t, X, step):
        if diagnostics:
            _, theta, gamma, _ = proj(X, config.angle(t), step)
            records.append(diagnostics_for(t, X, fam, config.stepsize(t), config.angle(t),
                                           config.mode, nonempty=nonempty, step=step,
                                           approx=(gamma, theta)))

    X = config.x0.copy()
    record(0.0, X, 0)
    step = 0
    clamp_events = 0
    last_recorded = 0
    for a, b, g in config.graph.segments_until(config.t_end):
        L = laplacian(g)
        nsteps = max(1, math.ceil((b - a) / config.dt - 1e-9))
        h = (b - a) / nsteps
        for k in range(nsteps):
            t = a + k * h
            k1, cl = _rhs(X, t, L, config, proj, step)
            k2, _ = _rhs(X + 0.5 * h * k1, t + 0.5 * h, L, config, proj, step)
            k3, _ = _rhs(X + 0.5 * h * k2, t + 0.5 * h, L, config, proj, step)
            k4, _ = _rhs(X + h * k3, t + h, L, config, proj, step)
            X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            clamp_events += int(np.count_nonzero(cl))
            step += 1
            mag = float(np.max(np.abs(X))) if np.all(np.isfinite(X)) else math.inf
            if mag > limit:
                raise DivergenceError(a + (k + 1) * h, mag)
            if step % config.stride == 0:
                t_next = a + (k + 1) * h
                times.append(t_next)
                states.append(X.copy())
                record(t_next, X, step)
                last_recorded = step
    if last_recorded != step:
        times.append(config.t_end)
        states.append(X.copy())
        record(config.t_end, X, step)

    meta = {"config_hash": config.fingerprint(), "clamp_events": clamp_events, "steps": step,
            "xi": xi, "intersection_nonempty": nonempty}
    return Trajectory(np.array(times), np.array(states), records, meta)


# --- condition checks ------------------------------------------------------

SATISFIED, VIOLATED, UNKNOWN = "satisfied", "violated", "unknown"


@dataclass(frozen=True)
class Condition:
    name: str
    status: str
    reason: str


@dataclass
class ConditionReport:
    theorem: str
    conditions: list[Condition]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status == SATISFIED for c in self.conditions)

    def __str__(self):
        lines = [f"{self.theorem}:"]
        lines += [f"  [{c.status}] {c.name}: {c.reason}" for c in self.conditions]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


def _describe(s: Schedule) -> str:
    if isinstance(s, Constant):
        return f"constant {s.value:g}"
    if isinstance(s, Rational):
        return f"{s.a:g}/(t+{s.b:g})"
    return type(s).__name__


def _integral_alpha_diverges(alpha: Schedule) -> bool | None:
    if isinstance(alpha, Constant):
        return alpha.value > 0
    if isinstance(alpha, Rational):
        return alpha.a > 0
    return None


def _integral_alpha_sq_finite(alpha: Schedule) -> bool | None:
    if isinstance(alpha, Constant):
        return alpha.value == 0
    if isinstance(alpha, Rational):
        return True
    return None


def _integral_alpha_tan_finite(alpha: Schedule, theta: Schedule) -> tuple[bool | None, str]:
    if isinstance(theta, Constant) and theta.value == 0:
        return True, "tan(0) = 0"
    if isinstance(alpha, Constant) and alpha.value == 0:
        return True, "alpha = 0"
    if isinstance(alpha, Rational) and alpha.a == 0:
        return True, "alpha = 0"
    if isinstance(theta, Rational) and theta.a == 0:
        return True, "tan(0) = 0"
    if isinstance(theta, Constant):
        return False, f"tan({theta.value:g}) > 0 times a non-integrable alpha"
    if isinstance(theta, Rational):
        if isinstance(alpha, Rational):
            return True, "integrand ~ a*c/t^2"
        if isinstance(alpha, Constant):
            return False, "integrand ~ c/t"
    return None, "no closed form for this schedule pair"


def _ujsc_window(schedule: GraphSchedule) -> float:
    if schedule.periodic:
        return schedule.period
    if math.isinf(schedule.durations[-1]):
        return sum(schedule.durations[:-1]) + 1.0
    return schedule.period


def validate_conditions(config: SimConfig, theorem: str) -> ConditionReport:
    """Check the hypotheses of a convergence result against the config.

    ``theorem`` is ``"T3"`` (common point exists), ``"T4"`` (no common
    point, undirected graphs) or ``"T6"`` (constant stepsize and angle).
    Integrability is decided in closed form from the tail piece of each
    schedule. Informational only: nothing here raises.
    """
    theorem = theorem.upper()
    if theorem not in ("T3", "T4", "T6"):
        raise ValueError(f"unknown theorem tag {theorem!r}")
    alpha, theta = config.stepsize.tail(), config.angle.tail()
    conds: list[Condition] = []
    notes: list[str] = []

    try:
        window = _ujsc_window(config.graph)
        ok = is_ujsc(config.graph, window, horizon=config.t_end if window <= config.t_end else None)
        conds.append(Condition("A1 uniformly jointly strongly connected",
                               SATISFIED if ok else VIOLATED, f"checked at window {window:g}"))
    except ValueError as exc:
        conds.append(Condition("A1 uniformly jointly strongly connected", UNKNOWN, str(exc)))

    def add(name, verdict, reason):
        status = UNKNOWN if verdict is None else (SATISFIED if verdict else VIOLATED)
        conds.append(Condition(name, status, reason))

    if theorem in ("T4", "T6"):
        und = config.graph.is_undirected
        add("undirected graphs", und,
            "every arc has its reverse" if und else "Theorem 4 requires undirected graphs"
            if theorem == "T4" else "Theorem 6 requires undirected graphs")

    if theorem in ("T3", "T4"):
        div = _integral_alpha_diverges(alpha)
        add("integral of alpha diverges", div, f"alpha = {_describe(alpha)}")
        if theorem == "T4":
            fin = _integral_alpha_sq_finite(alpha)
            add("integral of alpha^2 finite", fin, f"alpha = {_describe(alpha)}")
        fin, why = _integral_alpha_tan_finite(alpha, theta)
        add("integral of alpha*tan(theta) finite", fin, why)
        if theorem == "T3" and isinstance(theta, Constant) and theta.value == 0:
            notes.append("exact projection: divergence of the alpha integral is also necessary")
        if theorem == "T4" and isinstance(theta, Constant) and theta.value == 0:
            lim = alpha.value if isinstance(alpha, Constant) else 0.0
            add("necessary: alpha_t -> 0", lim == 0,
                "it is necessary that lim alpha_t = 0" if lim else "alpha_t decays to 0")
    else:
        add("constant stepsize alpha > 0",
            isinstance(alpha, Constant) and alpha.value > 0 and isinstance(config.stepsize, Constant),
            f"alpha = {_describe(config.stepsize)}")
        add("constant angle", isinstance(config.angle, Constant), f"theta = {_describe(config.angle)}")
    return ConditionReport(theorem, conds, notes)
