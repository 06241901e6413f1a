"""Centralized reference computations and per-sample diagnostics.

The distributed dynamics are judged against quantities no single agent
can compute: the minimizer of the summed squared distances, the nearest
point of the common intersection, and the Lyapunov-type spreads ``H``,
``h`` and ``hbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .approx import ApproxMode, approx_project
from .geometry import SetFamily, hull_diameter, hull_distance

NONEMPTY_TOL = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class EmptyIntersectionError(ValueError):
    """The sets share no point; use :func:`objective` instead."""


def objective(family: SetFamily, x) -> float:
    """Sum of squared distances from ``x`` to every set."""
    x = np.asarray(x, dtype=float)
    return float(sum(s.distance(x) ** 2 for s in family))


def mean_projection(family: SetFamily, x) -> np.ndarray:
    return np.mean([s.project(x) for s in family], axis=0)


@dataclass(frozen=True, eq=False)
class OptimalSolution:
    x_star: np.ndarray
    f_star: float
    residual: float
    iterations: int
    unique: bool | None = None

    @property
    def intersection_nonempty(self) -> bool:
        return self.f_star < NONEMPTY_TOL


def _default_start(family: SetFamily) -> np.ndarray:
    return np.mean([s.bounding_ball()[0] for s in family], axis=0)


def _spread_starts(family: SetFamily, count: int = 8) -> list[np.ndarray]:
    center = _default_start(family)
    reach = 2.0 * hull_diameter(family).value
    m = family.dim
    if m == 1:
        dirs = [np.array([s]) * (k + 1) / count for k in range(count // 2) for s in (1.0, -1.0)]
    elif m == 2:
        ang = 2 * np.pi * np.arange(count) / count
        dirs = list(np.column_stack([np.cos(ang), np.sin(ang)]))
    else:
        rng = np.random.default_rng(0)
        g = rng.standard_normal((count, m))
        dirs = list(g / np.linalg.norm(g, axis=1, keepdims=True))
    return [center + reach * d for d in dirs]


def solve_centralized(family: SetFamily, tol: float = 1e-12, max_iter: int = 100_000,
                      x0=None, check_unique: bool = True,
                      callback: Callable[[int, np.ndarray, float], None] | None = None) -> OptimalSolution:
    """Minimize ``sum_i dist(x, X_i)^2`` by iterating ``x <- mean_i P_i(x)``.

    That map is a gradient step of length ``1/(2n)`` on a convex objective
    whose gradient is ``2n``-Lipschitz, so the objective never increases.
    Stops when an update moves less than ``tol``.

    With ``check_unique`` the solve is repeated from 8 starts spread around
    the family; ``unique`` is true when all of them land within ``100*tol``
    of the first answer.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = _default_start(family) if x0 is None else np.asarray(x0, dtype=float).copy()
    residual = math.inf
    for it in range(1, max_iter + 1):
        x_new = mean_projection(family, x)
        residual = float(np.linalg.norm(x_new - x))
        x = x_new
        if callback is not None:
            callback(it, x, objective(family, x))
        if residual < tol:
            break
    else:
        raise ConvergenceError(f"no fixed point within {max_iter} iterations", residual)
    residual = float(np.linalg.norm(x - mean_projection(family, x)))
    unique = None
    if check_unique:
        others = [solve_centralized(family, tol, max_iter, s, check_unique=False).x_star
                  for s in _spread_starts(family)]
        unique = all(np.linalg.norm(o - x) <= 100 * tol for o in others)
    return OptimalSolution(x, objective(family, x), residual, it, unique)


def project_intersection(family: SetFamily, v, tol: float = 1e-10, max_sweeps: int = 100_000,
                         check_nonempty: bool = True) -> np.ndarray:
    """Nearest point of the intersection of all sets, by Dykstra's method.

    Plain cyclic projections only find *some* common point; the correction
    terms make the limit the actual projection of ``v``.
    """
    if check_nonempty:
        sol = solve_centralized(family, check_unique=False)
        if not sol.intersection_nonempty:
            raise EmptyIntersectionError(
                f"sets do not intersect (min summed squared distance {sol.f_star:.3e}); "
                "use objective() for the empty case")
    x = np.asarray(v, dtype=float).copy()
    if all(s.contains(x, tol=0.0) for s in family):
        return x
    incr = [np.zeros_like(x) for _ in family]
    for _ in range(max_sweeps):
        x_prev = x
        for i, s in enumerate(family):
            y = s.project(x + incr[i])
            incr[i] = x + incr[i] - y
            x = y
        if np.linalg.norm(x - x_prev) < tol and max(s.distance(x) for s in family) <= tol:
            return x
    raise ConvergenceError(f"Dykstra did not settle within {max_sweeps} sweeps",
                           float(np.linalg.norm(x - x_prev)))


@dataclass(frozen=True, eq=False)
class CharacterizationReport:
    gaps_x: np.ndarray
    gaps_y: np.ndarray
    max_deviation: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_deviation <= 10 * self.tol


def check_optimality_characterization(family: SetFamily, x_star, y_star, tol: float = 1e-10) -> CharacterizationReport:
    """Every optimum sees each set through the same displacement ``x - P_i(x)``."""
    x = np.asarray(x_star, dtype=float)
    y = np.asarray(y_star, dtype=float)
    gx = np.array([x - s.project(x) for s in family])
    gy = np.array([y - s.project(y) for s in family])
    dev = float(np.max(np.linalg.norm(gx - gy, axis=1)))
    return CharacterizationReport(gx, gy, dev, tol)


@dataclass(frozen=True, eq=False)
class DiagnosticsRecord:
    t: float
    H: float
    h: float | None
    hbar: float
    f_bar: float
    gamma: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray


def consensus_diameter(X: np.ndarray) -> float:
    diff = X[:, None, :] - X[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def diagnostics_for(t: float, X, family: SetFamily, alpha_t: float, angle_t: float,
                    mode: ApproxMode, *, nonempty: bool | None = None, step: int = 0,
                    approx: tuple[np.ndarray, np.ndarray] | None = None) -> DiagnosticsRecord:
    """Diagnostics for one sample of the stacked states ``X`` (shape ``(n, m)``).

    ``approx`` may carry precomputed ``(gamma, theta)`` per agent; otherwise
    they come from fresh approximate projections. ``h`` is left as
    ``None`` when the sets have no common point.
    """
    X = np.asarray(X, dtype=float)
    if nonempty is None:
        nonempty = solve_centralized(family, check_unique=False).intersection_nonempty
    if approx is None:
        res = [approx_project(s, X[i], angle_t, mode, agent=i, step=step) for i, s in enumerate(family)]
        gamma = np.array([r.gamma for r in res])
        theta = np.array([r.realized_angle for r in res])
    else:
        gamma, theta = (np.asarray(a, dtype=float) for a in approx)
    h = None
    if nonempty:
        h = 0.5 * max(float(np.sum((x - project_intersection(family, x, check_nonempty=False)) ** 2))
                      for x in X)
    hbar = 0.5 * float(np.max(hull_distance(family, X)) ** 2)
    f_bar = objective(family, X.mean(axis=0))
    return DiagnosticsRecord(float(t), consensus_diameter(X), h, hbar, f_bar,
                             gamma, alpha_t * gamma, theta)
