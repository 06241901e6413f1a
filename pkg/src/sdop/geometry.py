"""Closed-form convex sets: projection, distance, ray hits, hull metrics.

Every set kind here is closed, bounded and has a nonempty interior. The
projection, the ray/boundary intersection and the support function are all
analytic, so nothing in this module runs an inner solver except the
distance to the convex hull of a whole family (see :func:`hull_distance`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

ATOL = 1e-12


class DimensionError(ValueError):
    """A point does not live in the same space as the set."""


def _as_point(v, dim: int | None = None) -> np.ndarray:
    p = np.asarray(v, dtype=float)
    if p.ndim != 1:
        raise DimensionError(f"expected a 1-d point, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionError(f"point has dimension {p.shape[0]}, set has {dim}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


class ConvexSet:
    """Base class for the analytic set kinds.

    Subclasses implement ``_project``, ``_ray_interval`` and ``support``;
    the public wrappers here do input validation.
    """

    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def project(self, v) -> np.ndarray:
        p = _as_point(v, self.dim)
        if self.contains(p, tol=0.0):
            return p.copy()
        return self._project(p)

    def distance(self, v) -> float:
        p = _as_point(v, self.dim)
        return float(np.linalg.norm(p - self.project(p)))

    def contains(self, v, tol: float = ATOL) -> bool:
        raise NotImplementedError

    def ray_interval(self, origin, direction) -> tuple[float, float] | None:
        """Parameter interval ``[lo, hi]`` where ``origin + t*direction`` is in the set."""
        o = _as_point(origin, self.dim)
        d = _as_point(direction, self.dim)
        return self._ray_interval(o, d)

    def support(self, U: np.ndarray) -> np.ndarray:
        """Support function ``max_{y in K} <u, y>`` for each row of ``U``."""
        raise NotImplementedError

    def bounding_ball(self) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def _project(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _ray_interval(self, o, d):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    kind: str = field(default="ball", init=False)

    def __post_init__(self):
        c = _as_point(self.center)
        object.__setattr__(self, "center", c)
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, v, tol: float = ATOL) -> bool:
        p = _as_point(v, self.dim)
        return bool(np.linalg.norm(p - self.center) <= self.radius + tol)

    def _project(self, p):
        d = p - self.center
        return self.center + d * (self.radius / np.linalg.norm(d))

    def _ray_interval(self, o, d):
        d = d / np.linalg.norm(d)
        oc = o - self.center
        b = float(d @ oc)
        disc = b * b - (float(oc @ oc) - self.radius**2)
        if disc < 0:
            return None
        s = math.sqrt(disc)
        return -b - s, -b + s

    def support(self, U):
        U = np.atleast_2d(U)
        return U @ self.center + self.radius * np.linalg.norm(U, axis=1)

    def bounding_ball(self):
        return self.center, self.radius


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        lo = _as_point(self.lower)
        hi = _as_point(self.upper, lo.shape[0])
        if not np.all(lo < hi):
            raise ValueError("box needs lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, v, tol: float = ATOL) -> bool:
        p = _as_point(v, self.dim)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def _project(self, p):
        return np.clip(p, self.lower, self.upper)

    def _ray_interval(self, o, d):
        d = d / np.linalg.norm(d)
        lo, hi = -math.inf, math.inf
        for k in range(self.dim):
            if d[k] == 0.0:
                if o[k] < self.lower[k] or o[k] > self.upper[k]:
                    return None
                continue
            t1 = (self.lower[k] - o[k]) / d[k]
            t2 = (self.upper[k] - o[k]) / d[k]
            lo = max(lo, min(t1, t2))
            hi = min(hi, max(t1, t2))
        if lo > hi:
            return None
        return lo, hi

    def support(self, U):
        U = np.atleast_2d(U)
        return np.maximum(U * self.lower, U * self.upper).sum(axis=1)

    def bounding_ball(self):
        return (self.lower + self.upper) / 2, float(np.linalg.norm(self.upper - self.lower)) / 2


@dataclass(frozen=True, eq=False)
class HalfSpace(ConvexSet):
    """``{x : <normal, x> <= offset}`` cut down to a bounding ball."""

    normal: np.ndarray
    offset: float
    bound_radius: float
    bound_center: np.ndarray | None = None
    kind: str = field(default="halfspace", init=False)

    def __post_init__(self):
        a = _as_point(self.normal)
        if abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise ValueError("half-space normal must have unit norm")
        c = np.zeros_like(a) if self.bound_center is None else _as_point(self.bound_center, a.shape[0])
        if not self.bound_radius > 0:
            raise ValueError("bounding radius must be positive")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "bound_center", c)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "bound_radius", float(self.bound_radius))
        # empty interior when the plane misses or only grazes the ball
        if self._gap() <= -self.bound_radius:
            raise ValueError("half-space does not meet the interior of its bounding ball")

    def _gap(self) -> float:
        # signed distance from the ball center to the plane, positive inside
        return self.offset - float(self.normal @ self.bound_center)

    @property
    def cuts_ball(self) -> bool:
        return self._gap() < self.bound_radius

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def contains(self, v, tol: float = ATOL) -> bool:
        p = _as_point(v, self.dim)
        return bool(
            self.normal @ p <= self.offset + tol
            and np.linalg.norm(p - self.bound_center) <= self.bound_radius + tol
        )

    def _project(self, p):
        a, c, R = self.normal, self.bound_center, self.bound_radius
        d = p - c
        nd = np.linalg.norm(d)
        y = p if nd <= R else c + d * (R / nd)
        if a @ y <= self.offset:
            return y
        y = p - (a @ p - self.offset) * a
        if np.linalg.norm(y - c) <= R:
            return y
        # both constraints active: nearest point on the rim sphere
        p0 = c + self._gap() * a
        rho = math.sqrt(max(R**2 - self._gap() ** 2, 0.0))
        w = y - p0
        nw = np.linalg.norm(w)
        if nw == 0.0:
            w = _any_orthogonal(a)
            nw = 1.0
        return p0 + w * (rho / nw)

    def _ray_interval(self, o, d):
        d = d / np.linalg.norm(d)
        ball = Ball(self.bound_center, self.bound_radius)._ray_interval(o, d)
        if ball is None:
            return None
        lo, hi = ball
        ad = float(self.normal @ d)
        slack = self.offset - float(self.normal @ o)
        if ad == 0.0:
            if slack < 0:
                return None
        elif ad > 0:
            hi = min(hi, slack / ad)
        else:
            lo = max(lo, slack / ad)
        if lo > hi:
            return None
        return lo, hi

    def support(self, U):
        U = np.atleast_2d(U)
        a, c, R = self.normal, self.bound_center, self.bound_radius
        nu = np.linalg.norm(U, axis=1)
        out = U @ c + R * nu
        safe = np.where(nu > 0, nu, 1.0)
        peak = c + R * U / safe[:, None]
        over = (peak @ a > self.offset) & (nu > 0)
        if np.any(over):
            g = self._gap()
            p0 = c + g * a
            rho = math.sqrt(max(R**2 - g**2, 0.0))
            W = U[over] - np.outer(U[over] @ a, a)
            out[over] = U[over] @ p0 + rho * np.linalg.norm(W, axis=1)
        return out

    def bounding_ball(self):
        return self.bound_center, self.bound_radius


def _any_orthogonal(a: np.ndarray) -> np.ndarray:
    k = int(np.argmin(np.abs(a)))
    e = np.zeros_like(a)
    e[k] = 1.0
    w = e - (e @ a) * a
    return w / np.linalg.norm(w)


class SetFamily(Sequence):
    """Ordered sets, one per agent, all in the same dimension."""

    def __init__(self, sets: Sequence[ConvexSet]):
        sets = tuple(sets)
        if not sets:
            raise ValueError("a set family needs at least one set")
        dims = {s.dim for s in sets}
        if len(dims) != 1:
            raise DimensionError(f"sets disagree on dimension: {sorted(dims)}")
        self._sets = sets
        self.dim = dims.pop()

    def __getitem__(self, i):
        return self._sets[i]

    def __len__(self) -> int:
        return len(self._sets)

    def __iter__(self) -> Iterator[ConvexSet]:
        return iter(self._sets)

    def __repr__(self) -> str:
        return f"SetFamily({list(self._sets)!r})"

    @property
    def all_balls(self) -> bool:
        return all(isinstance(s, Ball) for s in self._sets)


def project(set_: ConvexSet, v) -> np.ndarray:
    """Nearest point of ``set_`` to ``v``; returns ``v`` itself when inside."""
    return set_.project(v)


def distance(set_: ConvexSet, v) -> float:
    return set_.distance(v)


def ray_boundary_hit(set_: ConvexSet, origin, direction) -> np.ndarray | None:
    """First point where the ray from ``origin`` along ``direction`` meets the boundary.

    Returns ``None`` when the ray misses. The origin must lie outside the
    set; the returned point ``z`` then satisfies ``[origin, z] ∩ bd = {z}``.
    """
    o = _as_point(origin, set_.dim)
    d = _as_point(direction, set_.dim)
    nd = np.linalg.norm(d)
    if nd == 0.0:
        raise ValueError("ray direction must be nonzero")
    if set_.contains(o, tol=0.0):
        raise ValueError("ray origin lies inside the set")
    d = d / nd
    span = set_._ray_interval(o, d)
    if span is None:
        return None
    lo, hi = span
    if hi < 0:
        return None
    return o + max(lo, 0.0) * d


class Diameter(NamedTuple):
    value: float
    exact: bool


def _pair_reach(A: ConvexSet, B: ConvexSet) -> tuple[float, bool]:
    """Largest distance between a point of ``A`` and a point of ``B``."""
    exact = True
    for S in (A, B):
        if isinstance(S, HalfSpace) and S.cuts_ball:
            exact = False
    A_ = A if isinstance(A, (Ball, Box)) else Ball(*A.bounding_ball())
    B_ = B if isinstance(B, (Ball, Box)) else Ball(*B.bounding_ball())
    if isinstance(A_, Box) and isinstance(B_, Ball):
        A_, B_ = B_, A_
    if isinstance(A_, Ball) and isinstance(B_, Ball):
        return float(np.linalg.norm(A_.center - B_.center)) + A_.radius + B_.radius, exact
    if isinstance(A_, Ball):
        far = np.maximum((B_.lower - A_.center) ** 2, (B_.upper - A_.center) ** 2)
        return math.sqrt(float(far.sum())) + A_.radius, exact
    far = np.maximum(np.abs(A_.upper - B_.lower), np.abs(B_.upper - A_.lower)) ** 2
    return math.sqrt(float(far.sum())), exact


def hull_diameter(family: SetFamily) -> Diameter:
    """Diameter of the convex hull of all sets.

    The hull has the same diameter as the union, so this is the largest
    pairwise reach. Exact for balls and boxes; half-spaces that actually cut
    their bounding ball contribute the ball, which only gives an upper bound.
    """
    best, exact = 0.0, True
    sets = list(family)
    for i in range(len(sets)):
        for j in range(i, len(sets)):
            r, e = _pair_reach(sets[i], sets[j])
            best = max(best, r)
            exact = exact and e
    return Diameter(best, exact)


def family_support(family: SetFamily, U: np.ndarray) -> np.ndarray:
    """Support function of the convex hull of the family."""
    return np.max([s.support(U) for s in family], axis=0)


def _hull_distance_2d(family, X, n_grid=2048, n_refine=60):
    phi = np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False)
    U = np.column_stack([np.cos(phi), np.sin(phi)])
    G = X @ U.T - family_support(family, U)[None, :]
    j = np.argmax(G, axis=1)
    step = 2 * np.pi / n_grid
    lo, hi = phi[j] - step, phi[j] + step

    def g(ang):
        V = np.column_stack([np.cos(ang), np.sin(ang)])
        return np.einsum("ij,ij->i", X, V) - family_support(family, V)

    # golden-section search, vectorized over points
    inv = (math.sqrt(5) - 1) / 2
    for _ in range(n_refine):
        a = hi - inv * (hi - lo)
        b = lo + inv * (hi - lo)
        ga, gb = g(a), g(b)
        left = ga > gb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
    best = np.maximum(np.maximum(ga, gb), G[np.arange(X.shape[0]), j])
    return np.maximum(best, 0.0)


def _hull_distance_generic(family, x):
    m = family.dim
    centers = np.array([s.bounding_ball()[0] for s in family])
    u0 = x - centers.mean(axis=0)
    nu = np.linalg.norm(u0)
    u0 = u0 / nu if nu > 0 else np.eye(m)[0]
    z0 = np.append(u0, float(x @ u0 - family_support(family, u0[None, :])[0]))

    cons = [
        {"type": "ineq", "fun": lambda z: 1.0 - z[:m] @ z[:m]},
        {"type": "ineq", "fun": lambda z: x @ z[:m] - np.array([s.support(z[None, :m])[0] for s in family]) - z[m]},
    ]
    res = minimize(lambda z: -z[m], z0, method="SLSQP", constraints=cons,
                   options={"ftol": 1e-14, "maxiter": 500})
    return max(float(res.x[m]), float(z0[m]), 0.0)


def hull_distance(family: SetFamily, X) -> np.ndarray | float:
    """Distance from each point to the convex hull of the family.

    Uses the dual form ``max_{|u|=1} <u, x> - sigma(u)`` where ``sigma`` is
    the hull's support function (the max of the members' support
    functions). In the plane the maximization is a dense angular grid plus
    golden-section polishing; in other dimensions it goes through SLSQP.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    if X2.shape[1] != family.dim:
        raise DimensionError("point dimension does not match the family")
    if family.dim == 1:
        U = np.array([[1.0], [-1.0]])
        out = np.maximum((X2 @ U.T - family_support(family, U)[None, :]).max(axis=1), 0.0)
    elif family.dim == 2:
        out = _hull_distance_2d(family, X2)
    else:
        out = np.array([_hull_distance_generic(family, x) for x in X2])
    return float(out[0]) if single else out
