"""Approximate projection onto a convex set.

An approximate projection of an outside point ``v`` is a boundary point
visible from ``v`` whose direction from ``v`` is within a given angle of
the exact projection direction. The choice inside that cone is free; this
module makes it deterministic by rotating the exact direction inside a
plane that is either fixed (``planar``) or drawn from a counter-keyed
generator (``random``).

Besides the point itself every call reports the tangent-plane point
``ph`` on the segment ``[v, pa]``, the stretch ratio
``gamma = |pa - v| / |ph - v|`` and the two triangle angles ``mu`` (at
``pa``) and ``vartheta`` (at the exact projection) that bound it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ball, ConvexSet, ray_boundary_hit

HALF_PI = math.pi / 2
CLAMP_MARGIN = 1e-6
BISECT_ITERS = 32
AXIS_TOL = 1e-8
# below this |axis - <axis,u>u| the batch path defers to the scalar routine
REORTHO_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ApproxMode:
    """How to pick a point inside the approximation cone.

    kind
        ``"exact"`` ignores the requested angle, ``"planar"`` rotates within
        ``span{u, axis}``, ``"random"`` rotates within a pseudo-random plane
        keyed by ``(seed, agent, step)``.
    """

    kind: str = "exact"
    axis: np.ndarray | None = None
    sign: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "planar", "random"):
            raise ValueError(f"unknown approximation mode {self.kind!r}")
        if self.kind == "planar":
            if self.axis is None:
                raise ValueError("planar mode needs a reference axis")
            a = np.asarray(self.axis, dtype=float)
            na = np.linalg.norm(a)
            if na == 0:
                raise ValueError("reference axis must be nonzero")
            object.__setattr__(self, "axis", a / na)
        if self.sign not in (1, -1, 1.0, -1.0):
            raise ValueError("rotation sign must be +1 or -1")

    @classmethod
    def exact(cls) -> "ApproxMode":
        return cls("exact")

    @classmethod
    def planar(cls, axis, sign: float = 1.0) -> "ApproxMode":
        return cls("planar", axis=axis, sign=sign)

    @classmethod
    def random(cls, seed: int = 0) -> "ApproxMode":
        return cls("random", seed=int(seed))


@dataclass(frozen=True, eq=False)
class ApproxResult:
    pa: np.ndarray
    pexact: np.ndarray
    ph: np.ndarray
    realized_angle: float
    gamma: float
    mu: float
    vartheta: float
    clamped: bool = False
    inside: bool = field(default=False)


def angle_between(x: np.ndarray, y: np.ndarray) -> float:
    """Angle in ``[0, pi]``; Kahan's formula, accurate for tiny angles too."""
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return math.nan
    a = ny * x
    b = nx * y
    return 2.0 * math.atan2(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))


def rotation_direction(u: np.ndarray, mode: ApproxMode, agent: int = 0, step: int = 0) -> np.ndarray | None:
    """Unit vector orthogonal to ``u`` spanning the rotation plane.

    Returns ``None`` in one dimension, where no such vector exists.
    """
    m = u.shape[0]
    if m == 1:
        return None
    if mode.kind == "random":
        rng = np.random.default_rng([mode.seed, agent, step])
        while True:
            g = rng.standard_normal(m)
            w = g - (g @ u) * u
            nw = np.linalg.norm(w)
            if nw > AXIS_TOL:
                w = w / nw
                w = w - (w @ u) * u
                return w / np.linalg.norm(w)
    a = mode.axis
    w = a - (a @ u) * u
    nw = np.linalg.norm(w)
    if nw < AXIS_TOL:
        # fall back to the canonical axes following the reference axis
        k0 = int(np.argmax(np.abs(a)))
        for j in range(1, m + 1):
            e = np.zeros(m)
            e[(k0 + j) % m] = 1.0
            w = e - (e @ u) * u
            nw = np.linalg.norm(w)
            if nw >= AXIS_TOL:
                break
    w = w / nw
    # second pass: a nearly parallel axis leaves w only roughly orthogonal
    w = w - (w @ u) * u
    return mode.sign * w / np.linalg.norm(w)


def visible_angle(set_: ConvexSet, v: np.ndarray) -> float | None:
    """Half-angle of the cone of rays from ``v`` that hit a ball; ``None`` otherwise."""
    if isinstance(set_, Ball):
        return math.asin(min(set_.radius / float(np.linalg.norm(v - set_.center)), 1.0))
    return None


def compute_ph(set_: ConvexSet, v, pa, pexact=None) -> np.ndarray:
    """Point where the tangent plane at the exact projection cuts ``[v, pa]``."""
    v = np.asarray(v, dtype=float)
    pa = np.asarray(pa, dtype=float)
    P = set_.project(v) if pexact is None else np.asarray(pexact, dtype=float)
    gap = v - P
    dist = float(np.linalg.norm(gap))
    if dist == 0.0:
        return v.copy()
    if np.array_equal(pa, P):
        return P.copy()
    n = gap / dist
    denom = float((pa - v) @ n)
    assert denom < 0.0, "segment does not cross the tangent plane"
    return v + (-dist / denom) * (pa - v)


def gamma_of(v, pa, ph) -> float:
    """Stretch ratio ``|pa - v| / |ph - v|``, 1 when ``ph == v``."""
    v = np.asarray(v, dtype=float)
    dh = float(np.linalg.norm(np.asarray(ph, dtype=float) - v))
    if dh == 0.0:
        return 1.0
    return float(np.linalg.norm(np.asarray(pa, dtype=float) - v)) / dh


def _ball_hit(rho, r, c, s):
    """Ray parameter and stretch ratio for a ball, cancellation-free.

    ``rho`` is the distance from ``v`` to the center and ``(c, s)`` the
    cosine and sine of the rotation angle. The near root of the
    ray-sphere quadratic is written as ``(rho^2 - r^2) / (b + sqrt(disc))``.
    ``gamma - 1`` is expanded into a product of nonnegative factors, so
    ``gamma >= 1`` survives rounding and points hugging the sphere keep
    full relative accuracy.
    """
    root = np.sqrt(np.maximum(r * r - (rho * s) ** 2, 0.0))
    den = rho * c + root
    excess = (rho - r) * (rho + r)
    return excess / den, 1.0 + s * s * excess / ((r * c + root) * den)


def _ball_angles(rho: float, r: float, phi: float) -> tuple[float, float]:
    """``(mu, vartheta)`` from the central angle between the hit point and the projection."""
    beta = math.asin(min(rho * math.sin(phi) / r, 1.0)) - phi
    return HALF_PI - phi - 0.5 * beta, HALF_PI + 0.5 * beta


def _hit(set_, v, u, w, phi):
    d = u if w is None or phi == 0.0 else math.cos(phi) * u + math.sin(phi) * w
    return ray_boundary_hit(set_, v, d)


def approx_project(set_: ConvexSet, v, requested_angle: float, mode: ApproxMode,
                   *, agent: int = 0, step: int = 0) -> ApproxResult:
    """Approximate projection of ``v`` onto ``set_`` at the requested angle.

    The realized angle equals the requested one unless no ray at that angle
    reaches the set, in which case it is clamped to just inside the visible
    cone and ``clamped`` is set.
    """
    if not 0.0 <= requested_angle < HALF_PI:
        raise ValueError(f"requested angle must lie in [0, pi/2), got {requested_angle}")
    v = np.asarray(v, dtype=float)
    if set_.contains(v, tol=0.0):
        return ApproxResult(v.copy(), v.copy(), v.copy(), 0.0, 1.0, HALF_PI, HALF_PI, inside=True)
    P = set_.project(v)
    gap = P - v
    u = gap / np.linalg.norm(gap)

    w = None if mode.kind == "exact" else rotation_direction(u, mode, agent, step)
    phi = 0.0 if w is None else float(requested_angle)
    clamped = w is None and mode.kind != "exact" and requested_angle > 0.0

    pa = None
    if phi > 0.0:
        psi = visible_angle(set_, v)
        if psi is not None and phi >= (1.0 - CLAMP_MARGIN) * psi:
            phi = (1.0 - CLAMP_MARGIN) * psi
            clamped = True
        pa = _hit(set_, v, u, w, phi)
        if pa is None:
            lo, hi = 0.0, phi
            for _ in range(BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if _hit(set_, v, u, w, mid) is None:
                    hi = mid
                else:
                    lo = mid
            phi = lo
            clamped = True
            pa = _hit(set_, v, u, w, phi) if phi > 0.0 else None
    if pa is None or phi == 0.0:
        return ApproxResult(P, P.copy(), P.copy(), 0.0, 1.0, HALF_PI, HALF_PI, clamped=clamped)

    if isinstance(set_, Ball):
        rho = float(np.linalg.norm(v - set_.center))
        c, sn = math.cos(phi), math.sin(phi)
        t, gamma = _ball_hit(rho, set_.radius, c, sn)
        mu, vartheta = _ball_angles(rho, set_.radius, phi)
        d = c * u + sn * w
        pa = v + t * d
        ph = v + ((rho - set_.radius) / c) * d
        return ApproxResult(pa, P, ph, phi, gamma, mu, vartheta, clamped=clamped)

    ph = compute_ph(set_, v, pa, P)
    mu = angle_between(P - pa, v - pa)
    vartheta = angle_between(v - P, pa - P)
    if math.isnan(mu):
        mu, vartheta = HALF_PI, HALF_PI
    return ApproxResult(pa, P, ph, phi, gamma_of(v, pa, ph), mu, vartheta, clamped=clamped)


def approx_project_balls(centers: np.ndarray, radii: np.ndarray, V: np.ndarray,
                         requested_angle: float, mode: ApproxMode, step: int = 0):
    """Vectorized :func:`approx_project` for one ball per row of ``V``.

    Returns ``(pa, realized_angle, gamma, clamped)`` as arrays. Used by the
    integrator's inner loop; the scalar routine is the reference.
    """
    n, m = V.shape
    D = V - centers
    rho = np.sqrt(np.einsum("ij,ij->i", D, D))
    outside = rho > radii
    if not outside.any():
        return V.copy(), np.zeros(n), np.ones(n), np.zeros(n, dtype=bool)
    all_out = outside.all()
    safe = rho if all_out else np.where(outside, rho, 1.0)
    U = D / -safe[:, None]

    if mode.kind == "exact" or requested_angle == 0.0 or m == 1:
        PA = centers - U * radii[:, None]
        if not all_out:
            PA[~outside] = V[~outside]
        clamped = outside.copy() if (m == 1 and mode.kind != "exact" and requested_angle > 0.0) \
            else np.zeros(n, dtype=bool)
        return PA, np.zeros(n), np.ones(n), clamped

    if mode.kind == "planar":
        a = mode.axis
        W = a - (U @ a)[:, None] * U
        nw = np.sqrt(np.einsum("ij,ij->i", W, W))
        if nw.min() < REORTHO_TOL:
            # nearly parallel axis: rebuild those rows with the scalar routine
            for i in np.flatnonzero(nw < REORTHO_TOL):
                W[i] = rotation_direction(U[i], mode) if outside[i] else 0.0
                nw[i] = mode.sign
        W *= (mode.sign / nw)[:, None]
    else:
        W = np.zeros_like(V)
        for i in np.flatnonzero(outside):
            W[i] = rotation_direction(U[i], mode, int(i), step)

    limit = (1.0 - CLAMP_MARGIN) * np.arcsin(np.minimum(radii / safe, 1.0))
    over = limit <= requested_angle
    phi = np.minimum(limit, requested_angle)
    cphi, sphi = np.cos(phi), np.sin(phi)
    t, gamma = _ball_hit(safe, radii, cphi, sphi)
    PA = V + (t * cphi)[:, None] * U + (t * sphi)[:, None] * W
    if not all_out:
        PA[~outside] = V[~outside]
        phi[~outside] = 0.0
        gamma[~outside] = 1.0
        over &= outside
    return PA, phi, gamma, over
