"""
Exact and approximate projections onto a disc
==============================================

A point outside a convex set has one nearest point in the set. An
approximate projection may instead return any boundary point seen from
the outside point within a cone around that nearest direction.
"""

import math

import numpy as np

from sdop import ApproxMode, Ball, approx_project

disc = Ball((0, 0), 1)
v = np.array([2.0, 0.0])

# the exact projection
print("P(v) =", disc.project(v), " distance", disc.distance(v))

# rotate the projection direction by 20 degrees inside the plane spanned
# with the y axis; the ray from v hits the circle a little higher up
mode = ApproxMode.planar((0, 1))
res = approx_project(disc, v, math.radians(20), mode)
print("Pa(v) =", res.pa.round(6), " realized angle (deg)", math.degrees(res.realized_angle))

# the tangent line at P(v) is x = 1; ph is where the segment [v, pa] crosses it
print("ph =", res.ph.round(6), " expected (1, tan 20deg) =", (1.0, round(math.tan(math.radians(20)), 6)))

# gamma stretches the stepsize: the move towards pa is gamma times as long
# as the move to the tangent line, and mu keeps it under control
print(f"gamma = {res.gamma:.6f} <= 1 + sin(phi)/sin(mu) = {1 + math.sin(res.realized_angle) / math.sin(res.mu):.6f}")

# from (2, 0) the disc fills a cone of half-angle 30 degrees; asking for more
# is clamped just inside that cone and flagged
wide = approx_project(disc, v, math.radians(45), mode)
print("asked 45 deg, got", round(math.degrees(wide.realized_angle), 6), "deg, clamped =", wide.clamped)

# gamma grows as the requested angle opens up
for deg in (0, 5, 10, 20, 25, 29):
    r = approx_project(disc, v, math.radians(deg), mode)
    print(f"  {deg:2d} deg  gamma = {r.gamma:.4f}")
