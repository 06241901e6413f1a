import math

import numpy as np
import pytest

from sdop.approx import ApproxMode
from sdop.diagnostics import (ConvergenceError, EmptyIntersectionError, check_optimality_characterization,
                              consensus_diameter, diagnostics_for, objective, project_intersection,
                              solve_centralized)
from sdop.geometry import Ball, Box, SetFamily

SQ3 = math.sqrt(3.0)


def test_objective_values(empty_family, nonempty_family):
    assert objective(empty_family, (0, -1)) == pytest.approx(3.0, abs=1e-14)
    assert objective(empty_family, (0, 0)) == pytest.approx(2 * (SQ3 - 1) ** 2 + 4, abs=1e-13)
    assert objective(nonempty_family, (0, 0)) == 0.0


def test_objective_increases_away_from_the_optimum(empty_family):
    # along the segment from the optimum towards (0, 0), then beyond
    vals = [objective(empty_family, (0, y)) for y in np.linspace(-1, 2, 31)]
    assert np.all(np.diff(vals) > 0)


def test_solver_on_disjoint_balls(empty_family):
    sol = solve_centralized(empty_family)
    np.testing.assert_allclose(sol.x_star, (0, -1), atol=1e-8)
    assert sol.f_star == pytest.approx(3.0, abs=1e-10)
    assert not sol.intersection_nonempty
    assert sol.unique


def test_solver_on_intersecting_balls(nonempty_family):
    sol = solve_centralized(nonempty_family)
    assert sol.f_star < 1e-12 and sol.intersection_nonempty
    assert all(s.distance(sol.x_star) < 1e-6 for s in nonempty_family)


def test_single_set_lands_on_the_projection_of_the_start():
    sol = solve_centralized(SetFamily([Ball((0, 0), 1)]), x0=(3, 4), check_unique=False)
    np.testing.assert_allclose(sol.x_star, (0.6, 0.8))
    assert sol.f_star == 0.0


def test_callback_and_monotone_objective(empty_family):
    seen = []
    solve_centralized(empty_family, x0=(10, 10), check_unique=False, callback=lambda k, x, f: seen.append(f))
    assert seen and np.all(np.diff(seen) <= 1e-12)


def test_non_convergence_reports_residual(empty_family):
    with pytest.raises(ConvergenceError) as info:
        solve_centralized(empty_family, x0=(50, 50), max_iter=3, check_unique=False)
    assert info.value.residual > 0


def test_gap_vectors_agree_between_starts(empty_family):
    a = solve_centralized(empty_family, x0=(10, 10), check_unique=False).x_star
    b = solve_centralized(empty_family, x0=(-10, -10), check_unique=False).x_star
    rep = check_optimality_characterization(empty_family, a, b)
    assert rep.ok
    # every ball sits at distance 1 from (0, -1)
    np.testing.assert_allclose(np.linalg.norm(rep.gaps_x, axis=1), 1.0, atol=1e-8)


def test_two_separated_balls_have_opposite_unit_gaps():
    fam = SetFamily([Ball((-2, 0), 1), Ball((2, 0), 1)])
    x = solve_centralized(fam, check_unique=False).x_star
    rep = check_optimality_characterization(fam, x, x)
    np.testing.assert_allclose(rep.gaps_x, [[1, 0], [-1, 0]], atol=1e-12)
    assert rep.max_deviation == 0.0


def test_characterization_flags_a_non_optimum(empty_family):
    assert not check_optimality_characterization(empty_family, (0, -1), (0, 0)).ok


def _brute_force_projection(family, v):
    best, step = None, 0.01
    lo, hi = np.array([-3.0, -4.0]), np.array([3.0, 3.0])
    for _ in range(6):
        xs = np.arange(lo[0], hi[0] + step / 2, step)
        ys = np.arange(lo[1], hi[1] + step / 2, step)
        G = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
        feasible = np.all([np.linalg.norm(G - s.center, axis=1) <= s.radius for s in family], axis=0)
        cand = G[feasible]
        best = cand[np.argmin(np.linalg.norm(cand - v, axis=1))]
        lo, hi = best - 20 * step, best + 20 * step
        step /= 10
    return best


def test_dykstra_matches_brute_force(nonempty_family):
    v = np.array([0.0, 5.0])
    p = project_intersection(nonempty_family, v)
    np.testing.assert_allclose(p, _brute_force_projection(nonempty_family, v), atol=1e-4)
    assert all(s.distance(p) < 1e-9 for s in nonempty_family)


def test_dykstra_is_not_plain_alternating_projection():
    # ball first, then half-plane: one cyclic sweep from (0.5, -2) stops at a
    # common point near (0.24, 0), while the nearest one is (0.5, 0)
    fam = SetFamily([Ball((0, 0), 1), Box((-10, 0), (10, 10))])
    v = np.array([0.5, -2.0])
    naive = fam[1].project(fam[0].project(v))
    assert all(s.contains(naive, tol=1e-12) for s in fam)
    p = project_intersection(fam, v)
    np.testing.assert_allclose(p, (0.5, 0.0), atol=1e-6)
    assert np.linalg.norm(naive - p) > 0.2


def test_projection_onto_intersection_of_identical_balls():
    fam = SetFamily([Ball((1, 1), 2), Ball((1, 1), 2)])
    np.testing.assert_allclose(project_intersection(fam, (5, 1)), (3, 1), atol=1e-10)


def test_point_already_inside_is_kept(nonempty_family):
    v = np.array([0.1, -0.2])
    np.testing.assert_array_equal(project_intersection(nonempty_family, v), v)


def test_projection_onto_empty_intersection_is_refused(empty_family):
    with pytest.raises(EmptyIntersectionError):
        project_intersection(empty_family, (0, 0))


def test_diagnostics_at_a_common_point(nonempty_family):
    X = np.zeros((3, 2))
    rec = diagnostics_for(0.0, X, nonempty_family, 0.5, 0.2, ApproxMode.planar((0, 1)))
    assert rec.H == 0 and rec.h == 0 and rec.f_bar == 0 and rec.hbar == 0


def test_diagnostics_in_exact_mode(empty_family):
    X = np.array([[-3.0, 3.0], [4.0, 2.0], [-5.0, -3.0]])
    rec = diagnostics_for(1.0, X, empty_family, 0.7, 0.3, ApproxMode.exact())
    np.testing.assert_array_equal(rec.gamma, 1.0)
    np.testing.assert_array_equal(rec.alpha, 0.7)
    assert rec.h is None
    assert rec.H == pytest.approx(consensus_diameter(X))
    assert rec.H == pytest.approx(np.linalg.norm(X[1] - X[2]))


def test_diagnostics_with_approximation_stretch_the_stepsize(empty_family):
    X = np.array([[-3.0, 3.0], [4.0, 2.0], [-5.0, -3.0]])
    rec = diagnostics_for(1.0, X, empty_family, 0.7, 0.3, ApproxMode.planar((0, 1)))
    assert np.all(rec.gamma > 1)
    np.testing.assert_allclose(rec.alpha, 0.7 * rec.gamma)
    # the third agent sees its disc under a half-angle of asin(1/5) < 0.3
    np.testing.assert_allclose(rec.theta[:2], 0.3)
    assert rec.theta[2] == pytest.approx(math.asin(0.2) * (1 - 1e-6))
