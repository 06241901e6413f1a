import math

import numpy as np
import pytest

from sdop.approx import ApproxMode
from sdop.geometry import Ball, SetFamily
from sdop.network import DirectedGraph, GraphSchedule
from sdop.schedules import Constant, Piecewise, Rational
from sdop.simulator import (SATISFIED, UNKNOWN, VIOLATED, ConfigError, DivergenceError, SimConfig, integrate,
                            step_rhs, validate_conditions)

SQ3 = math.sqrt(3.0)
PLANAR = ApproxMode.planar((0, 1))


def _directed():
    return GraphSchedule([(DirectedGraph.from_one_based(3, [(2, 1), (3, 2)]), 1.0),
                          (DirectedGraph.from_one_based(3, [(1, 3)]), 1.0)], periodic=True)


def _undirected():
    return GraphSchedule([(DirectedGraph.from_one_based(3, [(3, 2)], True), 1.0),
                          (DirectedGraph.from_one_based(3, [(1, 2)], True), 1.0)], periodic=True)


def _config(family, graph, alpha=Rational(20, 20), theta=Rational(1, 50), x0=None, **kw):
    x0 = x0 if x0 is not None else [(-3, 3), (4, 2), (-5, -3)]
    return SimConfig(family, graph, alpha, theta, kw.pop("mode", PLANAR), x0, **kw)


class TestRhs:
    def test_common_point_in_every_set(self, nonempty_family):
        cfg = _config(nonempty_family, _directed(), x0=np.zeros((3, 2)))
        np.testing.assert_array_equal(step_rhs(np.zeros((3, 2)), 0.3, cfg), 0.0)

    def test_single_agent_projection_pull(self):
        cfg = SimConfig(SetFamily([Ball((0, 0), 1)]), GraphSchedule.constant(DirectedGraph(1)), Constant(1.0),
                        Constant(0.0), ApproxMode.exact(), [(2, 0)])
        np.testing.assert_allclose(step_rhs([[2.0, 0.0]], 0.0, cfg), [[-1.0, 0.0]])

    def test_pure_consensus(self):
        fam = SetFamily([Ball((0, 0), 5), Ball((0, 0), 5)])
        g = GraphSchedule.constant(DirectedGraph.complete(2))
        cfg = SimConfig(fam, g, Constant(0.0), Constant(0.0), ApproxMode.exact(), [(0, 0), (2, 0)])
        np.testing.assert_allclose(step_rhs([[0, 0], [2, 0]], 0.0, cfg), [[2, 0], [-2, 0]])

    def test_graph_follows_the_schedule(self, nonempty_family):
        cfg = _config(nonempty_family, _directed(), alpha=Constant(0.0))
        X = np.array([[0.0, 0], [1, 0], [0, 1]])
        # first segment: 1 hears 2, 2 hears 3
        np.testing.assert_allclose(step_rhs(X, 0.5, cfg), [[1, 0], [-1, 1], [0, 0]])
        # second segment: 3 hears 1
        np.testing.assert_allclose(step_rhs(X, 1.5, cfg), [[0, 0], [0, 0], [0, -1]])


class TestConfig:
    def test_dt_against_dwell_time(self, nonempty_family):
        with pytest.raises(ConfigError):
            _config(nonempty_family, _directed(), dt=0.2)

    def test_shape_mismatch(self, nonempty_family):
        with pytest.raises(ConfigError):
            _config(nonempty_family, _directed(), x0=[(0, 0), (1, 1)])

    def test_angle_at_right_angle(self, nonempty_family):
        with pytest.raises(ConfigError):
            _config(nonempty_family, _directed(), theta=Constant(math.pi / 2))

    def test_fingerprint_tracks_parameters(self, nonempty_family):
        a = _config(nonempty_family, _directed())
        b = _config(nonempty_family, _directed())
        c = _config(nonempty_family, _directed(), dt=0.02)
        assert a.fingerprint() == b.fingerprint() != c.fingerprint()


class TestIntegrate:
    def test_agent_at_rest_inside_its_set(self):
        cfg = SimConfig(SetFamily([Ball((0, 0), 1)]), GraphSchedule.constant(DirectedGraph(1)), Constant(1.0),
                        Constant(0.3), PLANAR, [(0.2, 0.1)], dt=0.1, t_end=5)
        traj = integrate(cfg)
        np.testing.assert_array_equal(traj.states, np.broadcast_to([[0.2, 0.1]], traj.states.shape))

    def test_deterministic(self, empty_family):
        cfg = _config(empty_family, _undirected(), t_end=6, stride=7)
        a, b = integrate(cfg), integrate(cfg)
        assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)
        assert [r.H for r in a.diagnostics] == [r.H for r in b.diagnostics]

    def test_random_mode_is_deterministic(self, empty_family):
        cfg = _config(empty_family, _undirected(), t_end=3, mode=ApproxMode.random(5))
        assert np.array_equal(integrate(cfg, False).states, integrate(cfg, False).states)

    def test_steps_never_straddle_a_switch(self, empty_family):
        cfg = _config(empty_family, _undirected(), t_end=2.5, dt=0.03)
        traj = integrate(cfg, diagnostics=False)
        for s in (1.0, 2.0):
            assert np.any(np.isclose(traj.times, s, atol=1e-12))
        assert traj.times[-1] == 2.5

    def test_stride_and_final_sample(self, empty_family):
        cfg = _config(empty_family, _undirected(), t_end=1.05, dt=0.01, stride=50)
        traj = integrate(cfg)
        np.testing.assert_allclose(traj.times, [0, 0.5, 1.0, 1.05])
        assert len(traj.diagnostics) == 4
        assert traj.meta["steps"] == 105

    def test_divergence_guard(self, empty_family):
        cfg = _config(empty_family, _undirected(), x0=[(1e9, 0), (0, 0), (0, 0)], t_end=1)
        with pytest.raises(DivergenceError) as info:
            integrate(cfg, diagnostics=False)
        assert info.value.t == pytest.approx(0.01)

    def test_diagnostics_recorded(self, nonempty_family):
        cfg = _config(nonempty_family, _directed(), x0=[(-4, 3), (3, 5), (-6, -3)], t_end=4, stride=100)
        traj = integrate(cfg)
        assert traj.meta["intersection_nonempty"]
        assert all(r.h is not None for r in traj.diagnostics)
        assert traj.diagnostics[-1].H < traj.diagnostics[0].H
        xi = max(np.linalg.norm(a.center - b.center) + a.radius + b.radius
                 for a in nonempty_family for b in nonempty_family)
        assert traj.meta["xi"] == pytest.approx(xi)

    def test_piecewise_stepsize(self, empty_family):
        alpha = Piecewise([(0.0, Constant(1.0)), (1.0, Rational(20, 20))])
        cfg = _config(empty_family, _undirected(), alpha=alpha, t_end=2)
        assert integrate(cfg, False).states.shape[1:] == (3, 2)


def _statuses(report):
    return {c.name: c.status for c in report.conditions}


class TestConditions:
    def test_decaying_schedules_satisfy_the_nonempty_result(self, nonempty_family):
        rep = validate_conditions(_config(nonempty_family, _directed()), "T3")
        assert rep.ok, str(rep)

    def test_decaying_schedules_satisfy_the_empty_result(self, empty_family):
        rep = validate_conditions(_config(empty_family, _undirected()), "T4")
        assert rep.ok, str(rep)

    def test_constant_stepsize_violates_square_integrability(self, empty_family):
        rep = validate_conditions(_config(empty_family, _undirected(), alpha=Constant(0.5),
                                          theta=Constant(0.0)), "T4")
        st = _statuses(rep)
        assert st["integral of alpha^2 finite"] == VIOLATED
        assert st["necessary: alpha_t -> 0"] == VIOLATED
        assert not rep.ok

    def test_harmonic_stepsize_with_exact_projection(self, nonempty_family):
        rep = validate_conditions(_config(nonempty_family, _directed(), alpha=Rational(1, 1),
                                          theta=Constant(0.0)), "T3")
        assert rep.ok, str(rep)

    def test_directed_schedule_for_the_empty_result(self, empty_family):
        rep = validate_conditions(_config(empty_family, _directed()), "T4")
        assert _statuses(rep)["undirected graphs"] == VIOLATED
        assert "Theorem 4 requires undirected graphs" in str(rep)

    def test_constant_result_needs_constant_schedules(self, empty_family):
        rep = validate_conditions(_config(empty_family, _undirected()), "T6")
        st = _statuses(rep)
        assert st["constant stepsize alpha > 0"] == VIOLATED
        assert st["constant angle"] == VIOLATED
        ok = validate_conditions(_config(empty_family, _undirected(), alpha=Constant(0.2), theta=Constant(0.1)),
                                 "T6")
        assert ok.ok

    def test_constant_positive_angle_breaks_the_tan_condition(self, nonempty_family):
        rep = validate_conditions(_config(nonempty_family, _directed(), theta=Constant(0.1)), "T3")
        assert _statuses(rep)["integral of alpha*tan(theta) finite"] == VIOLATED

    def test_unknown_tag(self, nonempty_family):
        with pytest.raises(ValueError):
            validate_conditions(_config(nonempty_family, _directed()), "T9")

    def test_a1_violation_is_reported(self, nonempty_family):
        g = GraphSchedule([(DirectedGraph.from_one_based(3, [(2, 1), (3, 2)]), 1.0), (DirectedGraph(3), 1.0)],
                          periodic=True)
        rep = validate_conditions(_config(nonempty_family, g), "T3")
        assert _statuses(rep)["A1 uniformly jointly strongly connected"] == VIOLATED

    def test_statuses_are_one_of_three(self, empty_family):
        rep = validate_conditions(_config(empty_family, _undirected()), "T4")
        assert {c.status for c in rep.conditions} <= {SATISFIED, VIOLATED, UNKNOWN}
