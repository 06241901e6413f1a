import json
import math
import textwrap
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from sdop import cli, runner
from sdop.export import read_trajectory_csv, render_svg, trajectory_header, write_trajectory_csv
from sdop.geometry import Ball, Box, HalfSpace
from sdop.network import DirectedGraph
from sdop.scenario import ScenarioError, build_config, bundled_scenarios, load_scenario, parse_scenario
from sdop.simulator import integrate

SHORT = ["integrator.t_end=3", "output.stride=50"]


def _text(body):
    return textwrap.dedent(body).lstrip()


MINIMAL = _text("""
    [sets]
    1.kind = ball
    1.center = (0, 0)
    1.radius = 1
    2.kind = box
    2.lower = (0, -1)
    2.upper = (2, 1)

    [agents]
    1.x0 = (3, 3)
    2.x0 = (-3, 0)

    [graph]
    segments = [{edges=[(1,2)], duration=0.5}, {edges=[(2,1)], duration=0.5}]
    periodic = true

    [stepsize]
    kind = constant
    value = 0.5

    [angle]
    kind = constant
    value = 0.1

    [approx]
    mode = random
    seed = 4

    [integrator]
    dt = 0.01
    t_end = 2
""")


class TestParse:
    def test_bundled_scenarios_are_listed(self):
        assert bundled_scenarios() == ["empty_sec8.cfg", "nonempty_sec8.cfg"]

    @pytest.mark.parametrize("name", ["empty_sec8.cfg", "nonempty_sec8.cfg"])
    def test_bundled_scenarios_build(self, name):
        cfg = build_config(load_scenario(name))
        assert len(cfg.family) == 3 and cfg.t_end == 2000 and cfg.dt == 0.01
        assert cfg.graph.period == 2.0

    def test_nonempty_scenario_contents(self):
        cfg = build_config(load_scenario("nonempty_sec8.cfg"))
        assert [tuple(s.center) for s in cfg.family] == [(-1, 0), (1, 0), (0, -2)]
        assert cfg.graph.graphs[0] == DirectedGraph.from_one_based(3, [(2, 1), (3, 2)])
        assert not cfg.graph.is_undirected
        assert cfg.stepsize(0) == 1.0 and cfg.angle(0) == pytest.approx(0.02)

    def test_empty_scenario_is_undirected(self):
        cfg = build_config(load_scenario("empty_sec8.cfg"))
        assert cfg.graph.is_undirected
        assert cfg.family[0].center[0] == pytest.approx(-math.sqrt(3))

    def test_minimal_scenario(self):
        cfg = build_config(parse_scenario(MINIMAL))
        assert isinstance(cfg.family[0], Ball) and isinstance(cfg.family[1], Box)
        assert cfg.mode.kind == "random" and cfg.mode.seed == 4

    def test_halfspace_kind(self):
        text = MINIMAL.replace("2.kind = box\n2.lower = (0, -1)\n2.upper = (2, 1)",
                               "2.kind = halfspace\n2.normal = (1, 0)\n2.offset = 0.5\n2.radius = 4")
        cfg = build_config(parse_scenario(text))
        assert isinstance(cfg.family[1], HalfSpace)

    @pytest.mark.parametrize("bad, needle, line", [
        ("1.radius = 1", "1.radius = (1", 4),
        ("1.radius = 1", "1.radiu = 1", 4),
        ("[angle]", "[angles]", 21),
        ("mode = random", "mode = sideways", 26),
        ("periodic = true", "periodic = maybe", 15),
    ])
    def test_errors_carry_the_line(self, bad, needle, line):
        with pytest.raises(ScenarioError) as info:
            build_config(parse_scenario(MINIMAL.replace(bad, needle), source="m.cfg"))
        assert info.value.line == line
        assert f"m.cfg:line {line}" in str(info.value)

    def test_column_points_at_the_value(self):
        with pytest.raises(ScenarioError) as info:
            build_config(parse_scenario(MINIMAL.replace("mode = random", "mode = sideways")))
        assert info.value.column == 8

    def test_missing_header(self):
        with pytest.raises(ScenarioError) as info:
            parse_scenario("dt = 1\n")
        assert info.value.line == 1

    def test_duplicate_key(self):
        with pytest.raises(ScenarioError) as info:
            parse_scenario(MINIMAL.replace("1.radius = 1", "1.radius = 1\n1.radius = 2"))
        assert info.value.line == 5

    def test_dimension_mismatch(self):
        with pytest.raises(ScenarioError):
            build_config(parse_scenario(MINIMAL.replace("1.x0 = (3, 3)", "1.x0 = (3, 3, 3)")))

    def test_overrides(self):
        sc = parse_scenario(MINIMAL).with_overrides(["stepsize.value=0.25", "integrator.t_end = 7"])
        cfg = build_config(sc)
        assert cfg.stepsize(0) == 0.25 and cfg.t_end == 7

    def test_unknown_override(self):
        with pytest.raises(ScenarioError):
            parse_scenario(MINIMAL).with_overrides(["integrator.order=5"])

    def test_arcs_outside_the_node_set(self):
        with pytest.raises(ScenarioError):
            build_config(parse_scenario(MINIMAL.replace("(1,2)]", "(1,5)]")))


@pytest.fixture(scope="module")
def traj():
    return integrate(build_config(load_scenario("empty_sec8.cfg").with_overrides(SHORT)))


class TestExport:
    def test_header(self):
        h = trajectory_header(2, 2)
        assert h[:5] == ["t", "x_1_1", "x_1_2", "x_2_1", "x_2_2"]
        assert h[5:9] == ["H", "h", "hbar", "f_bar"]
        assert h[-1] == "theta_2"

    def test_csv_round_trip(self, traj, tmp_path):
        path = write_trajectory_csv(traj, tmp_path / "t.csv")
        times, states, cols = read_trajectory_csv(path)
        assert np.array_equal(times, traj.times)
        assert np.array_equal(states, traj.states)
        assert np.all(np.isnan(cols["h"]))
        assert np.array_equal(cols["H"], [r.H for r in traj.diagnostics])

    def test_svg_is_well_formed(self, traj):
        root = ET.fromstring(render_svg(traj).encode())
        ns = "{http://www.w3.org/2000/svg}"
        cols = {p.get("data-column") for p in root.iter(f"{ns}polyline")}
        assert {"H", "f_bar", "x_1_1,x_1_2"} <= cols

    def test_svg_without_paths_panel_in_3d(self):
        sc = parse_scenario(_text("""
            [sets]
            1.kind = ball
            1.center = (0, 0, 0)
            1.radius = 1
            [agents]
            1.x0 = (2, 2, 2)
            [graph]
            segments = [{edges=[], duration=1}]
            periodic = true
            [stepsize]
            value = 1
            [angle]
            value = 0
            [integrator]
            t_end = 1
        """))
        root = ET.fromstring(render_svg(integrate(build_config(sc))).encode())
        cols = {p.get("data-column") for p in root.iter("{http://www.w3.org/2000/svg}polyline")}
        assert cols == {"H", "f_bar"}


class TestRunner:
    def test_run_writes_everything(self, tmp_path):
        rep = runner.run("nonempty_sec8.cfg", SHORT, out_dir=tmp_path)
        assert set(rep.files) == {"trajectory", "diagnostics", "plot", "report"}
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["conditions"][0]["theorem"] == "T3"
        assert data["oracle"]["intersection_nonempty"]

    def test_identical_bytes_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        runner.run("empty_sec8.cfg", SHORT, out_dir=a)
        runner.run("empty_sec8.cfg", SHORT, out_dir=b)
        for name in ("trajectory.csv", "diagnostics.csv", "plot.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_constant_stepsize_is_flagged_and_leaves_a_residual(self):
        rep = runner.run("empty_sec8.cfg", SHORT[:1] + ["stepsize.kind=constant", "stepsize.value=0.5"],
                         write=False)
        t4 = rep.conditions[0]
        assert t4.theorem == "T4" and not t4.ok
        assert rep.residual > 0

    def test_directed_empty_scenario_is_refused(self):
        with pytest.raises(runner.ValidationError):
            runner.run("empty_sec8.cfg", SHORT + ["graph.undirected=false"], write=False)

    def test_single_value_sweep_equals_a_plain_run(self):
        over = SHORT + ["angle.kind=constant", "angle.value=0"]
        rows = runner.sweep("empty_sec8.cfg", "stepsize.value", [0.3], over)
        plain = runner.run("empty_sec8.cfg", over + ["stepsize.kind=constant", "stepsize.value=0.3"], write=False)
        assert len(rows) == 1 and rows[0].status == "ok"
        assert rows[0].residual == plain.residual and rows[0].H == plain.final.H

    def test_sweep_rows_fail_individually(self):
        rows = runner.sweep("empty_sec8.cfg", "angle.value", [0.1, 2.0], SHORT, workers=2)
        assert [r.status for r in rows] == ["ok", "error"]
        assert "pi/2" in rows[1].error

    def test_check_nonempty(self):
        rep = runner.check("nonempty_sec8.cfg")
        assert rep.ok and "A1 satisfied (window 2)" in rep.notes
        assert rep.conditions[0].theorem == "T3" and rep.conditions[0].ok

    def test_check_directed_with_t4(self):
        rep = runner.check("nonempty_sec8.cfg", theorems=["T4"])
        assert rep.hard_errors == ["Theorem 4 requires undirected graphs (the sets do not intersect)"]

    def test_check_dwell(self):
        rep = runner.check("nonempty_sec8.cfg", ["integrator.dt=0.5"])
        assert not rep.ok and "integrator config error" in rep.hard_errors[0]


class TestCli:
    def test_run(self, tmp_path, capsys):
        assert cli.main(["run", "nonempty_sec8.cfg", "--out", str(tmp_path)]
                        + sum((["-o", o] for o in SHORT), [])) == 0
        assert "wrote" in capsys.readouterr().out

    def test_quiet(self, tmp_path, capsys):
        assert cli.main(["check", "empty_sec8.cfg", "-q"]) == 0
        assert capsys.readouterr().out == ""

    def test_oracle(self, capsys):
        assert cli.main(["oracle", "empty_sec8.cfg"]) == 0
        out = capsys.readouterr().out
        assert "f* = 3" in out and "intersection empty" in out

    def test_sweep_writes_table(self, tmp_path):
        assert cli.main(["sweep", "empty_sec8.cfg", "stepsize.value", "0.5,0.2", "--out", str(tmp_path),
                         "--workers", "1", "-q"] + sum((["-o", o] for o in SHORT), [])) == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "value,residual,H,status,error" and len(lines) == 3
        assert (tmp_path / "stepsize.value=0.5" / "trajectory.csv").exists()

    def test_validation_exit(self, capsys):
        assert cli.main(["run", "empty_sec8.cfg", "-o", "graph.undirected=false"]) == 2
        assert "Theorem 4 requires undirected graphs" in capsys.readouterr().err

    def test_config_error_exit(self):
        assert cli.main(["run", "empty_sec8.cfg", "-o", "integrator.dt=0.9", "-q"]) == 2

    def test_divergence_exit(self, tmp_path):
        assert cli.main(["run", "empty_sec8.cfg", "-o", "agents.1.x0=(1e9, 0)", "-o", "integrator.t_end=1",
                         "--out", str(tmp_path)]) == 3

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[sets]\n1.kind = ball\n1.center = (0, 0\n")
        assert cli.main(["check", str(bad)]) == 4
        assert "line 3" in capsys.readouterr().err

    def test_missing_file_exit(self):
        assert cli.main(["check", "no_such_file.cfg"]) == 4
