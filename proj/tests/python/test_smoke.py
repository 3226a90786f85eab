import math
import os
from pathlib import Path

import numpy as np
import pytest

import hybreach as hb

DATA = Path(os.environ.get("HYBREACH_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def fixture_system():
    return hb.double_integrator(hb.box([-10, -10], [10, 10]), hb.box([-1], [1]))


def test_geometry():
    parts = hb.uniform_partition(hb.box([0, 0], [1, 2]), [2, 2])
    assert len(parts) == 4
    assert sum(p.volume() for p in parts) == pytest.approx(2.0)
    diamond = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    r = hb.min_area_rotated_rect(diamond)
    assert r.area() == pytest.approx(2.0)
    assert r.angle == pytest.approx(math.pi / 4)


def test_network_and_relaxation():
    net = hb.load_network(str(DATA / "double_integrator_policy.json"))
    assert net.hidden_widths() == [5, 5]
    assert net.eval(np.array([1.0, 0.0]))[0] == pytest.approx(0.29139775442335453, rel=1e-12)
    dom = hb.box([-1, -1], [1, 1])
    cb = hb.crown_bounds(net, dom)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1, 1, size=(200, 2)):
        y = net.eval(x)
        assert np.all(cb.lower_at(x) <= y + 1e-9)
        assert np.all(y <= cb.upper_at(x) + 1e-9)


def test_zero_controller_preimage():
    sys = fixture_system()
    run = hb.hybreach_lp_plus(sys, hb.zero_network(2, 1, [5, 5]), hb.box([4, -0.25], [5, 0.25]), 1)
    b = run.aggregate_bounds(-1)
    np.testing.assert_allclose(b.lower, [3.75, -0.25], atol=1e-6)
    np.testing.assert_allclose(b.upper, [5.25, 0.25], atol=1e-6)
    assert run.lp_count == 4


def test_hybrid_run_and_oracle():
    sys = fixture_system()
    net = hb.load_network(str(DATA / "double_integrator_policy.json"))
    target = hb.box([4.5, -0.25], [5.0, 0.25])
    run = hb.hybreach_lp_plus(sys, net, target, 5, hb.PartitionParams(tsp=[2, 2], brsp=4))
    assert run.lp_count == hb.lp_count(2, 4, 4, 5) == 320
    assert len(run.aggregate(-5)) == 4
    region = run.aggregate_bounds(-5)
    est = hb.mc_true_bp(sys, net, target, -5, region, 20000, 3)
    assert est.members.shape[1] == 2
    err = hb.error_metric(run.aggregate_area(-5), est.area_axis)
    assert err >= -0.02
    for x in est.members[:50]:
        assert any(b.contains(x, 1e-6) for b in run.aggregate(-5))


def test_errors_surface_as_exceptions():
    with pytest.raises(hb.HybreachError):
        hb.error_metric(1.0, 0.0)
    with pytest.raises(hb.HybreachError):
        hb.box([1], [0])
    with pytest.raises(hb.HybreachError):
        hb.load_network("/nonexistent.json")


def test_lp():
    p = hb.LpProblem(1)
    p.set_objective(np.array([1.0]), hb.Sense.Maximize)
    p.add_constraint(np.array([1.0]), hb.Relation.LessEqual, 3.0)
    p.set_bounds(0, 0.0, math.inf)
    s = hb.solve(p)
    assert s.status == hb.LpStatus.Optimal
    assert s.value == pytest.approx(3.0)
