import json

import numpy as np
import pytest

from pflsim.errors import DimensionMismatch, EmptyLog
from pflsim.metrics import (
    RunMetrics,
    comparison_table,
    compute_metrics,
    control_effort,
    mean_abs_error,
    settling_time,
)
from pflsim.planner import PlanState
from pflsim.safety import EffectiveMassMethod, body_region
from pflsim.simulator import Scenario, SettlingSpec, TrajectoryLog
from pflsim.robot import PlanarThreeR


def _make_log(r, r_d, tau, dt=1e-3, goal=None, coord=0):
    n = r.shape[0]
    model = PlanarThreeR.default()
    goal = np.asarray(goal if goal is not None else r_d[-1], dtype=float)
    start = r[0].astype(float) if len(r) else np.zeros(3)
    plan = PlanState(x_human=np.array([7.0, 2.5]), goal=goal,
                     start=start, region=body_region("abdomen"),
                     method=EffectiveMassMethod())
    scenario = Scenario(model=model,
                        controller_spec={"type": "pd", "Kp": 1.0, "Kd": 1.0},
                        plan=plan, q0=np.zeros(3), dt=dt, t_max=max(n, 1) * dt,
                        settling=SettlingSpec(coordinate=coord))
    zeros = np.zeros((n, 3))
    return TrajectoryLog(
        t=np.arange(n) * dt, q=zeros, qd=zeros, r=r.astype(float),
        rdot=zeros, r_d=r_d.astype(float), rdot_d=zeros,
        v_rel=np.zeros(n), v_cap=np.ones(n), v_cmd=np.zeros(n),
        tau_pre=tau.astype(float), tau=tau.astype(float),
        m_eff=np.ones(n), f_contact=np.zeros(n), events=[""] * n,
        scenario=scenario,
    )


def test_perfect_tracking_zero_error():
    r = np.tile([1.0, 2.0, 0.5], (100, 1))
    log = _make_log(r, r.copy(), np.zeros((100, 3)))
    assert np.allclose(mean_abs_error(log, "setpoint"), 0.0)


def test_constant_offset_error():
    r_d = np.tile([1.0, 2.0, 0.5], (100, 1))
    r = r_d + np.array([0.5, 0.0, 0.0])
    log = _make_log(r, r_d, np.zeros((100, 3)))
    assert mean_abs_error(log, "setpoint")[0] == pytest.approx(0.5)


def test_error_wraps_orientation():
    r_d = np.tile([0.0, 0.0, 3.1], (10, 1))
    r = np.tile([0.0, 0.0, -3.1], (10, 1))
    log = _make_log(r, r_d, np.zeros((10, 3)))
    # difference is 2*pi - 6.2, not 6.2
    assert mean_abs_error(log, "setpoint")[2] == pytest.approx(2 * np.pi - 6.2, abs=1e-9)


def test_goal_reference():
    r = np.tile([1.0, 1.0, 0.0], (50, 1))
    r_d = np.tile([1.0, 1.0, 0.0], (50, 1))
    log = _make_log(r, r_d, np.zeros((50, 3)), goal=np.array([2.0, 1.0, 0.0]))
    assert mean_abs_error(log, "goal")[0] == pytest.approx(1.0)


def test_error_reordering_invariance_and_scaling():
    rng = np.random.default_rng(3)
    r_d = rng.normal(size=(64, 3))
    err = rng.normal(size=(64, 3)) * 0.1
    r = r_d + err
    log = _make_log(r, r_d, np.zeros((64, 3)))
    base = mean_abs_error(log, "setpoint")
    perm = rng.permutation(64)
    log2 = _make_log(r[perm], r_d[perm], np.zeros((64, 3)))
    assert np.allclose(mean_abs_error(log2, "setpoint"), base)
    log3 = _make_log(r_d + 3.0 * err, r_d, np.zeros((64, 3)))
    assert np.allclose(mean_abs_error(log3, "setpoint"), 3.0 * base)


def test_empty_log_raises():
    log = _make_log(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3)),
                    goal=np.array([1.0, 0.0, 0.0]))
    with pytest.raises(EmptyLog):
        mean_abs_error(log)
    with pytest.raises(EmptyLog):
        control_effort(log)


def test_effort_zero_and_unit():
    r = np.zeros((1000, 3))
    log = _make_log(r, r, np.zeros((1000, 3)))
    assert control_effort(log) == 0.0
    tau = np.zeros((1000, 3))
    tau[:, 0] = 1.0  # one joint, 1 N.m for 1 s at dt = 1e-3
    log = _make_log(r, r, tau)
    assert control_effort(log) == pytest.approx(1.0)


def test_effort_additive_over_concatenation():
    rng = np.random.default_rng(5)
    tau = rng.normal(size=(400, 3))
    r = np.zeros((400, 3))
    whole = control_effort(_make_log(r, r, tau))
    first = control_effort(_make_log(r[:150], r[:150], tau[:150]))
    second = control_effort(_make_log(r[150:], r[150:], tau[150:]))
    assert whole == pytest.approx(first + second)


def test_settling_time_detects_hold():
    n = 2000
    r = np.zeros((n, 3))
    goal = np.array([1.0, 0.0, 0.0])
    # crosses 0.95 at step 1000 and stays
    r[:, 0] = np.minimum(np.arange(n) / 1000.0, 1.0) * 0.96
    r_d = np.tile(goal, (n, 1))
    log = _make_log(r, r_d, np.zeros((n, 3)), goal=goal)
    t = settling_time(log)
    assert t == pytest.approx(0.99, abs=2e-2)


def test_settling_time_ignores_transient_crossing():
    n = 3000
    goal = np.array([1.0, 0.0, 0.0])
    r = np.zeros((n, 3))
    r[:, 0] = 0.5
    r[500:550, 0] = 0.97  # brief crossing, shorter than the 0.2 s hold
    r[2000:, 0] = 0.97
    log = _make_log(r, np.tile(goal, (n, 1)), np.zeros((n, 3)), goal=goal)
    assert settling_time(log) == pytest.approx(2.0, abs=1e-2)


def test_settling_time_none_when_never():
    n = 100
    goal = np.array([1.0, 0.0, 0.0])
    r = np.zeros((n, 3))
    log = _make_log(r, np.tile(goal, (n, 1)), np.zeros((n, 3)), goal=goal)
    assert settling_time(log) is None


def test_comparison_table_single_and_order():
    m1 = RunMetrics("pd", 12.9, [0.8, 0.08, 0.09], 9495.0, 0.7, 0)
    doc, text = comparison_table([m1])
    assert doc["rows"][0][0] == "pd"
    assert "settling_time_s" in text
    m2 = RunMetrics("ctm", 3.9, [0.39, 0.03, 0.07], 10793.0, 0.78, 0)
    doc, text = comparison_table([m1, m2], labels=["PD", "CTM"])
    assert [r[0] for r in doc["rows"]] == ["PD", "CTM"]


def test_comparison_table_dimension_mismatch():
    m1 = RunMetrics("a", 1.0, [0.1, 0.1, 0.1], 1.0, 0.1, 0)
    m2 = RunMetrics("b", 1.0, [0.1] * 6, 1.0, 0.1, 0)
    with pytest.raises(DimensionMismatch):
        comparison_table([m1, m2])


def test_compute_metrics_roundtrip():
    n = 500
    goal = np.array([1.0, 0.0, 0.0])
    r = np.tile(goal, (n, 1))
    log = _make_log(r, r.copy(), np.ones((n, 3)), goal=goal)
    m = compute_metrics(log, label="x")
    assert m.label == "x"
    assert m.control_effort_Nms == pytest.approx(3 * n * 1e-3)
    doc = m.to_dict()
    assert json.dumps(doc)  # serializable
