"""Fixed-step closed-loop execution: plan -> control -> saturate -> integrate -> log.

One simulation is strictly sequential and deterministic: identical scenarios
produce bit-identical logs. The control torque is held over each RK4 step
(zero-order hold at the integration rate); the optional spring contact with
the human sphere is part of the plant and is evaluated inside the RK4 stages.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .controllers import make_controller
from .errors import NumericalDivergence, ScenarioError
from .planner import PlanState, Waypoint, plan_step
from .robot import load_robot
from .safety import EffectiveMassMethod, body_region, effective_mass, v_rel_max

DIVERGENCE_NORM = 1e6


@dataclass
class ContactSpec:
    enabled: bool = False
    radius: float = 0.1


@dataclass
class SettlingSpec:
    coordinate: int = 0
    fraction: float = 0.95
    hold: float = 0.2


@dataclass
class Scenario:
    """Everything needed to reproduce one run."""

    model: object
    controller_spec: dict
    plan: PlanState
    q0: np.ndarray
    dt: float = 1e-3
    t_max: float = 20.0
    settling: SettlingSpec = field(default_factory=SettlingSpec)
    contact: ContactSpec = field(default_factory=ContactSpec)
    pd_setpoint: str = "waypoint"  # 'waypoint' or 'goal'
    stop_on_settle: bool = False
    label: str = "run"
    source: dict | None = None

    def __post_init__(self):
        if not 0.0 < self.dt <= 0.01:
            raise ScenarioError("dt must lie in (0, 0.01]")
        if self.t_max <= 0:
            raise ScenarioError("t_max must be positive")
        self.q0 = np.asarray(self.q0, dtype=float)
        if self.q0.shape != (self.model.n,):
            raise ScenarioError("q0 dimension must match the joint count")
        lim = self.model.joint_limits
        if lim is not None and (np.any(self.q0 < lim[:, 0]) or np.any(self.q0 > lim[:, 1])):
            raise ScenarioError("q0 violates declared joint limits")
        if self.pd_setpoint not in ("waypoint", "goal"):
            raise ScenarioError("pd_setpoint must be 'waypoint' or 'goal'")


@dataclass
class TrajectoryLog:
    """Fixed-stride per-step record of one run."""

    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    r_d: np.ndarray
    rdot_d: np.ndarray
    v_rel: np.ndarray
    v_cap: np.ndarray
    v_cmd: np.ndarray
    tau_pre: np.ndarray
    tau: np.ndarray
    m_eff: np.ndarray
    f_contact: np.ndarray
    events: list
    scenario: Scenario

    def __len__(self):
        return self.t.shape[0]

    @property
    def dt(self):
        return self.scenario.dt

    @property
    def pos_dim(self):
        return self.scenario.model.pos_dim


def _goal_waypoint(plan, model, q, w, method):
    m_eff = effective_mass(method, model, q, w)
    return Waypoint(
        r_d=plan.goal.copy(),
        rdot_d=np.zeros_like(plan.goal),
        rddot_d=np.zeros_like(plan.goal),
        v_max=0.0,
        v_rel_cap=v_rel_max(plan.region, m_eff),
        m_eff=m_eff,
        w_dir=w,
        at_goal=False,
    )


def run(scenario):
    """Integrate the closed loop and return the trajectory log."""
    model = scenario.model
    plan = scenario.plan
    dt = scenario.dt
    n_steps = int(round(scenario.t_max / dt))
    nq = model.n
    pos_dim = model.pos_dim
    task_dim = model.task_dim

    controller = make_controller(scenario.controller_spec, model, dt)
    pd_to_goal = controller.name == "pd" and scenario.pd_setpoint == "goal"

    tau_lim = model.torque_limits
    rate_lim = model.torque_rate_limits
    k_contact = plan.region.k_si
    human = plan.x_human

    log = TrajectoryLog(
        t=np.empty(n_steps),
        q=np.empty((n_steps, nq)),
        qd=np.empty((n_steps, nq)),
        r=np.empty((n_steps, task_dim)),
        rdot=np.empty((n_steps, task_dim)),
        r_d=np.empty((n_steps, task_dim)),
        rdot_d=np.empty((n_steps, task_dim)),
        v_rel=np.empty(n_steps),
        v_cap=np.empty(n_steps),
        v_cmd=np.empty(n_steps),
        tau_pre=np.empty((n_steps, nq)),
        tau=np.empty((n_steps, nq)),
        m_eff=np.empty(n_steps),
        f_contact=np.zeros(n_steps),
        events=[],
        scenario=scenario,
    )

    q = scenario.q0.copy()
    qd = np.zeros(nq)
    r0 = model.pose(q)
    sp_pos = r0[:pos_dim].copy()
    v_prev = 0.0 if plan.accel_limit is not None else None
    tau_prev = None
    settle_steps = 0
    hold_steps = int(round(scenario.settling.hold / dt))
    target = plan.goal[scenario.settling.coordinate]
    start_val = r0[scenario.settling.coordinate]
    threshold = scenario.settling.fraction * target
    settle_sign = 1.0 if target >= start_val else -1.0

    def contact_force(pos):
        # linear spring against the human sphere; force pushes the robot out
        d = pos - human
        dist = float(np.linalg.norm(d))
        if dist >= scenario.contact.radius or dist == 0.0:
            return None
        pen = scenario.contact.radius - dist
        return (k_contact * pen / dist) * d

    steps_done = n_steps
    for i in range(n_steps):
        t = i * dt
        r, J = model.pose_and_jacobian(q)
        rdot = J @ qd

        wp = plan_step(plan, sp_pos, model, q, dt, v_prev=v_prev)
        if not wp.at_goal:
            sp_pos = wp.r_d[:pos_dim]
            if v_prev is not None:
                v_prev = wp.v_max

        # measured-state safety quantities for the log
        to_human = human - r[:pos_dim]
        w_meas = to_human / np.linalg.norm(to_human)
        m_eff_meas = effective_mass(plan.method, model, q, w_meas)
        cap_meas = v_rel_max(plan.region, m_eff_meas)
        v_rel = float(rdot[:pos_dim] @ w_meas)

        f_ext = None
        f_norm = 0.0
        if scenario.contact.enabled:
            fc = contact_force(r[:pos_dim])
            if fc is not None:
                f_ext = np.zeros(task_dim)
                f_ext[:pos_dim] = fc
                f_norm = float(np.linalg.norm(fc))

        if pd_to_goal:
            wp_ctrl = _goal_waypoint(plan, model, q, w_meas, plan.method)
        else:
            wp_ctrl = wp
        tau_cmd, events = controller.torques(
            q, qd, wp_ctrl.r_d, wp_ctrl.rdot_d, wp_ctrl.rddot_d,
            u_dir=_embed(w_meas, task_dim), f_ext=f_ext,
        )

        tau = tau_cmd
        if tau_lim is not None:
            tau = np.clip(tau, -tau_lim, tau_lim)
        if rate_lim is not None and tau_prev is not None:
            tau = tau_prev + np.clip(tau - tau_prev, -rate_lim * dt, rate_lim * dt)
        tau_prev = tau

        log.t[i] = t
        log.q[i] = q
        log.qd[i] = qd

        # plant integration with the torque held over the step
        def deriv(s):
            qq = s[:nq]
            dd = s[nq:]
            M, cqd, G = model.dynamics(qq, dd)
            rhs = tau - cqd - G
            if scenario.contact.enabled:
                pos = model.pose(qq)[:pos_dim]
                fc = contact_force(pos)
                if fc is not None:
                    Jv = model.jacobian(qq)[:pos_dim, :]
                    rhs = rhs + Jv.T @ fc
            return np.concatenate([dd, np.linalg.solve(M, rhs)])

        s = np.concatenate([q, qd])
        k1 = deriv(s)
        k2 = deriv(s + 0.5 * dt * k1)
        k3 = deriv(s + 0.5 * dt * k2)
        k4 = deriv(s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)) or float(np.linalg.norm(s)) > DIVERGENCE_NORM:
            raise NumericalDivergence(f"state diverged at step {i} (t = {t:.3f} s)", step=i)
        q = s[:nq]
        qd = s[nq:]

        log.r[i] = r
        log.rdot[i] = rdot
        log.r_d[i] = wp_ctrl.r_d
        log.rdot_d[i] = wp_ctrl.rdot_d
        log.v_rel[i] = v_rel
        log.v_cap[i] = cap_meas
        log.v_cmd[i] = wp.v_max
        log.tau_pre[i] = tau_cmd
        log.tau[i] = tau
        log.m_eff[i] = m_eff_meas
        log.f_contact[i] = f_norm
        evt = list(wp.events) + list(events)
        if f_norm > 0.0:
            evt.append("contact")
        log.events.append(";".join(evt))

        if scenario.stop_on_settle:
            if settle_sign * (r[scenario.settling.coordinate] - threshold) >= 0.0:
                settle_steps += 1
                if settle_steps >= hold_steps:
                    steps_done = i + 1
                    break
            else:
                settle_steps = 0

    if steps_done != n_steps:
        for name in ("t", "q", "qd", "r", "rdot", "r_d", "rdot_d", "v_rel", "v_cap",
                     "v_cmd", "tau_pre", "tau", "m_eff", "f_contact"):
            setattr(log, name, getattr(log, name)[:steps_done])
        log.events = log.events[:steps_done]
    return log


def _embed(w, task_dim):
    u = np.zeros(task_dim)
    u[: w.shape[0]] = w
    return u


def check_torque_limits(log, model):
    """Per-joint peak torque and torque rate versus the model's limits."""
    tau = log.tau
    peak = np.max(np.abs(tau), axis=0)
    if len(log) > 1:
        rate = np.max(np.abs(np.diff(tau, axis=0)), axis=0) / log.dt
    else:
        rate = np.zeros(model.n)
    report = {
        "peak_torque": peak,
        "peak_rate": rate,
        "torque_ok": True,
        "rate_ok": True,
        "violations": [],
    }
    if model.torque_limits is not None:
        bad = np.abs(tau) > model.torque_limits[None, :] * (1.0 + 1e-12)
        if np.any(bad):
            report["torque_ok"] = False
            step, joint = np.argwhere(bad)[0]
            report["violations"].append(f"torque joint {joint + 1} at step {step}")
    if model.torque_rate_limits is not None and len(log) > 1:
        rates = np.abs(np.diff(tau, axis=0)) / log.dt
        bad = rates > model.torque_rate_limits[None, :] * (1.0 + 1e-9)
        if np.any(bad):
            report["rate_ok"] = False
            step, joint = np.argwhere(bad)[0]
            report["violations"].append(f"torque rate joint {joint + 1} at step {step}")
    return report


def contact_probe(log, region=None, human_radius=None):
    """Peak contact force recorded in the log, or None if never in contact."""
    if not log.scenario.contact.enabled:
        raise ScenarioError("contact checking was not enabled for this run")
    peak = float(np.max(log.f_contact)) if len(log) else 0.0
    return peak if peak > 0.0 else None


# ---------------------------------------------------------------------------
# scenario files and log export
# ---------------------------------------------------------------------------

def scenario_from_dict(doc, base_dir=None):
    """Build a Scenario from its JSON document (see shipped scenarios/)."""
    try:
        model_ref = doc["model"]
        if isinstance(model_ref, str) and model_ref.endswith(".json") and base_dir:
            candidate = Path(base_dir) / model_ref
            model = load_robot(candidate if candidate.exists() else model_ref)
        else:
            model = load_robot(model_ref)
        if "gravity_y" in doc and hasattr(model, "gravity_y"):
            model.gravity_y = float(doc["gravity_y"])
        plan_doc = doc["plan"]
        region = body_region(plan_doc["body_region"])
        method = EffectiveMassMethod.from_dict(plan_doc.get("mass_method", {}))
        goal = np.asarray(plan_doc["goal"], dtype=float)
        q0 = np.asarray(doc["q0"], dtype=float)
        start = model.pose(q0)
        plan = PlanState(
            x_human=np.asarray(plan_doc["human"], dtype=float),
            goal=goal,
            start=start,
            region=region,
            method=method,
            v_floor=plan_doc.get("v_floor", 0.05),
            goal_tol=plan_doc.get("goal_tolerance", 1e-3),
            cap_mode=plan_doc.get("cap_mode", "projection"),
            cap_margin=plan_doc.get("cap_margin", 0.0),
            accel_limit=plan_doc.get("accel_limit"),
        )
        settling = SettlingSpec(**doc.get("settling", {}))
        contact = ContactSpec(**doc.get("contact", {}))
        return Scenario(
            model=model,
            controller_spec=doc["controller"],
            plan=plan,
            q0=q0,
            dt=float(doc.get("dt", 1e-3)),
            t_max=float(doc.get("t_max", 20.0)),
            settling=settling,
            contact=contact,
            pd_setpoint=doc.get("pd_setpoint", "waypoint"),
            stop_on_settle=doc.get("stop_on_settle", False),
            label=doc.get("name", "run"),
            source=doc,
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario missing required field {exc}") from exc


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    return scenario_from_dict(doc, base_dir=path.parent)


def packaged_scenario(name):
    ref = resources.files("pflsim").joinpath(f"scenarios/{name}.json")
    if not ref.is_file():
        raise ScenarioError(f"no packaged scenario named {name!r}")
    return scenario_from_dict(json.loads(ref.read_text()))


def csv_header(log):
    model = log.scenario.model
    n = model.n
    cols = ["t"]
    cols += [f"q{i + 1}" for i in range(n)]
    cols += [f"qd{i + 1}" for i in range(n)]
    cols += ["x", "y", "z"][: model.pos_dim]
    cols += ["theta"] if model.task_dim == 3 else ["alpha", "beta", "gamma"]
    cols += ["v_rel", "v_cap"]
    cols += [f"tau{i + 1}" for i in range(n)]
    cols += ["m_eff", "event"]
    return cols


def write_csv(log, path):
    """Write the log CSV: t,q*,qd*,pose,v_rel,v_cap,tau*,m_eff,event."""
    path = Path(path)
    cols = csv_header(log)
    with path.open("w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(log)):
            row = [log.t[i], *log.q[i], *log.qd[i], *log.r[i],
                   log.v_rel[i], log.v_cap[i], *log.tau[i], log.m_eff[i]]
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("," + log.events[i] + "\n")
    return path
