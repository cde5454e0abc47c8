"""Online waypoint generation at the PFL-capped speed.

Each control step computes the maximum safe relative speed toward the human
from the robot's current effective mass, turns it into a commanded speed
along the straight start-goal segment, and advances the setpoint by one step.
Two cap semantics are supported:

* ``projection``: commanded speed = |v_rel,max| * (d_hat . w) - the literal
  dot-product projection; conservative, commanded speed never exceeds the cap.
* ``component``: commanded speed = |v_rel,max| / (d_hat . w) - caps the
  velocity component toward the human at exactly |v_rel,max|, which is the
  behavior the reproduction suites are checked against (relative speed rides
  the cap during cruise).

The setpoint advances from its own previous position (open-loop carrot), so
desired trajectories are straight lines regardless of tracking quality.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import wrap_angle
from .safety import EffectiveMassMethod, effective_mass, v_rel_max

PROJECTION_FLOOR = 0.2  # component mode falls back to projection below this


@dataclass(frozen=True)
class PlanState:
    """Immutable planning context for one scenario."""

    x_human: np.ndarray            # position of the human (pos_dim,)
    goal: np.ndarray               # goal task vector (task_dim,)
    start: np.ndarray              # start task vector (task_dim,)
    region: object                 # BodyRegion
    method: EffectiveMassMethod
    v_floor: float = 0.05
    goal_tol: float = 1e-3
    cap_mode: str = "projection"
    cap_margin: float = 0.0       # command this fraction below the cap
    accel_limit: float = None     # max commanded-speed slew, m/s^2 (None = unlimited)
    min_human_distance: float = 1e-6

    def __post_init__(self):
        if self.cap_mode not in ("projection", "component"):
            raise ValueError("cap_mode must be 'projection' or 'component'")

    @property
    def path_length(self):
        d = self.goal[: self.x_human.shape[0]] - self.start[: self.x_human.shape[0]]
        return float(np.linalg.norm(d))


@dataclass(frozen=True)
class Waypoint:
    """One setpoint: pose, rates, the active caps, and bookkeeping."""

    r_d: np.ndarray
    rdot_d: np.ndarray
    rddot_d: np.ndarray
    v_max: float                   # commanded translational speed
    v_rel_cap: float               # |v_rel,max| toward the human
    m_eff: float                   # effective mass used for the cap
    w_dir: np.ndarray              # unit vector setpoint -> human
    at_goal: bool = False
    events: tuple = ()


def plan_step(state, x_t, model, q, dt, v_prev=None):
    """Advance the setpoint from position ``x_t`` by one step of length dt.

    ``x_t`` is the planner's current position (the previous waypoint's
    translation; the initial end-effector position on the first call). The
    effective mass is evaluated at the measured configuration ``q``.
    ``v_prev`` is the previously commanded speed, used when ``accel_limit``
    bounds how fast the command may change between steps.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    pos_dim = state.x_human.shape[0]
    x_t = np.asarray(x_t, dtype=float)
    goal_pos = state.goal[:pos_dim]
    to_goal = goal_pos - x_t
    dist = float(np.linalg.norm(to_goal))
    n_orient = state.goal.shape[0] - pos_dim

    to_human = state.x_human - x_t
    human_dist = float(np.linalg.norm(to_human))
    if human_dist < state.min_human_distance:
        raise ValueError("setpoint coincides with the human position")
    w = to_human / human_dist

    if dist < state.goal_tol:
        m_eff = effective_mass(state.method, model, q, w)
        return Waypoint(
            r_d=state.goal.copy(),
            rdot_d=np.zeros_like(state.goal),
            rddot_d=np.zeros_like(state.goal),
            v_max=0.0,
            v_rel_cap=v_rel_max(state.region, m_eff),
            m_eff=m_eff,
            w_dir=w,
            at_goal=True,
            events=("at_goal",),
        )

    d_hat = to_goal / dist
    m_eff = effective_mass(state.method, model, q, w)
    cap = v_rel_max(state.region, m_eff)
    dw = float(d_hat @ w)
    events = []
    usable_cap = cap * (1.0 - state.cap_margin)
    if dw < -1e-12:
        # receding from the human: the modeled impact cannot occur; keep a
        # configurable floor speed instead of the (negative) projection
        v_cmd = max(usable_cap * dw, state.v_floor)
        events.append("v_floor")
    elif state.cap_mode == "component" and dw > PROJECTION_FLOOR:
        v_cmd = usable_cap / dw
    else:
        v_cmd = usable_cap * dw
    if state.accel_limit is not None and v_prev is not None:
        dv = v_cmd - v_prev
        bound = state.accel_limit * dt
        if dv > bound:
            v_cmd = v_prev + bound
        elif dv < -bound:
            v_cmd = v_prev - bound

    step = min(v_cmd * dt, dist)  # never overshoot the goal
    new_pos = x_t + step * d_hat
    frac = 1.0 - float(np.linalg.norm(goal_pos - new_pos)) / state.path_length
    frac = min(max(frac, 0.0), 1.0)

    d_orient = wrap_angle(state.goal[pos_dim:] - state.start[pos_dim:])
    r_d = np.concatenate([new_pos, state.start[pos_dim:] + d_orient * frac])
    rdot_d = np.concatenate([v_cmd * d_hat, d_orient * (v_cmd / state.path_length)])
    return Waypoint(
        r_d=r_d,
        rdot_d=rdot_d,
        rddot_d=np.zeros_like(r_d),
        v_max=float(v_cmd),
        v_rel_cap=float(cap),
        m_eff=float(m_eff),
        w_dir=w,
        at_goal=False,
        events=tuple(events),
    )
