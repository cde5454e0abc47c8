"""Quantitative evaluation of trajectory logs and comparison-table assembly."""

import json
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DimensionMismatch, EmptyLog
from .linalg import wrap_angle

CAP_TOLERANCE = 1.02


def _check_nonempty(log):
    if len(log) == 0:
        raise EmptyLog("log holds no samples")


def mean_abs_error(log, reference="setpoint"):
    """Per-coordinate mean absolute tracking error.

    ``reference='setpoint'`` measures against the planner's instantaneous
    setpoint r_d(n); ``reference='goal'`` against the final goal pose. The
    comparison suites use the goal reference (see module notes in README).
    Orientation differences are wrapped before averaging.
    """
    _check_nonempty(log)
    pos = log.pos_dim
    if reference == "setpoint":
        err = log.r - log.r_d
    elif reference == "goal":
        err = log.r - log.scenario.plan.goal[None, :]
    else:
        raise ValueError("reference must be 'setpoint' or 'goal'")
    err[:, pos:] = wrap_angle(err[:, pos:])
    return np.mean(np.abs(err), axis=0)


def control_effort(log):
    """Cumulative absolute torque, sum over joints of integral |tau| dt."""
    _check_nonempty(log)
    return float(np.sum(np.abs(log.tau)) * log.dt)


def settling_time(log):
    """First time the monitored coordinate reaches its settling fraction and
    holds it for the configured window; None if it never settles."""
    _check_nonempty(log)
    spec = log.scenario.settling
    target = log.scenario.plan.goal[spec.coordinate]
    start = log.r[0, spec.coordinate]
    threshold = spec.fraction * target
    sign = 1.0 if target >= start else -1.0
    reached = sign * (log.r[:, spec.coordinate] - threshold) >= 0.0
    hold = max(int(round(spec.hold / log.dt)), 1)
    n = len(log)
    # run lengths of consecutive reached-samples, computed backwards
    runs = np.zeros(n, dtype=int)
    acc = 0
    for i in range(n - 1, -1, -1):
        acc = acc + 1 if reached[i] else 0
        runs[i] = acc
    for i in range(n):
        if reached[i] and (runs[i] >= hold or i + runs[i] == n):
            return float(log.t[i])
    return None


def peak_relative_speed(log):
    _check_nonempty(log)
    return float(np.max(log.v_rel))


def cap_violations(log, tolerance=CAP_TOLERANCE):
    """Number of steps whose relative speed toward the human exceeds tolerance*cap."""
    _check_nonempty(log)
    return int(np.sum(log.v_rel > tolerance * log.v_cap))


@dataclass
class RunMetrics:
    label: str
    settling_time_s: float | None
    mean_abs_error: list
    control_effort_Nms: float
    peak_v_rel: float
    cap_violations: int

    def to_dict(self):
        return asdict(self)


def compute_metrics(log, label=None, error_reference="goal"):
    return RunMetrics(
        label=label or log.scenario.label,
        settling_time_s=settling_time(log),
        mean_abs_error=[float(v) for v in mean_abs_error(log, reference=error_reference)],
        control_effort_Nms=control_effort(log),
        peak_v_rel=peak_relative_speed(log),
        cap_violations=cap_violations(log),
    )


def comparison_table(metrics_list, labels=None):
    """Aligned comparison across runs; returns (dict, text)."""
    if not metrics_list:
        raise ValueError("need at least one run")
    dims = {len(m.mean_abs_error) for m in metrics_list}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed task dimensions in comparison: {sorted(dims)}")
    dim = dims.pop()
    if labels is None:
        labels = [m.label for m in metrics_list]
    coord_names = ["e_x", "e_y", "e_theta"] if dim == 3 else \
        ["e_x", "e_y", "e_z", "e_alpha", "e_beta", "e_gamma"]
    doc = {
        "columns": ["label", "settling_time_s", *coord_names, "control_effort_Nms"],
        "rows": [],
    }
    for label, m in zip(labels, metrics_list):
        doc["rows"].append(
            [label, m.settling_time_s, *[round(v, 6) for v in m.mean_abs_error],
             round(m.control_effort_Nms, 3)]
        )
    widths = [max(len(str(r[i])) for r in [doc["columns"], *doc["rows"]]) for i in range(len(doc["columns"]))]
    lines = []
    for row in [doc["columns"], *doc["rows"]]:
        lines.append("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())
    return doc, "\n".join(lines) + "\n"


def write_metrics(metrics, path):
    with open(path, "w") as fh:
        json.dump(metrics.to_dict(), fh, indent=2)
        fh.write("\n")
