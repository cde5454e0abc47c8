#!/usr/bin/env python3
"""Render paper-style figures from pflsim CSV logs and JSON sidecars.

Consumes only the simulator's documented file formats (trajectory.csv,
meta.json, metrics.json, limits grids); it never links against the simulator
package itself.

    python render.py --kind speed   --in RUN/trajectory.csv ... --out speed.png
    python render.py --kind traj    --in RUN/trajectory.csv ... --out traj.png
    python render.py --kind joints  --in RUN/trajectory.csv ... --out joints.png
    python render.py --kind errors  --in RUN/trajectory.csv ... --out errors.png
    python render.py --kind torques --in RUN/trajectory.csv ... --out torques.png
    python render.py --kind heatmap --in limits.csv --out heatmap.png

Speed figures draw the PFL cap as a dashed red line and the actual relative
velocity as a solid line. Error figures show per-coordinate tracking errors
against the goal pose found in the sibling meta.json.
"""

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("speed", "traj", "joints", "errors", "torques", "heatmap")


class RenderError(Exception):
    pass


def load_log(path):
    """Parse a trajectory CSV into {column: array} (the event column as str)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if not header:
        raise RenderError(f"{path}: empty input")
    cols = header.split(",")
    numeric = cols[:-1] if cols[-1] == "event" else cols
    data = np.genfromtxt(path, delimiter=",", skip_header=1,
                         usecols=range(len(numeric)))
    if data.size == 0:
        raise RenderError(f"{path}: empty input")
    data = np.atleast_2d(data)
    out = {name: data[:, i] for i, name in enumerate(numeric)}
    out["_path"] = path
    out["_label"] = _label_for(path)
    out["_meta"] = _sibling_meta(path)
    return out


def _label_for(path):
    meta = _sibling_meta(path)
    if meta and "label" in meta:
        return meta["label"]
    return path.parent.name or path.stem


def _sibling_meta(path):
    meta_path = Path(path).parent / "meta.json"
    if meta_path.exists():
        try:
            return json.loads(meta_path.read_text())
        except json.JSONDecodeError:
            return None
    return None


def require(log, *names):
    for name in names:
        if name not in log:
            raise RenderError(f"{log['_path']}: missing column {name!r}")


def _joint_columns(log, prefix):
    names = []
    i = 1
    while f"{prefix}{i}" in log:
        names.append(f"{prefix}{i}")
        i += 1
    if not names:
        raise RenderError(f"{log['_path']}: missing column {prefix}1")
    return names


def _pose_columns(log):
    pos = [c for c in ("x", "y", "z") if c in log]
    orient = ["theta"] if "theta" in log else [c for c in ("alpha", "beta", "gamma") if c in log]
    if not pos:
        raise RenderError(f"{log['_path']}: missing column 'x'")
    return pos, orient


def render_speed(logs):
    fig, axes = plt.subplots(len(logs), 1, figsize=(7, 2.2 * len(logs)),
                             sharex=True, squeeze=False)
    for ax, log in zip(axes[:, 0], logs):
        require(log, "t", "v_rel", "v_cap")
        ax.plot(log["t"], log["v_cap"], "r--", label="PFL maximum velocity")
        ax.plot(log["t"], log["v_rel"], "-", color="C0", label="actual relative velocity")
        ax.set_ylabel("v toward human [m/s]")
        ax.set_title(log["_label"], fontsize=9)
        ax.legend(fontsize=7, loc="best")
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def render_traj(logs):
    fig, ax = plt.subplots(figsize=(6, 5))
    human = None
    for log in logs:
        require(log, "x", "y")
        ax.plot(log["x"], log["y"], "-", label=f"{log['_label']} actual")
        meta = log["_meta"]
        if meta:
            plan = meta.get("scenario", {}).get("plan", {})
            goal = plan.get("goal")
            if goal:
                start = (log["x"][0], log["y"][0])
                ax.plot([start[0], goal[0]], [start[1], goal[1]], "--", alpha=0.6,
                        label=f"{log['_label']} desired")
            human = plan.get("human", human)
    if human:
        ax.plot(human[0], human[1], "ro", markersize=10, label="human")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(fontsize=7)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    return fig


def render_joints(logs):
    names = _joint_columns(logs[0], "q")
    fig, axes = plt.subplots(len(names), 1, figsize=(7, 1.6 * len(names)),
                             sharex=True, squeeze=False)
    for log in logs:
        require(log, "t", *names)
        for ax, name in zip(axes[:, 0], names):
            ax.plot(log["t"], log[name], label=log["_label"])
            ax.set_ylabel(f"{name} [rad]")
    axes[0, 0].legend(fontsize=7)
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def render_errors(logs):
    pos, orient = _pose_columns(logs[0])
    coords = pos + orient
    fig, axes = plt.subplots(len(coords), 1, figsize=(7, 1.8 * len(coords)),
                             sharex=True, squeeze=False)
    for log in logs:
        require(log, "t", *coords)
        meta = log["_meta"]
        if not meta or "scenario" not in meta:
            raise RenderError(f"{log['_path']}: no sibling meta.json with the goal pose")
        goal = np.asarray(meta["scenario"]["plan"]["goal"], dtype=float)
        for k, (ax, name) in enumerate(zip(axes[:, 0], coords)):
            err = log[name] - goal[k]
            if name in ("theta", "alpha", "beta", "gamma"):
                err = (err + np.pi) % (2 * np.pi) - np.pi
            ax.plot(log["t"], err, label=log["_label"])
            ax.set_ylabel(f"e_{name}")
    axes[0, 0].legend(fontsize=7)
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def render_torques(logs):
    names = _joint_columns(logs[0], "tau")
    fig, axes = plt.subplots(len(names), 1, figsize=(7, 1.6 * len(names)),
                             sharex=True, squeeze=False)
    for log in logs:
        require(log, "t", *names)
        for ax, name in zip(axes[:, 0], names):
            ax.plot(log["t"], log[name], label=log["_label"])
            ax.set_ylabel(f"{name} [N·m]")
    axes[0, 0].legend(fontsize=7)
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def render_heatmap(paths):
    path = Path(paths[0])
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    if "m_eff" not in header or "v_rel_max" not in header:
        raise RenderError(f"{path}: missing column 'm_eff' or 'v_rel_max'")
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.size == 0:
        raise RenderError(f"{path}: empty input")
    data = np.atleast_2d(data)
    x = data[:, header.index("x")]
    y = data[:, header.index("y")]
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, col, title in ((axes[0], "m_eff", "effective mass [kg]"),
                           (axes[1], "v_rel_max", "max safe speed [m/s]")):
        vals = data[:, header.index(col)]
        sc = ax.scatter(x, y, c=vals, cmap="viridis", s=60, marker="s")
        fig.colorbar(sc, ax=ax, label=title)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title(title)
    fig.tight_layout()
    return fig


def render(kind, inputs, out):
    """Render one figure kind from input files and write it to ``out``."""
    if kind not in KINDS:
        raise RenderError(f"unknown kind {kind!r}; supported: {', '.join(KINDS)}")
    if not inputs:
        raise RenderError("no input files")
    if kind == "heatmap":
        fig = render_heatmap(inputs)
    else:
        logs = [load_log(p) for p in inputs]
        fig = {
            "speed": render_speed,
            "traj": render_traj,
            "joints": render_joints,
            "errors": render_errors,
            "torques": render_torques,
        }[kind](logs)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="FILE")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        path = render(args.kind, args.inputs, args.out)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
