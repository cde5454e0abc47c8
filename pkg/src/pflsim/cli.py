"""Command-line entry point.

    pflsim run <scenario.json> [-o DIR] [--override key=value ...]
    pflsim suite <3r|panda> [-o DIR]
    pflsim limits <model> --region R --method M --grid X0:X1:N,Y0:Y1:N[,Z0:Z1:N]

Exit codes: 0 success, 1 simulation failure, 2 usage/config error.
``PFLSIM_DT`` overrides the integration step for run/suite unless the
scenario is explicitly overridden on the command line.
"""

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PflsimError, ScenarioError
from .metrics import comparison_table, compute_metrics, write_metrics
from .robot import ik_resolved_rate, load_robot
from .safety import EffectiveMassMethod, body_region, effective_mass, v_rel_max
from .simulator import load_scenario, packaged_scenario, run, write_csv

SUITES = {
    "3r": ["3r_pd", "3r_ctm", "3r_imp1", "3r_imp2"],
    "panda": ["panda_pd", "panda_ctm", "panda_imp1", "panda_imp2"],
}

_OVERRIDES = ("lambda", "Kp", "Kd", "dt", "t_max")


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ScenarioError(f"override {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        if key not in _OVERRIDES:
            raise ScenarioError(f"unknown override {key!r}; supported: {_OVERRIDES}")
        out[key] = json.loads(value)
    return out


def _apply_overrides(scenario, overrides):
    if not overrides:
        return scenario
    doc = dict(scenario.source)
    doc["controller"] = dict(doc["controller"])
    doc["plan"] = dict(doc["plan"])
    if "lambda" in overrides:
        lam = float(overrides["lambda"])
        doc["controller"]["lambda"] = lam
        method = dict(doc["plan"].get("mass_method", {}))
        if method.get("method") == "reduced":
            method["lambda"] = lam
            doc["plan"]["mass_method"] = method
    for key in ("Kp", "Kd"):
        if key in overrides:
            doc["controller"][key] = overrides[key]
    if "dt" in overrides:
        doc["dt"] = float(overrides["dt"])
    if "t_max" in overrides:
        doc["t_max"] = float(overrides["t_max"])
    from .simulator import scenario_from_dict

    return scenario_from_dict(doc)


def _apply_env_dt(scenario, explicit_dt):
    env = os.environ.get("PFLSIM_DT")
    if env and not explicit_dt:
        doc = dict(scenario.source)
        doc["dt"] = float(env)
        from .simulator import scenario_from_dict

        return scenario_from_dict(doc)
    return scenario


def _run_one(scenario, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    log = run(scenario)
    wall = time.perf_counter() - t0
    metrics = compute_metrics(log)
    write_csv(log, out_dir / "trajectory.csv")
    write_metrics(metrics, out_dir / "metrics.json")
    meta = {
        "scenario": scenario.source,
        "label": scenario.label,
        "wall_time_s": wall,
        "pflsim_version": __version__,
        "steps": len(log),
        "error_reference": "goal",
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return log, metrics


def cmd_run(args):
    scenario = load_scenario(args.scenario)
    scenario = _apply_overrides(scenario, _parse_overrides(args.override))
    scenario = _apply_env_dt(scenario, explicit_dt="dt" in _parse_overrides(args.override))
    _, metrics = _run_one(scenario, args.out)
    print(f"{scenario.label}: settling={metrics.settling_time_s} "
          f"effort={metrics.control_effort_Nms:.1f} N·m·s -> {args.out}")
    return 0


def cmd_suite(args):
    if args.name not in SUITES:
        print(f"unknown suite {args.name!r}; available: {', '.join(SUITES)}", file=sys.stderr)
        return 2
    out_root = Path(args.out)
    all_metrics = []
    for name in SUITES[args.name]:
        scenario = packaged_scenario(name)
        scenario = _apply_env_dt(scenario, explicit_dt=False)
        _, metrics = _run_one(scenario, out_root / name)
        all_metrics.append(metrics)
        print(f"  {name}: settling={metrics.settling_time_s}s "
              f"effort={metrics.control_effort_Nms:.0f} N·m·s")
    doc, text = comparison_table(all_metrics)
    (out_root / "comparison.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out_root / "comparison.txt").write_text(text)
    print(text)
    return 0


def _parse_grid(spec):
    axes = []
    for part in spec.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise ScenarioError(f"grid axis {part!r} is not start:stop:count")
        start, stop, count = float(bits[0]), float(bits[1]), int(bits[2])
        if count < 1:
            raise ScenarioError("grid axis needs at least one sample")
        axes.append(np.linspace(start, stop, count))
    if not axes:
        raise ScenarioError("empty grid spec")
    return axes


def cmd_limits(args):
    model = load_robot(args.model)
    region = body_region(args.region)
    method = EffectiveMassMethod(args.method, payload=args.payload, lam=args.lam)
    axes = _parse_grid(args.grid)
    if len(axes) != model.pos_dim:
        raise ScenarioError(
            f"grid has {len(axes)} axes but the model workspace is {model.pos_dim}-D")
    human = np.asarray(args.human, dtype=float) if args.human else None
    out = Path(args.out) if args.out else None
    lines = []
    header = ",".join(["x", "y", "z"][: model.pos_dim] + ["m_eff", "v_rel_max"])
    lines.append(header)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    q_seed = np.zeros(model.n) if model.task_dim == 6 else np.array([0.5, -0.5, -0.5])
    for p in points:
        if human is not None:
            u = human - p
            nu = np.linalg.norm(u)
            u = u / nu if nu > 0 else None
        else:
            u = np.zeros(model.pos_dim)
            u[0] = 1.0
        q, m_eff, cap = _point_limits(model, p, u, q_seed, region, method)
        if q is not None:
            q_seed = q
        vals = [*p, m_eff, cap]
        lines.append(",".join("nan" if v is None else f"{v:.9g}" for v in vals))
    text = "\n".join(lines) + "\n"
    if out:
        out.write_text(text)
        print(f"wrote {len(points)} grid points -> {out}")
    else:
        print(text, end="")
    return 0


def _point_limits(model, p, u, q_seed, region, method):
    # reach the position with a free orientation: radial heuristic for the
    # planar arm, start-seeded resolved-rate for spatial chains
    if u is None:
        return None, None, None
    if model.task_dim == 3:
        theta = math.atan2(p[1], p[0])
        target = np.array([p[0], p[1], theta])
    else:
        target = np.concatenate([p, np.zeros(3)])
    try:
        q, residual = ik_resolved_rate(model, target, q_seed, iters=400, tol=1e-9)
    except PflsimError:
        return None, None, None
    if residual > 1e-4:
        return None, None, None
    try:
        m_eff = effective_mass(method, model, q, u)
    except PflsimError:
        return q, None, None
    return q, m_eff, v_rel_max(region, m_eff)


def make_parser():
    parser = argparse.ArgumentParser(prog="pflsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"pflsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("-o", "--out", default="out")
    p_run.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_run.set_defaults(func=cmd_run)

    p_suite = sub.add_parser("suite", help="run a reproduction suite")
    p_suite.add_argument("name")
    p_suite.add_argument("-o", "--out", default="out")
    p_suite.set_defaults(func=cmd_suite)

    p_lim = sub.add_parser("limits", help="effective-mass / speed-cap grid")
    p_lim.add_argument("model")
    p_lim.add_argument("--region", required=True)
    p_lim.add_argument("--method", default="operational_space",
                       choices=["iso_conservative", "operational_space", "reduced"])
    p_lim.add_argument("--grid", required=True,
                       help="X0:X1:N,Y0:Y1:N[,Z0:Z1:N]")
    p_lim.add_argument("--human", type=float, nargs="+", default=None,
                       help="human position; direction u points toward it")
    p_lim.add_argument("--payload", type=float, default=0.0)
    p_lim.add_argument("--lam", "--lambda", dest="lam", type=float, default=0.5)
    p_lim.add_argument("-o", "--out", default=None)
    p_lim.set_defaults(func=cmd_limits)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PflsimError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
