import json
from importlib import resources

from pflsim.cli import main


def _write_short_scenario(tmp_path, name="3r_imp2", t_max=0.5, **edits):
    doc = json.loads(resources.files("pflsim").joinpath(f"scenarios/{name}.json").read_text())
    doc["t_max"] = t_max
    doc.update(edits)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_happy_path(tmp_path, capsys):
    scenario = _write_short_scenario(tmp_path)
    out = tmp_path / "out"
    assert main(["run", str(scenario), "-o", str(out)]) == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "metrics.json").exists()
    assert (out / "meta.json").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["scenario"]["name"] == "3r_imp2"
    metrics = json.loads((out / "metrics.json").read_text())
    assert set(metrics) == {"label", "settling_time_s", "mean_abs_error",
                            "control_effort_Nms", "peak_v_rel", "cap_violations"}


def test_run_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": planar3r}')
    assert main(["run", str(bad), "-o", str(tmp_path / "o")]) == 2
    assert "line" in capsys.readouterr().err


def test_run_unknown_override(tmp_path):
    scenario = _write_short_scenario(tmp_path)
    assert main(["run", str(scenario), "-o", str(tmp_path / "o"),
                 "--override", "bogus=1"]) == 2


def test_override_lambda_equivalence(tmp_path):
    # imp1 overridden to lambda 0.5 must reproduce the imp2 trajectory
    s1 = _write_short_scenario(tmp_path, name="3r_imp1", t_max=1.0)
    out1 = tmp_path / "o1"
    assert main(["run", str(s1), "-o", str(out1), "--override", "lambda=0.5"]) == 0
    s2 = _write_short_scenario(tmp_path, name="3r_imp2", t_max=1.0)
    out2 = tmp_path / "o2"
    assert main(["run", str(s2), "-o", str(out2)]) == 0
    a = (out1 / "trajectory.csv").read_text().splitlines()
    b = (out2 / "trajectory.csv").read_text().splitlines()
    assert a == b


def test_env_dt_override(tmp_path, monkeypatch):
    scenario = _write_short_scenario(tmp_path, t_max=0.2)
    out = tmp_path / "o"
    monkeypatch.setenv("PFLSIM_DT", "0.002")
    assert main(["run", str(scenario), "-o", str(out)]) == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert len(rows) - 1 == int(round(0.2 / 0.002))


def test_unknown_suite(capsys):
    assert main(["suite", "quadruped", "-o", "/tmp/nowhere"]) == 2
    err = capsys.readouterr().err
    assert "3r" in err and "panda" in err


def test_limits_iso_conservative_constant(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    rc = main(["limits", "planar3r", "--region", "abdomen",
               "--method", "iso_conservative",
               "--grid", "2.0:4.0:3,0.5:1.5:2", "-o", str(out)])
    assert rc == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    masses = {row[2] for row in rows}
    assert masses == {"9"}  # configuration independent


def test_limits_operational_space_varies(tmp_path):
    out = tmp_path / "grid.csv"
    rc = main(["limits", "planar3r", "--region", "abdomen",
               "--method", "operational_space",
               "--grid", "2.0:4.5:4,0.5:2.0:3",
               "--human", "7.0", "2.5", "-o", str(out)])
    assert rc == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    masses = [float(r[2]) for r in rows if r[2] != "nan"]
    assert len(masses) >= 6
    assert len(set(f"{m:.6f}" for m in masses)) > 1  # varies across the grid
    assert max(masses) <= 18.0  # never above the total arm mass


def test_limits_empty_grid(tmp_path):
    assert main(["limits", "planar3r", "--region", "abdomen",
                 "--grid", ""]) == 2


def test_limits_bad_axis_count():
    assert main(["limits", "planar3r", "--region", "abdomen",
                 "--grid", "0:1:2"]) == 2


def test_version_flag(capsys):
    assert main(["--version"]) == 0
