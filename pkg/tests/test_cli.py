import json

import pytest

from icosa.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else None)


def test_verify(capsys):
    code, data = run(capsys, "verify")
    assert code == EXIT_OK and data["ok"]
    assert all(data["checks"].values())
    assert data["config"]["seed"] == 0


def test_search(capsys):
    code, data = run(capsys, "search")
    assert code == EXIT_OK
    Bs = sorted(m["B"] for m in data["maps"])
    assert abs(Bs[0] - 0.0280899) < 1e-6 and abs(Bs[1] - 1.5954) < 1e-4
    assert {m["polyhedron"] for m in data["maps"]} == {"soccer", "dualSoccer"}
    assert data["census"]["real"] == 19


def test_edge_anchor(capsys):
    code, data = run(capsys, "dynamics", "--edge-anchor")
    assert code == EXIT_OK
    assert abs(data["edge_anchor"]["Z"] - 0.143827) < 1e-5
    assert data["edge_anchor"]["repelling"]


def test_dynamics_seed_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.json"
    code, data = run(capsys, "dynamics", "--map", "g", "--seed", "0.3,0.2",
                     "--trace", str(trace))
    assert code == EXIT_OK and data["trajectory"]["status"] == "converged"
    pts = json.loads(trace.read_text())["points"]
    assert len(pts) == data["trajectory"]["iterations"] + 1


def test_group_export(capsys, tmp_path):
    path = tmp_path / "orbits.json"
    code, data = run(capsys, "group", "--export", str(path), "--seed", "4")
    assert code == EXIT_OK and data["order"] == 60
    exported = json.loads(path.read_text())
    assert exported["vertex"]["size"] == 12 and exported["seed"] == 4


def test_render_deterministic(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    assert run(capsys, "render", "--map", "h", "--res", "64", "--out", str(a),
               "--threads", "1")[0] == EXIT_OK
    monkeypatch.setenv("ICOSA_THREADS", "3")
    code, data = run(capsys, "render", "--map", "h", "--res", "64", "--out", str(b))
    assert code == EXIT_OK and data["config"]["threads"] == 3
    assert a.read_bytes() == b.read_bytes()


def test_render_julia(capsys, tmp_path):
    out = tmp_path / "j.ppm"
    code, data = run(capsys, "render", "--map", "g", "--kind", "julia", "--res", "48",
                     "--viewport=-1,-1,1,1", "--out", str(out))
    assert code == EXIT_OK and out.exists()
    assert data["viewport"] == [-1, -1, 1, 1]


def test_json_reproducible(capsys, tmp_path):
    path = tmp_path / "v.json"
    main(["verify", "--json", str(path)])
    da = json.loads(path.read_text())
    main(["verify", "--json", str(path)])
    db = json.loads(path.read_text())
    da.pop("timestamp"), db.pop("timestamp")
    assert da == db


def test_resolvent_reports(capsys, tmp_path):
    out = tmp_path / "r.json"
    code = main(["resolvent", "--z", "0.3,0.2", "--demo", "--seeds", "50", "--json", str(out)])
    data = json.loads(out.read_text())
    assert data["demo"]["same_label_fraction"] == 1.0
    assert len(data["resolvent"]["coefficients"]) == 6
    # exit code follows the resolvent identities, which do not all hold
    assert code == (EXIT_OK if data["ok"] else EXIT_FAIL)


@pytest.mark.parametrize("argv", [[], ["nonsense"], ["verify", "--digits", "10"],
                                  ["dynamics"], ["dynamics", "--seed", "x,y"]])
def test_usage_errors(capsys, argv):
    assert main(argv) == EXIT_USAGE


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(digits=14)
    assert RunConfig().digits >= 15
