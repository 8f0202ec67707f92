import json

import pytest

from macrolab.cli import main


def _load(path):
    return json.loads(path.read_text())


def test_verify_adn_final_determinant(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify-adn", "--out", str(out)]) == 0
    d = _load(out)
    assert d["schema"] == 1 and d["pass"]
    assert d["result"]["final_determinant"] == "384*l**8*n3*(t - I*l)**3"


def test_verify_adn_mutation_fails(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify-adn", "--mutate", "K:2:2:0", "--out", str(out)]) == 1
    assert _load(out)["failing"]
    assert "failing checks" in capsys.readouterr().err


def test_bad_mutation_is_usage_error():
    assert main(["verify-adn", "--mutate", "nothing:0:0:0"]) == 2


def test_check_moments(tmp_path):
    out = tmp_path / "m.json"
    assert main(["check-moments", "--out", str(out)]) == 0
    assert _load(out)["result"]["table"]["fact:|v_i|^4"]["value"] == pytest.approx(3.0, abs=1e-12)


def test_simulate_zero_steps(tmp_path):
    out, trace = tmp_path / "s.json", tmp_path / "t.csv"
    assert main(["simulate", "--shape", "spheroid", "--steps", "0", "--out", str(out),
                 "--trace", str(trace)]) == 0
    rows = _load(out)["result"]["trace"]
    assert len(rows) == 1
    assert all(abs(x) < 1e-12 for x in rows[0])
    assert len(trace.read_text().strip().splitlines()) == 2


def test_identical_config_identical_json(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"o{i}.json"
        assert main(["simulate", "--shape", "ball", "--refine", "0", "--grid", "6", "--steps", "3",
                     "--seed", "5", "--out", str(p)]) == 0
        d = _load(p)
        d.pop("timestamp")
        outs.append(json.dumps(d, sort_keys=True))
    assert outs[0] == outs[1]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run\nshape = ellipsoid\nrefine = 0\ngrid = 6\nsteps = 2\n")
    out = tmp_path / "o.json"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    d = _load(out)
    assert d["config"]["shape"] == "ellipsoid"
    assert d["result"]["trace_columns"] == ["time", "mass", "energy"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--bogus"],
    ["simulate", "--shape", "torus"],
    ["simulate", "--eps", "-1"],
    ["simulate", "--steps", "x"],
    ["simulate", "--preset", "nope"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("shape = ball\ncolour = red\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MACROLAB_THREADS", "1")
    assert main(["korn-constant", "--refine", "0", "--out", str(tmp_path / "k.json")]) == 0
    monkeypatch.setenv("MACROLAB_THREADS", "zero")
    assert main(["korn-constant", "--refine", "0"]) == 2


def test_solve_sym_poisson(tmp_path):
    out = tmp_path / "p.json"
    assert main(["solve-sym-poisson", "--shape", "spheroid", "--refine", "1", "--out", str(out)]) == 0
    d = _load(out)["result"]
    assert d["rigid_dim"] == 1 and all(d["checks"].values())


def test_estimate_report(tmp_path):
    out = tmp_path / "e.json"
    assert main(["estimate-report", "--refine", "0", "--grid", "6", "--t-end", "0.05",
                 "--snapshots", "4", "--forcing", "micro_periodic", "--out", str(out)]) == 0
    d = _load(out)["result"]
    assert set(d["L2"]["rhs_terms"]) == {"micro", "collision", "G(t)-G(s)", "forcing"}
    assert d["L6"]["ratio"] >= 0
    assert main(["estimate-report", "--steps", "1"]) == 2


def test_help_exits_zero():
    assert main(["--help"]) == 0
