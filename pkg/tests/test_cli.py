import json

import pytest

from lohe.cli import main

CONFIG = """
model.d1 = 2
model.d2 = 2
model.n_agents = 3
coupling.k01 = 1.0
sim.t_end = 0.2
sim.dt = 1e-3
sim.sample_every = 20
"""


@pytest.fixture
def cfg_file(tmp_path):
    def write(extra=""):
        p = tmp_path / "run.cfg"
        p.write_text(CONFIG + extra)
        return p

    return write


def test_simulate_writes_csv_to_env_dir(cfg_file, tmp_path, monkeypatch, capsys):
    out = tmp_path / "outdir"
    monkeypatch.setenv("LOHE_OUTPUT_DIR", str(out))
    assert main(["simulate", str(cfg_file())]) == 0
    text = (out / "simulate.csv").read_text()
    assert text.startswith("t,variance,")
    assert "PASS norm_conservation" in capsys.readouterr().out


def test_simulate_json(cfg_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["simulate", str(cfg_file("output.format = json\n")), "-o", str(out), "-q"]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] and data["scenario"] == "simulate" and "wall_clock" not in data
    assert len(data["data"]["records"]) == 11


def test_failing_check_exits_one(cfg_file, tmp_path):
    code = main(["split-check", str(cfg_file("free_flow.kind = random_skew\n")), "-o", str(tmp_path / "s.json"), "-q"])
    assert code == 1


def test_config_error_exits_two(cfg_file, capsys):
    assert main(["validate", str(cfg_file("model.shape = 3\n"))]) == 2
    assert "model.shape" in capsys.readouterr().err


def test_validate(cfg_file, capsys):
    assert main(["validate", str(cfg_file())]) == 0
    assert "valid" in capsys.readouterr().out


def test_kappa_sweep_cli(cfg_file, tmp_path):
    extra = (
        "model.variant = frustrated_unitary\nfrustration.lambda2 = [0.6, 0.4]\ninit.kind = haar_svd\n"
        "init.diameter = 0.1\nfree_flow.kind = random_frequencies\nfree_flow.scale = 0.2\n"
    )
    out = tmp_path / "k.json"
    assert main(["kappa-sweep", str(cfg_file(extra)), "--kappas", "20,40", "-o", str(out), "-q"]) == 0
    assert [p["kappa"] for p in json.loads(out.read_text())["data"]["points"]] == [20.0, 40.0]


def test_bad_kappas(cfg_file):
    with pytest.raises(SystemExit):
        main(["kappa-sweep", str(cfg_file()), "--kappas", "a,b"])


def test_svd_and_dual_cli(cfg_file, tmp_path):
    assert main(["svd-check", str(cfg_file("init.kind = haar_svd\n")), "-o", str(tmp_path / "a.json"), "-q"]) == 0
    assert main(["dual-check", str(cfg_file("coupling.k10 = 0.5\n")), "-o", str(tmp_path / "b.json"), "-q"]) == 0
