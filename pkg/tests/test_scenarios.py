import numpy as np
import pytest

from lohe import scenarios as sc
from lohe.analysis import DiagnosticsRecord
from lohe.config import parse_config
from lohe.errors import ConfigError, ValidationError
from lohe.sim import Trajectory

BASE = """
model.d1 = {d1}
model.d2 = {d2}
model.n_agents = {n}
coupling.k01 = {k1}
coupling.k10 = {k2}
sim.t_end = {t}
sim.dt = {dt}
sim.sample_every = {every}
init.seed = {seed}
"""


def make(extra="", d1=2, d2=2, n=4, k1=1.0, k2=0.0, t=1.0, dt=1e-3, every=50, seed=0):
    return parse_config(BASE.format(d1=d1, d2=d2, n=n, k1=k1, k2=k2, t=t, dt=dt, every=every, seed=seed) + extra)


def test_zero_coupling_run_is_flat():
    report, traj = sc.run_simulate(make(k1=0.0))
    assert report.passed
    assert all(c.status in ("pass", "skipped") for c in report.checks)
    v = [r.variance for r in traj.records]
    assert max(v) - min(v) == 0.0


def test_homogeneous_run_is_monotone():
    report, _ = sc.run_simulate(make("free_flow.kind = example_a\n", t=2.0))
    assert report.check("variance_monotone").status == "pass"
    assert report.check("isospectrality").status == "pass"
    assert report.check("gram_conservation").status == "pass"
    assert report.passed


def test_heterogeneous_flow_skips_variance_checks():
    report, _ = sc.run_simulate(make("free_flow.kind = random_frequencies\n", t=0.2))
    assert report.check("variance_monotone").status == "skipped"
    assert report.check("norm_conservation").status == "pass"


def test_generic_tensor_flow_skips_spectrum():
    report, _ = sc.run_simulate(make("free_flow.kind = random_skew\n", k2=0.5, t=0.2))
    assert report.check("isospectrality").status == "skipped"
    assert report.check("norm_conservation").status == "pass"


def test_full_rank2_and_sphere_variants():
    report, _ = sc.run_simulate(make("model.variant = full_rank2\ncoupling.k00 = 0.5\ncoupling.k11 = 0.3\n", t=0.3))
    assert report.check("norm_conservation").status == "pass"
    assert report.check("isospectrality").status == "skipped"
    report, _ = sc.run_simulate(make("model.variant = sphere\nfree_flow.kind = example_a\n", d1=3, d2=1, k2=0.4, t=0.5))
    assert report.passed


def test_frustrated_simulation():
    cfg = make("model.variant = frustrated_unitary\nfrustration.lambda2 = [0.6, 0.4]\ninit.kind = haar_svd\n", t=0.5)
    report, traj = sc.run_simulate(cfg)
    assert report.check("unitarity").status == "pass"
    assert report.check("variance_monotone").status == "pass"
    assert not np.isnan(traj.records[-1].diam_U)


def test_rerun_is_byte_identical(tmp_path):
    cfg = make("free_flow.kind = example_b\n", k2=0.3, t=0.3, seed=9)
    paths = []
    for k in range(2):
        report, traj = sc.run_simulate(cfg)
        p, q = tmp_path / f"r{k}.csv", tmp_path / f"r{k}.json"
        sc.emit_csv(traj, p)
        sc.emit_json(report, q)
        paths.append((p.read_bytes(), q.read_bytes()))
    assert paths[0] == paths[1]


def test_emit_csv_shapes(tmp_path):
    p = tmp_path / "e.csv"
    sc.emit_csv(Trajectory(np.array([]), [], []), p)
    assert p.read_text() == ",".join(
        "t variance variance_rate rho diam_T diam_U comm1_max comm2_max dissipation1 dissipation2".split()
    ) + "\n"
    rec = DiagnosticsRecord(0.0, 0.5, -0.1, 0.7, 1.0, float("nan"), 0.2, 0.3, 0.0, 0.0)
    sc.emit_csv([rec], p)
    lines = p.read_text().split("\n")
    assert len(lines) == 3 and lines[-1] == ""
    assert lines[1] == "0,0.5,-0.1,0.7,1,nan,0.2,0.3,0,0"


def test_emit_reports_path_on_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        sc.emit_csv([], blocker / "sub" / "out.csv")


def test_json_omits_wall_clock_by_default(tmp_path):
    report, _ = sc.run_simulate(make(t=0.1))
    assert report.wall_clock is not None
    assert "wall_clock" not in report.to_dict()
    assert report.to_dict(include_wall_clock=True)["wall_clock"] == report.wall_clock
    for c in report.to_dict()["checks"]:
        assert c["status"] == "skipped" or c["tolerance"] is not None


@pytest.mark.parametrize("kind", ["example_a", "example_b"])
def test_split_check_examples(kind):
    report = sc.run_split_check(make(f"free_flow.kind = {kind}\n", k2=0.5, t=1.0))
    assert report.passed
    assert report.data["condition_holds"]
    assert report.check("composition").residual < 1e-6


def test_split_check_generic_flow():
    report = sc.run_split_check(make("free_flow.kind = random_skew\n", t=1.0))
    assert not report.data["condition_holds"]
    assert report.check("splitting_condition").status == "fail"
    assert report.check("composition").status == "skipped"


def test_split_check_rejects_per_agent_flow():
    with pytest.raises(ValidationError):
        sc.run_split_check(make("free_flow.kind = random_frequencies\n"))


def test_svd_check_identical_ensemble(tmp_path):
    T = np.stack([np.diag([0.8, 0.6])] * 3).astype(complex)
    path = tmp_path / "init.npy"
    np.save(path, T)
    report = sc.run_svd_check(make(f"init.kind = file\ninit.path = {path}\n", n=3, t=0.5))
    assert report.passed
    assert report.check("reformulation").residual < 1e-14


def test_svd_check_random_and_rank_deficient():
    report = sc.run_svd_check(make("init.kind = haar_svd\ninit.lambda2 = [0.7, 0.3]\n", d1=3, d2=2, t=1.0))
    assert report.passed
    report = sc.run_svd_check(make("init.kind = haar_svd\ninit.lambda2 = [1.0, 0.0]\n", d1=2, d2=2, t=1.0))
    assert report.passed


def test_svd_check_rejects_mismatched_grams():
    with pytest.raises(ValidationError, match="Gram"):
        sc.run_svd_check(make())
    with pytest.raises(ConfigError):
        sc.run_svd_check(make(k2=0.5))


def test_dual_check():
    report = sc.run_dual_check(make("free_flow.kind = random_skew\n", d1=2, d2=3, k2=0.6, t=1.0))
    assert report.passed


def sweep_cfg(extra="", scale=0.3):
    return make(
        "model.variant = frustrated_unitary\nfrustration.lambda2 = [0.6, 0.4]\ninit.kind = haar_svd\n"
        f"init.diameter = 0.2\nfree_flow.kind = random_frequencies\nfree_flow.scale = {scale}\n" + extra,
        n=6, t=1.5, every=10,
    )


def test_kappa_sweep_degenerate():
    report = sc.run_kappa_sweep(sweep_cfg(scale=0.0), [20.0, 40.0])
    assert report.passed
    assert all(p["tail"] < 1e-6 for p in report.data["points"])


def test_kappa_sweep_threshold_flag():
    report = sc.run_kappa_sweep(sweep_cfg(), [0.1, 20.0])
    first = report.checks[0]
    assert first.status == "skipped" and "hypotheses" in first.note
    assert report.checks[1].status == "pass"
    assert report.passed


def test_kappa_sweep_parallel_matches_serial():
    cfg = sweep_cfg()
    a = sc.run_kappa_sweep(cfg, [20.0, 40.0], jobs=1)
    b = sc.run_kappa_sweep(cfg, [20.0, 40.0], jobs=2)
    assert sc.json_text(a) == sc.json_text(b)


def test_kappa_sweep_needs_frustrated_variant():
    with pytest.raises(ConfigError):
        sc.run_kappa_sweep(make(), [1.0])


def test_cluster_initial_diameter():
    cfg = make("model.variant = frustrated_unitary\nfrustration.lambda2 = [2, 1]\ninit.kind = haar_svd\ninit.diameter = 0.5\n", n=8)
    from lohe.analysis import diameter

    U = sc.build_initial(cfg).agents
    assert abs(diameter(U) - 0.5) < 1e-12
    assert np.max(np.abs(np.conj(np.swapaxes(U, 1, 2)) @ U - np.eye(2))) < 1e-12
