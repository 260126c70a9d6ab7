import json
import math
import os
import subprocess

import pytest

import casym


def test_kernels():
    assert casym.visibility(0.0, 0.3, 1.0) == 1.0
    assert casym.visibility(0.5, 0.5, 1.0) == pytest.approx(math.exp(-0.5))
    assert casym.feedback_prob(0.25) == pytest.approx(0.75)
    assert casym.update_opinion(0.2, 0.4, 1.0) == pytest.approx(0.05 * 0.4 + 0.93 * 0.2 + 0.02 * 1.0)


def test_resolve_and_overrides():
    cfg = casym.resolve_config()
    assert cfg["space"]["dims"] == 2
    cfg2 = casym.with_overrides(cfg, ["kernels.rho=0.3"])
    assert cfg2["kernels"]["rho"] == pytest.approx(0.3)
    with pytest.raises(casym.ValidationError):
        casym.with_overrides(cfg, ["influencers.0.post_freq=0.9"])


def test_simulate_deterministic():
    cfg = casym.with_overrides(casym.resolve_config(), ["population.n_users=200"])
    a = casym.simulate(cfg, seed=3, n_iter=500, stride=50)
    b = casym.simulate(cfg, seed=3, n_iter=500, stride=50)
    assert a["pi"] == b["pi"]
    assert a["steps"][-1] == 500
    for row in a["pi"]:
        assert sum(row) == pytest.approx(1.0)


def test_ensemble_ci():
    cfg = casym.with_overrides(casym.resolve_config(), ["population.n_users=100"])
    r = casym.ensemble(cfg, seeds=[1, 2, 3], n_iter=300, tail_samples=5, threads=2)
    assert len(r["run_pi"]) == 3
    for lo, m, hi in zip(r["pi_ci_low"], r["pi_mean"], r["pi_ci_high"]):
        assert lo <= m <= hi


def test_fixed_points():
    sol = casym.joint_fixed_point(casym.scenario("two_influencer_line", 0.0))
    assert sol["converged"]
    assert sol["pi"][1] == pytest.approx(0.684, abs=0.005)
    q = 0.05 / 0.07 * 0.4
    m = 0.02 / 0.07
    assert casym.closed_form_rho0(0.3, 0.7, m, q) == pytest.approx(sol["pi"][1], abs=1e-3)
    rows = casym.fpa_scan(casym.scenario("two_influencer_line", 0.3), [0.3])
    assert rows[0]["solution"]["pi"][1] == pytest.approx(0.728, abs=0.005)
    v = casym.two_influencer_map(0.5, casym.scenario("two_influencer_line", 0.3))
    assert 0.0 <= v <= 1.0


def test_stationary_density():
    d = casym.stationary_density(casym.scenario("two_influencer_line", 0.3), nodes=401)
    xs, f = d["x"], d["density"][0]
    h = xs[1] - xs[0]
    integral = h * (sum(f) - 0.5 * (f[0] + f[-1]))
    assert integral == pytest.approx(1.0, abs=1e-6)


def test_analysis():
    topic, c, tie = casym.consistency(["a", "a", "b", "", "a|b"])
    assert topic == "a" and c == pytest.approx(2 / 3) and not tie
    acov = casym.normalized_autocovariance([1.0, -1.0] * 50, 1)
    assert acov[0] == pytest.approx(1.0)
    assert acov[1] == pytest.approx(-1.0, abs=0.02)
    assert casym.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    with pytest.raises(casym.UndefinedStatisticError):
        casym.pearson([1, 1, 1], [1, 2, 3])


def test_cli_in_process(tmp_path):
    code, out, err = casym.run_cli(["--version"])
    assert code == 0 and "0.1.0" in out
    code, _, _ = casym.run_cli(["simulate", "--set", "population.n_users=50", "--iters", "100",
                                "--out", str(tmp_path)])
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "simulate"


@pytest.mark.skipif("CASYM_CLI" not in os.environ or "CASYM_SOURCE_DIR" not in os.environ,
                    reason="CLI binary location not provided")
def test_cli_binary(tmp_path):
    config = os.path.join(os.environ["CASYM_SOURCE_DIR"], "configs", "appendixD.json")
    res = subprocess.run([os.environ["CASYM_CLI"], "fpa-scan", "--config", config, "--rho", "0",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "manifest.json").exists()
