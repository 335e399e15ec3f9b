"""Smoke tests for the python bindings."""

import json
import math

import pytest

import fpbandits as fpb


def test_version_and_exports():
    assert fpb.__version__
    assert set(fpb.preset_names()) == {"linear-fig2", "logistic-fig2", "regret-vs-d-fig3b"}


def test_link_functions():
    logistic = fpb.LinkSpec("logistic")
    assert fpb.mu(logistic, 0.0) == 0.5
    assert fpb.mu(logistic, 4.0) == pytest.approx(0.98201379, abs=1e-6)
    assert fpb.mu_dot(logistic, 0.0) == 0.25
    floored = fpb.LinkSpec("logistic", derivative_floor=0.25)
    assert fpb.mu_dot(floored, 4.0) == 0.25
    linear = fpb.LinkSpec("linear")
    assert fpb.mu(linear, 0.37) == 0.37
    with pytest.raises(fpb.ConfigError):
        fpb.LinkSpec("probit")


def test_confidence_widths():
    beta = fpb.beta_width(delta=0.1, horizon=100, m_mu=0.0, dim=2, lambda_=1.0, loss_lipschitz=2.0)
    assert beta == pytest.approx(3.9214485726868678, abs=1e-10)
    gamma = fpb.gamma_width(
        delta=0.4, horizon=1, m_mu=0.0, dim=2, lambda_=1.0, loss_lipschitz=2.0
    )
    dp = 0.4 / 4.0
    expected = fpb.beta_width(
        delta=dp, horizon=1, m_mu=0.0, dim=2, lambda_=1.0, loss_lipschitz=2.0
    ) * math.sqrt(2.0 * math.log(2.0 / dp))
    assert gamma == pytest.approx(expected, rel=1e-12)
    with pytest.raises(fpb.InvalidDelta):
        fpb.beta_width(delta=1.5, horizon=10, m_mu=0.0, dim=2, lambda_=1.0, loss_lipschitz=2.0)


def test_fit_mle_ridge():
    import numpy as np

    xs = np.array([[1.0, 0.0]])
    rs = np.array([1.0])
    fit = fpb.fit_mle(fpb.LinkSpec("linear"), xs, rs, lambda_=1.0)
    assert fit["theta_hat"][0] == pytest.approx(0.5, abs=1e-12)
    assert fit["converged"]
    assert np.allclose(fit["h_hat"], fit["v"])


def test_perturbation_roundtrip():
    import numpy as np

    features = np.eye(3)
    gram = np.eye(3)
    theta = np.array([0.0, 1.0, 0.0])
    tilde = fpb.perturb_features(features, gram, theta, c_t=0.0, seed=3)
    assert np.allclose(tilde, features)
    mean, std = fpb.score_distribution_params(features[0], gram, theta, 0.7)
    assert mean == 0.0
    assert std == pytest.approx(0.7)
    zetas = fpb.draw_zeta("gaussian", dim=4, seed=1, n=2000)
    assert abs(zetas.mean()) < 0.1
    ball = fpb.draw_zeta("uniform_ball", dim=3, seed=1, n=500)
    assert (np.linalg.norm(ball, axis=1) <= math.sqrt(3.0) + 1e-12).all()


def _tiny_config(seed=9):
    return {
        "env": {"link": "linear", "d": 4, "K": 6, "T": 60, "S": 1.0, "context_mode": "fresh"},
        "policies": [
            {"algorithm": "FP", "lambda": 0.01, "c_t": 1.0},
            {"algorithm": "TS", "lambda": 0.01, "c_t": 1.0},
        ],
        "n_runs": 3,
        "base_seed": seed,
    }


def test_run_experiment_deterministic():
    a = fpb.run_experiment(_tiny_config())
    b = fpb.run_experiment(json.dumps(_tiny_config()))
    assert a["n_runs"] == 3
    names = [p["policy"] for p in a["policies"]]
    assert names == ["LinFP", "LinTS"]
    for pa, pb in zip(a["policies"], b["policies"]):
        assert pa["mean_cum_regret"] == pb["mean_cum_regret"]
        assert len(pa["mean_cum_regret"]) == 60
        assert pa["epl_max_ratio"] <= 1.0
        # cumulative regret is nondecreasing
        seq = pa["mean_cum_regret"]
        assert all(y >= x - 1e-12 for x, y in zip(seq, seq[1:]))


def test_run_experiment_rejects_bad_config():
    with pytest.raises(fpb.ConfigError):
        fpb.run_experiment({"env": {"link": "linear", "d": 0, "K": 4, "T": 5}, "policies": []})


def test_verify_checks():
    reports = fpb.verify("anti_concentration", seed=5, n_samples=100000)
    assert all(r["pass"] for r in reports)
    assert reports[0]["statistic"] == pytest.approx(0.1587, abs=0.01)
    epl = fpb.verify("epl", seed=5)
    assert epl[0]["pass"]
    with pytest.raises(fpb.ConfigError):
        fpb.verify("nope")


def test_cli_roundtrip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg = _tiny_config()
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = fpb.cli_main(["run", str(cfg_path), "--out", str(out)])
    assert code == 0
    agg = (tmp_path / "out_aggregate.csv").read_text()
    assert agg.startswith("policy,t,mean_cum_regret,std_cum_regret,n_runs")
    assert fpb.cli_main(["nope"]) == 1
