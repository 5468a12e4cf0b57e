import math

import numpy as np
import pytest

import egan


def test_step_from_rest():
    (x, x_dot, theta, theta_dot), reward, done = egan.step((0.0, 0.0, 0.0, 0.0), 1)
    assert x == 0.0 and theta == 0.0
    assert x_dot == pytest.approx(0.195122, abs=1e-6)
    assert theta_dot == pytest.approx(-0.292683, abs=1e-6)
    assert reward == 1.0 and not done


def test_bad_action_raises():
    with pytest.raises(egan.UsageError):
        egan.step((0.0, 0.0, 0.0, 0.0), 2)


def test_random_episode_rewards_sum_to_length():
    ep = egan.random_episode(seed=3)
    assert sum(t["reward"] for t in ep) == len(ep)
    assert ep[-1]["done"]


def test_collect_and_encode(tmp_path):
    buf = egan.collect_random(episodes=20, seed=1)
    assert len(buf) == buf.real_samples
    enc = buf.encoded()
    assert enc.shape == (len(buf), 10)
    assert np.all(np.abs(enc) <= 1.0 + 1e-12)
    path = tmp_path / "buffer.csv"
    buf.save_csv(path)
    assert (tmp_path / "buffer.stats.csv").exists()
    back = egan.load_csv(path)
    assert len(back) == len(buf)
    assert back[0]["state"] == buf[0]["state"]


def test_returns_and_zscore():
    assert egan.discounted_returns([1, 1, 1], 0.99) == pytest.approx([2.9701, 1.99, 1.0])
    assert egan.zscore([2.0, 2.0, 2.0]) == [0.0, 0.0, 0.0]


def test_gan_value_and_kl():
    assert egan.gan_value([0.5], [0.5]) == pytest.approx(2 * math.log(0.5), abs=1e-12)
    q = np.array([[1.0] * 5, [-1.0] * 5])
    assert egan.kl_regularizer(q + 1.0, q) == pytest.approx(2.5, abs=1e-12)
    assert egan.kl_regularizer(q, q) == 0.0
    mean, var = egan.fit_gaussian(np.array([[0.0], [2.0]]))
    assert mean == [1.0] and var == [1.0]
    with pytest.raises(egan.ShapeError):
        egan.kl_regularizer(q, np.zeros((2, 4)))


def test_config_round_trip(tmp_path):
    cfg = egan.ExperimentConfig(mode="gan", seed=5, match_sample_budget=False)
    assert cfg.mode == "gan" and cfg.seed == 5 and not cfg.match_sample_budget
    path = tmp_path / "run.cfg"
    path.write_text(cfg.serialize())
    back = egan.load_config(path)
    assert back.serialize() == cfg.serialize()
    with pytest.raises(egan.ConfigError):
        egan.ExperimentConfig(no_such_key=1)


def test_run_none_and_metrics(tmp_path):
    cfg = egan.ExperimentConfig(mode="none", training_episodes=10, match_sample_budget=False)
    curve = egan.run_experiment(cfg)
    assert len(curve) == 10 and curve.offset == 0
    samples = curve.cumulative_samples
    assert samples[-1] == sum(curve.rewards)
    assert egan.samples_to_threshold(curve, 0.0) == samples[0]
    assert egan.samples_to_threshold(curve, 1e9) is None
    assert egan.rolling_average([0.0, 100.0], 2) == [0.0, 50.0]
    path = tmp_path / "curve_none_0.csv"
    curve.write_csv(path)
    assert egan.read_curve_csv(path).rewards == curve.rewards


def test_small_egan_pipeline():
    cfg = egan.ExperimentConfig(mode="egan", pretrain_episodes=20, gan_steps=20, enhancer_steps=20,
                                egan_iterations=3)
    out = egan.pretrain(cfg)
    assert out["real_samples"] > 0
    assert len(out["d_loss"]) == 20
    assert len(out["kl_history"]) == 3
    assert out["sample"].shape == (256, 10)
    curve = egan.run_experiment(egan.ExperimentConfig(mode="egan", pretrain_episodes=20, gan_steps=20,
                                                      enhancer_steps=20, synthetic_batches=3,
                                                      training_episodes=5))
    assert curve.offset == out["real_samples"]
    assert len(egan.aggregate_runs([curve, curve])) > 0
