"""EGAN pre-training for policy gradient on CartPole."""

from ._egan import (
    ConfigError,
    ExperimentConfig,
    LearningCurve,
    ParseError,
    ReplayBuffer,
    ShapeError,
    UsageError,
    aggregate_runs,
    collect_random,
    discounted_returns,
    fit_gaussian,
    gan_value,
    kl_regularizer,
    load_config,
    load_csv,
    pretrain,
    random_episode,
    read_curve_csv,
    rolling_average,
    run_experiment,
    samples_to_threshold,
    step,
    zscore,
)

__all__ = [name for name in dir() if not name.startswith("_")]
