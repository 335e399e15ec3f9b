"""Contextual-bandit simulation harness with feature-perturbation exploration.

The heavy lifting lives in the C++ core (`fpbandits._core`); this package
re-exports the main operations and adds small conveniences for running
experiments and verification checks from Python.
"""

import json as _json

from fpbandits._core import (  # noqa: F401
    ConfigError,
    InvalidDelta,
    LinkOverflowError,
    LinkSpec,
    NotPositiveDefinite,
    __version__,
    beta_width,
    cli_main,
    draw_zeta,
    fit_mle,
    gamma_width,
    mu,
    mu_antideriv,
    mu_dot,
    neg_log_likelihood,
    perturb_features,
    preset_config,
    preset_names,
    run_preset,
    score_distribution_params,
    verify,
)
from fpbandits._core import run_experiment as _run_experiment


def run_experiment(config):
    """Run an experiment from a config dict or JSON string.

    Returns a dict with one entry per policy holding the mean/std cumulative
    regret arrays, per-run final regrets and diagnostics.
    """
    if isinstance(config, str):
        return _run_experiment(config)
    return _run_experiment(_json.dumps(config))


__all__ = [
    "ConfigError",
    "InvalidDelta",
    "LinkOverflowError",
    "LinkSpec",
    "NotPositiveDefinite",
    "__version__",
    "beta_width",
    "cli_main",
    "draw_zeta",
    "fit_mle",
    "gamma_width",
    "mu",
    "mu_antideriv",
    "mu_dot",
    "neg_log_likelihood",
    "perturb_features",
    "preset_config",
    "preset_names",
    "run_experiment",
    "run_preset",
    "score_distribution_params",
    "verify",
]
