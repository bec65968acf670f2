"""Concentration inequalities for martingales and weighted averages of martingales."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    bernoulli_kl,
    discrete_kl,
    kl_inv_lower,
    kl_inv_upper,
    pinsker_radius,
    refined_kl_upper,
)
from .individual import (
    BoundResult,
    Branch,
    LambdaGrid,
    bernstein_adaptive,
    bernstein_fixed_lambda,
    hoeffding_azuma_radius,
    kl_drift_bound,
    lambda_grid,
)
from .pac_bayes import (
    HypothesisSummary,
    PacBayesResult,
    change_of_measure_gap,
    gibbs_posterior,
    pb_bernstein_adaptive,
    pb_bernstein_fixed_lambda,
    pb_ha_adaptive,
    pb_ha_fixed_lambda,
    pb_kl_bound,
    pb_pinsker_bound,
)
from .simulation import (
    ExperimentReport,
    MartingaleTrace,
    ScenarioSpec,
    coverage_experiment,
    simulate_field,
    simulate_sequence,
    tightness_table,
)

__all__ = [
    "BoundResult",
    "Branch",
    "ExperimentReport",
    "HypothesisSummary",
    "LambdaGrid",
    "MartingaleTrace",
    "PacBayesResult",
    "ScenarioSpec",
    "bernoulli_kl",
    "bernstein_adaptive",
    "bernstein_fixed_lambda",
    "change_of_measure_gap",
    "coverage_experiment",
    "discrete_kl",
    "gibbs_posterior",
    "hoeffding_azuma_radius",
    "kl_drift_bound",
    "kl_inv_lower",
    "kl_inv_upper",
    "lambda_grid",
    "pb_bernstein_adaptive",
    "pb_bernstein_fixed_lambda",
    "pb_ha_adaptive",
    "pb_ha_fixed_lambda",
    "pb_kl_bound",
    "pb_pinsker_bound",
    "pinsker_radius",
    "refined_kl_upper",
    "simulate_field",
    "simulate_sequence",
    "tightness_table",
]
