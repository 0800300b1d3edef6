"""Importance-sampling p-values with validity corrections."""

from ._core import (
    IspvalError,
    bonferroni,
    ess_diagnostic,
    gaussian_true_pvalue,
    invert_confidence_set,
    lemma1_check,
    normal_cdf,
    normal_quantile,
    p_hat,
    p_hat_star,
    p_tilde,
    p_tilde_star,
    two_sided_combine,
    wald_upper_limit,
)

__all__ = [
    "IspvalError",
    "bonferroni",
    "ess_diagnostic",
    "gaussian_true_pvalue",
    "invert_confidence_set",
    "lemma1_check",
    "normal_cdf",
    "normal_quantile",
    "p_hat",
    "p_hat_star",
    "p_tilde",
    "p_tilde_star",
    "two_sided_combine",
    "wald_upper_limit",
]
