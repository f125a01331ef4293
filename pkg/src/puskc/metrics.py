"""Accuracy, the deviation-bound calculator, and mean comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from .errors import DataError

A_BETTER = "a_better"
B_BETTER = "b_better"
TIE = "tie"


@dataclass(frozen=True)
class BoundInputs:
    c_alpha: float  # bound on the weight-vector norm
    c_phi: float  # bound on basis-vector norms over training bags
    pi_star: float  # true positive-class prior
    n_p: int
    n_u: int
    delta: float

    def __post_init__(self):
        if min(self.c_alpha, self.c_phi, self.pi_star) <= 0:
            raise DataError("c_alpha, c_phi, and pi_star must be positive")
        if self.n_p < 1 or self.n_u < 1:
            raise DataError("sample counts must be positive integers")
        if not 0.0 < self.delta < 1.0:
            raise DataError("delta must lie in (0, 1)")


def accuracy(predictions, ground_truth) -> float:
    """Fraction of matching +/-1 labels."""
    predictions = np.asarray(predictions)
    ground_truth = np.asarray(ground_truth)
    if predictions.shape != ground_truth.shape or predictions.ndim != 1:
        raise DataError("predictions and ground truth must be 1-D of equal length")
    if predictions.size == 0:
        raise DataError("cannot score an empty prediction vector")
    for arr in (predictions, ground_truth):
        if not np.all(np.isin(arr, (-1, 1))):
            raise DataError("labels must be +1 or -1")
    return float(np.mean(predictions == ground_truth))


def generalization_bound(b: BoundInputs) -> float:
    """High-probability deviation bound between expected and empirical PU risk.

    Value: sqrt(c_alpha^2 c_phi^2 log(2/delta) / 2) * (2 pi*/sqrt(n_p) + 1/sqrt(n_u)).
    """
    constant = math.sqrt(b.c_alpha**2 * b.c_phi**2 * math.log(2.0 / b.delta) / 2.0)
    return constant * (2.0 * b.pi_star / math.sqrt(b.n_p) + 1.0 / math.sqrt(b.n_u))


def one_sided_t_test(a, b, alpha_level: float = 0.05) -> str:
    """Welch one-sided comparison of means at the given significance level.

    Returns ``"a_better"`` when mean(a) is significantly larger, ``"b_better"``
    for the reverse, ``"tie"`` otherwise (including degenerate variance cases
    with equal means).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] < 2 or b.shape[0] < 2 or a.ndim != 1 or b.ndim != 1:
        raise DataError("t-test needs two 1-D samples of length >= 2")
    if np.var(a) == 0 and np.var(b) == 0:
        if np.mean(a) > np.mean(b):
            return A_BETTER
        if np.mean(b) > np.mean(a):
            return B_BETTER
        return TIE
    p_greater = spstats.ttest_ind(a, b, equal_var=False, alternative="greater").pvalue
    if np.isfinite(p_greater) and p_greater < alpha_level:
        return A_BETTER
    p_less = spstats.ttest_ind(a, b, equal_var=False, alternative="less").pvalue
    if np.isfinite(p_less) and p_less < alpha_level:
        return B_BETTER
    return TIE
