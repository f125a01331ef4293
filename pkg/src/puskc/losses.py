"""Surrogate losses and the positive-unlabeled risk estimator.

The three convex losses all satisfy the shift identity loss(z) - loss(-z) = -z,
which is what makes the PU training objective convex.  The zero-one loss does
not; it is used only for validation scoring.  Ties (z == 0) classify positive.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DataError


class Loss(enum.Enum):
    ZERO_ONE = "zero-one"
    SQUARED = "squared"
    LOGISTIC = "logistic"
    DOUBLE_HINGE = "double-hinge"


def loss(kind: Loss, z):
    """Evaluate the loss elementwise on margins `z` (scalar or array)."""
    z = np.asarray(z, dtype=float)
    if kind == Loss.ZERO_ONE:
        return np.where(z >= 0, 0.0, 1.0)
    if kind == Loss.SQUARED:
        return 0.25 * (z - 1.0) ** 2
    if kind == Loss.LOGISTIC:
        return np.logaddexp(0.0, -z)
    if kind == Loss.DOUBLE_HINGE:
        return np.maximum(-z, np.maximum(0.0, 0.5 * (1.0 - z)))
    raise DataError(f"unknown loss kind {kind!r}")


def pu_empirical_risk(kind: Loss, pi: float, scores_pos, scores_unl) -> float:
    """Empirical PU risk pi*mean_P[l(g) - l(-g)] + mean_U[l(-g)].

    `scores_pos` and `scores_unl` are classifier values on positive and
    unlabeled bags.  For losses satisfying the shift identity this equals the
    convex objective pi*mean_P[-g] + mean_U[l(-g)].
    """
    if not 0.0 < pi < 1.0:
        raise DataError(f"class prior must lie in (0, 1), got {pi}")
    scores_pos = np.asarray(scores_pos, dtype=float)
    scores_unl = np.asarray(scores_unl, dtype=float)
    if scores_pos.size == 0 or scores_unl.size == 0:
        raise DataError("PU risk needs at least one positive and one unlabeled score")
    positive_term = np.mean(loss(kind, scores_pos) - loss(kind, -scores_pos))
    unlabeled_term = np.mean(loss(kind, -scores_unl))
    return float(pi * positive_term + unlabeled_term)
