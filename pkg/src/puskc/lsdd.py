"""Instance-level density-difference baseline.

Instances pooled from positive bags are treated as a sample of one density,
instances from unlabeled bags as a sample of another; their difference is fit
directly with a Gaussian basis by regularized least squares.  An instance is
called positive when the fitted difference is non-negative, and a bag is
positive when any of its instances is.

The squared-norm term of the least-squares criterion has the closed form
``theta' U theta`` with ``U_jk = (pi sigma^2)^{d/2} exp(-|c_j - c_k|^2 /
(4 sigma^2))``; the coefficient is evaluated in the log domain because
``(pi sigma^2)^{d/2}`` alone overflows or underflows at the dimensions and
widths used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Bag, BagLabel, MilDataset
from .errors import DataError, NumericalError

DEFAULT_SIGMA_GRID = (1e-2, 1e-4, 1e-6)
DEFAULT_LAMBDA_GRID = (1.0, 1e-3, 1e-6)
MAX_CENTERS = 200


@dataclass(frozen=True, eq=False)
class DensityDiffModel:
    centers: np.ndarray  # (k, d) Gaussian basis centers
    theta: np.ndarray  # (k,) basis weights
    sigma: float
    lam: float

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        theta = np.asarray(self.theta, dtype=float).ravel()
        if centers.shape[0] != theta.shape[0]:
            raise DataError("theta length must match the number of centers")
        if self.sigma <= 0:
            raise DataError("sigma must be positive")
        centers.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "theta", theta)


def _design(points: np.ndarray, centers: np.ndarray, sigma: float) -> np.ndarray:
    sq = cdist(points, centers, "sqeuclidean")
    return np.exp(-sq / (2.0 * sigma**2))


def _overlap_matrix(centers: np.ndarray, sigma: float) -> np.ndarray:
    d = centers.shape[1]
    sq = cdist(centers, centers, "sqeuclidean")
    log_u = 0.5 * d * np.log(np.pi * sigma**2) - sq / (4.0 * sigma**2)
    return np.exp(log_u)


def _pools(dataset: MilDataset):
    dataset.require_pu()
    pool_pos = [bag.instances for bag in dataset.with_label(BagLabel.POSITIVE)]
    pool_unl = [bag.instances for bag in dataset.with_label(BagLabel.UNLABELED)]
    if not pool_pos or not pool_unl:
        raise DataError("density-difference training needs positive and unlabeled bags")
    return np.vstack(pool_pos), np.vstack(pool_unl)


def _fit_theta(overlap, h_diff, lam):
    try:
        return np.linalg.solve(overlap + lam * np.eye(overlap.shape[0]), h_diff)
    except np.linalg.LinAlgError:
        raise NumericalError(
            "density-difference system is singular; increase lambda"
        ) from None


def lsdd_train(
    dataset: MilDataset,
    sigma_grid=DEFAULT_SIGMA_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    max_centers: int = MAX_CENTERS,
    seed=0,
) -> DensityDiffModel:
    """Fit the density difference with (sigma, lambda) chosen by k-fold CV.

    The CV score is the method's own criterion 0.5 theta'U theta -
    theta'(h_pos - h_unl) evaluated with held-out empirical means.
    """
    pool_pos, pool_unl = _pools(dataset)
    rng = np.random.default_rng(seed)

    all_points = np.vstack([pool_pos, pool_unl])
    if all_points.shape[0] > max_centers:
        idx = rng.choice(all_points.shape[0], size=max_centers, replace=False)
        centers = all_points[np.sort(idx)]
    else:
        centers = all_points

    folds = min(folds, pool_pos.shape[0], pool_unl.shape[0])
    perm_pos = rng.permutation(pool_pos.shape[0])
    perm_unl = rng.permutation(pool_unl.shape[0])

    best = None
    for sigma in sigma_grid:
        overlap = _overlap_matrix(centers, sigma)
        design_pos = _design(pool_pos, centers, sigma)
        design_unl = _design(pool_unl, centers, sigma)
        for lam in lambda_grid:
            scores = []
            for k in range(folds):
                val_p = np.sort(perm_pos[k::folds])
                val_u = np.sort(perm_unl[k::folds])
                trn_p = np.setdiff1d(np.arange(pool_pos.shape[0]), val_p)
                trn_u = np.setdiff1d(np.arange(pool_unl.shape[0]), val_u)
                h_trn = design_pos[trn_p].mean(axis=0) - design_unl[trn_u].mean(axis=0)
                theta = _fit_theta(overlap, h_trn, lam)
                h_val = design_pos[val_p].mean(axis=0) - design_unl[val_u].mean(axis=0)
                scores.append(0.5 * theta @ overlap @ theta - theta @ h_val)
            mean_score = float(np.mean(scores))
            if np.isfinite(mean_score) and (best is None or mean_score < best[0]):
                best = (mean_score, sigma, lam)

    if best is None:
        raise NumericalError("every (sigma, lambda) candidate failed numerically")
    _, sigma, lam = best
    overlap = _overlap_matrix(centers, sigma)
    h_full = _design(pool_pos, centers, sigma).mean(axis=0) - _design(
        pool_unl, centers, sigma
    ).mean(axis=0)
    theta = _fit_theta(overlap, h_full, lam)
    return DensityDiffModel(centers=centers, theta=theta, sigma=sigma, lam=lam)


def decision_values(model: DensityDiffModel, points) -> np.ndarray:
    """Fitted density difference evaluated at query points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return _design(points, model.centers, model.sigma) @ model.theta


def predict_bag(model: DensityDiffModel, bag: Bag) -> tuple[float, int]:
    """Bag rule: positive when any instance has non-negative fitted difference."""
    if bag.dimension != model.centers.shape[1]:
        raise DataError(
            f"bag {bag.bag_id!r} has dimension {bag.dimension}, "
            f"model expects {model.centers.shape[1]}"
        )
    score = float(decision_values(model, bag.instances).max())
    return score, (1 if score >= 0 else -1)
