"""Analytic class-prior estimation by divergence partial matching.

The prior of the positive class is recovered from a closed form built on two
moments of the basis representation: the second-moment matrix of unlabeled
bags and the mean basis vector of positive bags.  The raw closed-form value
can leave (0, 1) under sampling noise, so the public estimate is clamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .data import BagLabel, MilDataset
from .errors import DataError, NumericalError
from .kernels import KernelConfig, AffineScaling, basis_matrix, statistics_matrix

PI_MIN_DEFAULT = 0.01
PI_MAX_DEFAULT = 0.99


@dataclass(frozen=True)
class PriorEstimate:
    pi_hat: float
    raw_pi: float
    eta: float
    basis_size: int


def estimate_prior(
    phi_pos: np.ndarray,
    phi_unl: np.ndarray,
    eta: float,
    pi_min: float = PI_MIN_DEFAULT,
    pi_max: float = PI_MAX_DEFAULT,
) -> PriorEstimate:
    """Closed-form prior from basis rows of positive and unlabeled bags.

    ``H`` is the mean outer product over unlabeled rows, ``h`` the mean over
    positive rows; the estimate is ``1 / (2 h'G^-1 h - h'G^-1 H G^-1 h)``
    with ``G = H + eta*I``, clamped to ``[pi_min, pi_max]``.
    """
    phi_pos = np.atleast_2d(np.asarray(phi_pos, dtype=float))
    phi_unl = np.atleast_2d(np.asarray(phi_unl, dtype=float))
    if phi_pos.shape[0] == 0 or phi_unl.shape[0] == 0:
        raise DataError("prior estimation needs positive and unlabeled basis rows")
    if phi_pos.shape[1] != phi_unl.shape[1]:
        raise DataError("positive and unlabeled basis widths differ")
    if eta < 0:
        raise DataError("eta must be non-negative")

    m = phi_pos.shape[1]
    big_h = phi_unl.T @ phi_unl / phi_unl.shape[0]
    small_h = phi_pos.mean(axis=0)
    gram = big_h + eta * np.eye(m)
    try:
        factor = cho_factor(gram)
    except LinAlgError:
        raise NumericalError(
            "regularized moment matrix is singular; pass eta > 0"
        ) from None
    x = cho_solve(factor, small_h)
    denom = 2.0 * small_h @ x - x @ big_h @ x
    raw = float(1.0 / denom) if denom > 0 else float("inf")
    pi_hat = float(min(max(raw, pi_min), pi_max))
    return PriorEstimate(pi_hat=pi_hat, raw_pi=raw, eta=float(eta), basis_size=m)


def estimate_bag_prior(
    train: MilDataset,
    cfg: KernelConfig,
    eta: float,
    pi_min: float = PI_MIN_DEFAULT,
    pi_max: float = PI_MAX_DEFAULT,
) -> PriorEstimate:
    """Bag-level prior: basis rows against all training bags, then the closed form.

    When ``cfg.scaling`` is None a min-max scaling is fitted on the training
    bag statistics (matching the training pipeline's default).
    """
    train.require_pu()
    pos = train.with_label(BagLabel.POSITIVE)
    unl = train.with_label(BagLabel.UNLABELED)
    if not pos or not unl:
        raise DataError(
            "bag-level prior estimation needs at least one positive "
            "and one unlabeled bag"
        )
    centers = statistics_matrix(pos + unl)
    if cfg.scaling is None:
        cfg = KernelConfig(rho=cfg.rho, scaling=AffineScaling.fit_minmax(centers))
    phi_pos = basis_matrix(pos, centers, cfg)
    phi_unl = basis_matrix(unl, centers, cfg)
    return estimate_prior(phi_pos, phi_unl, eta, pi_min=pi_min, pi_max=pi_max)
