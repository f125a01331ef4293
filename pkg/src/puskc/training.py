"""End-to-end training of the PU set-kernel bag classifier.

The pipeline is: fit a min-max scaling on training-bag statistics, build
basis vectors against all training bags, estimate the class prior, and
solve the hinge-slack quadratic program.  Hyperparameters (kernel degree,
regularization) are chosen by stratified k-fold cross-validation scored
with the zero-one PU risk; within a fold the kernel centers, the scaling,
and the prior estimate all come from the training portion only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Bag, BagLabel, MilDataset
from .errors import DataError, NumericalError
from .kernels import AffineScaling, polynomial_from_scaled, statistics_matrix
from .losses import Loss, pu_empirical_risk
from .model import TrainedModel
from .prior import estimate_prior
from .qp import OPTIMAL, QpSolution, assemble_pu_qp, solve

DEFAULT_RHO_GRID = (1, 2, 3)
DEFAULT_LAMBDA_GRID = (1.0, 1e-3, 1e-6)
DEFAULT_ETA = 0.1


@dataclass(frozen=True)
class Hyperparams:
    rho: int
    lam: float
    eta: float = DEFAULT_ETA


@dataclass(frozen=True)
class CvCandidate:
    params: Hyperparams
    mean_risk: float
    fold_risks: tuple
    failure: str | None = None


@dataclass(frozen=True)
class CvReport:
    candidates: tuple
    folds: int
    chosen: Hyperparams


def _fit_stats(stats_pos, stats_unl, rho, lam, pi, eta, qp_tol, qp_max_iter):
    """Fit on precomputed statistics; returns (alpha, beta, pi, solution, scaling)."""
    centers = np.vstack([stats_pos, stats_unl])
    scaling = AffineScaling.fit_minmax(centers)
    scaled_centers = scaling.apply(centers)
    phi_pos = polynomial_from_scaled(scaling.apply(stats_pos), scaled_centers, rho)
    phi_unl = polynomial_from_scaled(scaling.apply(stats_unl), scaled_centers, rho)
    if pi is None:
        pi = estimate_prior(phi_pos, phi_unl, eta).pi_hat
    problem = assemble_pu_qp(phi_pos, phi_unl, pi, lam)
    solution = solve(problem, tol=qp_tol, max_iter=qp_max_iter)
    if solution.status != OPTIMAL:
        raise NumericalError(
            f"QP solve ended with status {solution.status} "
            f"(kkt residual {solution.kkt_residual:.2e})"
        )
    m = centers.shape[0]
    return solution.x[:m], float(solution.x[m]), float(pi), solution, scaling


def _scores(stats, scaling, scaled_centers, rho, alpha, beta):
    phi = polynomial_from_scaled(scaling.apply(stats), scaled_centers, rho)
    return phi @ alpha + beta


def _fold_slices(n, folds, rng):
    perm = rng.permutation(n)
    return [np.sort(perm[k::folds]) for k in range(folds)]


def _split_pu(dataset: MilDataset):
    dataset.require_pu()
    pos = dataset.with_label(BagLabel.POSITIVE)
    unl = dataset.with_label(BagLabel.UNLABELED)
    return pos, unl


def fit(
    dataset: MilDataset,
    rho: int,
    lam: float,
    pi_override: float | None = None,
    eta: float = DEFAULT_ETA,
    qp_tol: float = 1e-8,
    qp_max_iter: int = 100,
) -> tuple[TrainedModel, QpSolution]:
    """Single fit at fixed hyperparameters (no cross-validation)."""
    pos, unl = _split_pu(dataset)
    if not pos or not unl:
        raise DataError("training needs at least one positive and one unlabeled bag")
    stats_pos = statistics_matrix(pos)
    stats_unl = statistics_matrix(unl)
    alpha, beta, pi, solution, scaling = _fit_stats(
        stats_pos, stats_unl, rho, lam, pi_override, eta, qp_tol, qp_max_iter
    )
    centers_scaled = scaling.apply(np.vstack([stats_pos, stats_unl]))
    model = TrainedModel(
        centers=centers_scaled,
        alpha=alpha,
        beta=beta,
        rho=rho,
        lam=lam,
        pi_hat=pi,
        scaling=scaling,
    )
    return model, solution


def train(
    dataset: MilDataset,
    rho_grid=DEFAULT_RHO_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    eta: float = DEFAULT_ETA,
    folds: int = 5,
    pi_override: float | None = None,
    seed=0,
) -> tuple[TrainedModel, CvReport]:
    """Cross-validated training; returns the refitted model and the CV report."""
    pos, unl = _split_pu(dataset)
    if len(pos) < folds or len(unl) < folds:
        raise DataError(
            f"need at least {folds} positive and {folds} unlabeled bags for "
            f"{folds}-fold cross-validation (have {len(pos)} / {len(unl)})"
        )

    stats_pos = statistics_matrix(pos)
    stats_unl = statistics_matrix(unl)
    rng = np.random.default_rng(seed)
    folds_pos = _fold_slices(len(pos), folds, rng)
    folds_unl = _fold_slices(len(unl), folds, rng)

    candidates = []
    for rho in rho_grid:
        for lam in lambda_grid:
            params = Hyperparams(rho=int(rho), lam=float(lam), eta=float(eta))
            fold_risks = []
            failure = None
            for k in range(folds):
                val_p, val_u = folds_pos[k], folds_unl[k]
                trn_p = np.setdiff1d(np.arange(len(pos)), val_p)
                trn_u = np.setdiff1d(np.arange(len(unl)), val_u)
                try:
                    alpha, beta, pi_k, _, scaling = _fit_stats(
                        stats_pos[trn_p],
                        stats_unl[trn_u],
                        params.rho,
                        params.lam,
                        pi_override,
                        eta,
                        1e-8,
                        100,
                    )
                except NumericalError as exc:
                    failure = f"fold {k}: {exc}"
                    break
                scaled_centers = scaling.apply(
                    np.vstack([stats_pos[trn_p], stats_unl[trn_u]])
                )
                g_val_p = _scores(
                    stats_pos[val_p], scaling, scaled_centers, params.rho, alpha, beta
                )
                g_val_u = _scores(
                    stats_unl[val_u], scaling, scaled_centers, params.rho, alpha, beta
                )
                fold_risks.append(
                    pu_empirical_risk(Loss.ZERO_ONE, pi_k, g_val_p, g_val_u)
                )
            if failure is None:
                mean_risk = float(np.mean(fold_risks))
            else:
                mean_risk = float("inf")
            candidates.append(
                CvCandidate(
                    params=params,
                    mean_risk=mean_risk,
                    fold_risks=tuple(fold_risks),
                    failure=failure,
                )
            )

    viable = [c for c in candidates if np.isfinite(c.mean_risk)]
    if not viable:
        causes = "; ".join(f"{c.params}: {c.failure}" for c in candidates)
        raise NumericalError(f"every hyperparameter candidate failed ({causes})")
    # ties prefer the simpler kernel, then the stronger regularizer
    chosen = min(viable, key=lambda c: (c.mean_risk, c.params.rho, -c.params.lam))

    model, _ = fit(
        dataset,
        rho=chosen.params.rho,
        lam=chosen.params.lam,
        pi_override=pi_override,
        eta=eta,
    )
    report = CvReport(candidates=tuple(candidates), folds=folds, chosen=chosen.params)
    return model, report


def decision_score(model: TrainedModel, bag: Bag) -> float:
    """Classifier value alpha' phi(X) + beta under the model's stored transform."""
    if bag.dimension != model.dimension:
        raise DataError(
            f"bag {bag.bag_id!r} has dimension {bag.dimension}, "
            f"model expects {model.dimension}"
        )
    stat = np.concatenate([bag.instances.min(axis=0), bag.instances.max(axis=0)])
    phi = (model.centers @ model.scaling.apply(stat) + 1.0) ** model.rho
    return float(model.alpha @ phi + model.beta)


def predict(model: TrainedModel, bag: Bag) -> tuple[float, int]:
    """Score a bag; the label is +1 when the score is non-negative."""
    score = decision_score(model, bag)
    return score, (1 if score >= 0 else -1)


def predict_dataset(model: TrainedModel, dataset: MilDataset):
    """Vector of (bag_id, score, label) triples over a dataset."""
    out = []
    for bag, _ in dataset.bags:
        score, label = predict(model, bag)
        out.append((bag.bag_id, score, label))
    return out
