"""Confidence-weighted key-instance baseline trained by a genetic search.

Each unlabeled bag carries a confidence in [0, 1] expressing belief that it
is negative (positive bags are pinned at 1).  A population of confidence
vectors is evolved: the highest-confidence unlabeled bags are treated as
possibly negative, a weighted kernel density estimate of the negative class
picks each bag's key instance (its least-negative-looking member), a
weighted hinge SVM is fit on those key instances, and the resulting
F-measure drives mutation toward the best member.  Training ends when the
best confidence vector stops moving or the iteration cap is reached.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Bag, BagLabel, MilDataset
from .errors import DataError
from .qp import QpProblem, solve

DEFAULT_POPULATION = 10
DEFAULT_MUTATION_RATE = 0.2
DEFAULT_MAX_ITER = 50
DEFAULT_SVM_C = 1.0
CONVERGENCE_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class PumilState:
    confidences: np.ndarray  # (population, n_bags), positives pinned at 1
    best_confidence: np.ndarray
    f_measures: np.ndarray
    iteration: int


@dataclass(frozen=True, eq=False)
class PumilModel:
    w: np.ndarray  # (d,) separating direction, no bias
    density_points: np.ndarray  # confidence-scaled instances of the final extraction
    bandwidth: float
    state: PumilState
    kkt_residual: float


def median_bandwidth(points: np.ndarray) -> float:
    """Median pairwise distance; falls back to 1 for degenerate point sets."""
    points = np.atleast_2d(points)
    if points.shape[0] < 2:
        return 1.0
    if points.shape[0] > 500:
        points = points[:: points.shape[0] // 500 + 1]
    dists = cdist(points, points)
    med = float(np.median(dists[np.triu_indices_from(dists, k=1)]))
    return med if med > 0 else 1.0


def wkde_density(queries: np.ndarray, scaled_points: np.ndarray, bandwidth: float) -> np.ndarray:
    """Mean Gaussian kernel value between queries and confidence-scaled points."""
    queries = np.atleast_2d(queries)
    sq = cdist(queries, np.atleast_2d(scaled_points), "sqeuclidean")
    return np.exp(-sq / (2.0 * bandwidth**2)).mean(axis=1)


def mutate(nu: np.ndarray, f_measure: float, nu_best: np.ndarray, r: float) -> np.ndarray:
    """Move a confidence vector toward the best one; result clipped to [0, 1]."""
    return np.clip(nu + r * (1.0 - f_measure) * (nu_best - nu), 0.0, 1.0)


def _f1(predicted: np.ndarray, assumed: np.ndarray) -> float:
    tp = int(np.sum((predicted == 1) & (assumed == 1)))
    fp = int(np.sum((predicted == 1) & (assumed == -1)))
    fn = int(np.sum((predicted == -1) & (assumed == 1)))
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def _solve_weighted_svm(key_instances, labels, weights, svm_c):
    """Hinge SVM min 0.5|w|^2 + C sum max(0, 1 - w_b Y_b w'x_b) via the QP solver."""
    k, d = key_instances.shape
    n = d + k
    q = np.zeros((n, n))
    q[:d, :d] = np.eye(d)
    c = np.concatenate([np.zeros(d), np.full(k, svm_c)])
    margin_rows = np.hstack(
        [-(weights * labels)[:, None] * key_instances, -np.eye(k)]
    )
    slack_rows = np.hstack([np.zeros((k, d)), -np.eye(k)])
    a = np.vstack([slack_rows, margin_rows])
    b = np.concatenate([np.zeros(k), -np.ones(k)])
    solution = solve(QpProblem(Q=q, c=c, A=a, b=b), tol=1e-8, max_iter=100)
    return solution.x[:d], solution.kkt_residual


class _Evaluator:
    """Steps 2-4 of the training loop for one confidence vector."""

    def __init__(self, bags, n_pos, bandwidth, svm_c):
        self.bags = bags
        self.n_pos = n_pos
        self.bandwidth = bandwidth
        self.svm_c = svm_c
        self.warned_degenerate = False

    def extract_possibly_negative(self, nu: np.ndarray) -> np.ndarray:
        conf_unl = nu[self.n_pos :]
        order = np.argsort(-conf_unl, kind="stable")  # ties keep bag order
        return self.n_pos + np.sort(order[: self.n_pos])

    def _key_instance(self, bag: Bag, scaled_points: np.ndarray) -> np.ndarray:
        dens = wkde_density(bag.instances, scaled_points, self.bandwidth)
        if len(bag) > 1 and np.ptp(dens) == 0 and not self.warned_degenerate:
            warnings.warn(
                "degenerate key-instance selection: all densities equal; "
                "breaking ties by instance order",
                RuntimeWarning,
                stacklevel=2,
            )
            self.warned_degenerate = True
        return bag.instances[int(np.argmin(dens))]

    def __call__(self, nu: np.ndarray):
        pn_idx = self.extract_possibly_negative(nu)
        scaled_points = np.vstack(
            [nu[b] * self.bags[b].instances for b in pn_idx]
        )

        pmp_idx = list(range(self.n_pos)) + list(pn_idx)
        keys = np.vstack(
            [self._key_instance(self.bags[b], scaled_points) for b in pmp_idx]
        )
        labels = np.array([1.0] * self.n_pos + [-1.0] * len(pn_idx))
        weights = np.array([1.0] * self.n_pos + [nu[b] for b in pn_idx])
        w, kkt_residual = _solve_weighted_svm(keys, labels, weights, self.svm_c)

        pn_set = set(int(b) for b in pn_idx)
        assumed = np.array(
            [
                1 if (b < self.n_pos or b not in pn_set) else -1
                for b in range(len(self.bags))
            ]
        )
        predicted = np.array(
            [
                1 if w @ self._key_instance(bag, scaled_points) >= 0 else -1
                for bag in self.bags
            ]
        )
        return _f1(predicted, assumed), w, scaled_points, kkt_residual


def pumil_train(
    train: MilDataset,
    population: int = DEFAULT_POPULATION,
    mutation_rate: float = DEFAULT_MUTATION_RATE,
    max_iter: int = DEFAULT_MAX_ITER,
    svm_c: float = DEFAULT_SVM_C,
    seed=0,
) -> PumilModel:
    train.require_pu()
    pos = train.with_label(BagLabel.POSITIVE)
    unl = train.with_label(BagLabel.UNLABELED)
    if not pos:
        raise DataError("training needs at least one positive bag")
    if len(unl) < len(pos):
        raise DataError(
            f"training needs at least as many unlabeled bags as positive ones "
            f"({len(unl)} < {len(pos)})"
        )

    bags = pos + unl
    n_pos, n_bags = len(pos), len(pos) + len(unl)
    bandwidth = median_bandwidth(np.vstack([bag.instances for bag in bags]))
    evaluator = _Evaluator(bags, n_pos, bandwidth, svm_c)

    rng = np.random.default_rng(seed)
    members = np.ones((population, n_bags))
    members[:, n_pos:] = rng.random((population, n_bags - n_pos))
    evals = [evaluator(members[l]) for l in range(population)]
    f_measures = np.array([e[0] for e in evals])

    best = int(np.argmax(f_measures))
    nu_best = members[best].copy()
    iteration = 0
    for iteration in range(1, max_iter + 1):
        previous_best = nu_best.copy()
        for l in range(population):
            if l == best or rng.random() >= mutation_rate:
                continue
            candidate = mutate(
                members[l], f_measures[l], nu_best, rng.standard_normal()
            )
            candidate[:n_pos] = 1.0
            cand_eval = evaluator(candidate)
            if cand_eval[0] > f_measures[l]:
                members[l] = candidate
                evals[l] = cand_eval
                f_measures[l] = cand_eval[0]
        best = int(np.argmax(f_measures))
        nu_best = members[best].copy()
        if np.abs(nu_best - previous_best).max() <= CONVERGENCE_TOL:
            break

    # final pass from the best confidence to obtain the deployed classifier
    _, w, scaled_points, kkt_residual = evaluator(nu_best)
    state = PumilState(
        confidences=members,
        best_confidence=nu_best,
        f_measures=f_measures,
        iteration=iteration,
    )
    return PumilModel(
        w=w,
        density_points=scaled_points,
        bandwidth=bandwidth,
        state=state,
        kkt_residual=kkt_residual,
    )


def pumil_predict(model: PumilModel, bag: Bag) -> tuple[float, int]:
    """Score a bag by its key instance; label +1 when the score is non-negative."""
    if bag.instances.shape[1] != model.w.shape[0]:
        raise DataError(
            f"bag {bag.bag_id!r} has dimension {bag.instances.shape[1]}, "
            f"model expects {model.w.shape[0]}"
        )
    dens = wkde_density(bag.instances, model.density_points, model.bandwidth)
    key = bag.instances[int(np.argmin(dens))]
    score = float(model.w @ key)
    return score, (1 if score >= 0 else -1)
