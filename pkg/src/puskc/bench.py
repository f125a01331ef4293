"""Benchmark machinery: augmentation, train/test generation, synthetic data,
and the multi-trial experiment runner.

Train/test generation follows the protocol: remove L labeled positives,
draw the positive count of the unlabeled pool from Binomial(U + T, pi) so
the unlabeled-train and test priors come from one draw, then split off T
test bags.  Ground truth for evaluation lives only in the returned test
dataset (and its provenance record), never in the training view.

Every operation is a pure function of its inputs and seed; the runner
derives one child seed per trial so trials are reproducible individually.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import lsdd as lsdd_mod
from . import pumil as pumil_mod
from . import training
from .data import Bag, BagLabel, MilDataset
from .errors import DataError
from .metrics import accuracy, one_sided_t_test

METHODS = ("puskc", "lsdd", "pumil")


@dataclass(frozen=True)
class BenchConfig:
    pi: float
    n_labeled: int = 20  # L: labeled positive training bags
    n_unlabeled: int = 180  # U: unlabeled training bags
    n_test: int = 200  # T: test bags
    augment_factor: int = 1
    noise_variance: float = 0.01
    trials: int = 20
    seed: int = 0

    def __post_init__(self):
        # pi == 0 is admitted so split bookkeeping can be tested; run_benchmark
        # itself requires a prior strictly inside (0, 1)
        if not 0.0 <= self.pi < 1.0:
            raise DataError(f"benchmark class prior must lie in [0, 1), got {self.pi}")
        if min(self.n_labeled, self.n_unlabeled, self.n_test, self.trials) < 1:
            raise DataError("L, U, T, and trials must be positive")
        if self.augment_factor < 1:
            raise DataError("augment factor must be >= 1")


@dataclass(frozen=True)
class SyntheticConfig:
    dimension: int
    mu_pos: tuple
    mu_neg: tuple
    theta: float  # instance-level positive fraction inside positive bags
    bag_size_range: tuple = (2, 10)
    n_pos_bags: int = 100
    n_neg_bags: int = 100

    def __post_init__(self):
        if len(self.mu_pos) != self.dimension or len(self.mu_neg) != self.dimension:
            raise DataError("mu vectors must have length equal to the dimension")
        if not 0.0 < self.theta <= 1.0:
            raise DataError(f"theta must lie in (0, 1], got {self.theta}")
        lo, hi = self.bag_size_range
        if lo < 1 or hi < lo:
            raise DataError("bag size range must satisfy 1 <= lo <= hi")

    @staticmethod
    def from_dict(payload: dict) -> "SyntheticConfig":
        try:
            return SyntheticConfig(
                dimension=int(payload["d"]),
                mu_pos=tuple(payload["mu_pos"]),
                mu_neg=tuple(payload["mu_neg"]),
                theta=float(payload["theta"]),
                bag_size_range=tuple(payload.get("bag_size_range", (2, 10))),
                n_pos_bags=int(payload.get("n_pos_bags", 100)),
                n_neg_bags=int(payload.get("n_neg_bags", 100)),
            )
        except KeyError as exc:
            raise DataError(f"synthetic config is missing field {exc}") from None


@dataclass(frozen=True)
class TrialResult:
    method: str
    trial: int
    accuracy: float
    train_seconds: float
    pi_true: float
    pi_hat: float | None = None
    predict_seconds: float = 0.0
    error: str | None = None


def augment(source: MilDataset, factor: int, noise_variance: float, seed=0) -> MilDataset:
    """Originals plus (factor - 1) * N noisy duplicates of randomly chosen bags."""
    if factor < 1:
        raise DataError("augment factor must be >= 1")
    if factor == 1:
        return source
    rng = np.random.default_rng(seed)
    sigma = float(np.sqrt(noise_variance))
    bags = list(source.bags)
    n_extra = (factor - 1) * len(source.bags)
    picks = rng.integers(0, len(source.bags), size=n_extra)
    for i, pick in enumerate(picks):
        src_bag, label = source.bags[int(pick)]
        noisy = src_bag.instances + sigma * rng.standard_normal(src_bag.instances.shape)
        bags.append((Bag(f"{src_bag.bag_id}~aug{i}", noisy), label))
    return MilDataset(
        dimension=source.dimension,
        bags=tuple(bags),
        provenance=f"{source.provenance} [augmented x{factor}, var={noise_variance}]",
    )


def generate_split(
    pool_pos, pool_neg, cfg: BenchConfig, seed=0
) -> tuple[MilDataset, MilDataset]:
    """One train/test draw; the test dataset is the ground-truth sidecar.

    `pool_pos` / `pool_neg` are sequences of bags.  Accepts pi == 0 (all
    unlabeled bags negative), which is useful for testing the bookkeeping.
    """
    l, u, t = cfg.n_labeled, cfg.n_unlabeled, cfg.n_test
    pool_pos, pool_neg = list(pool_pos), list(pool_neg)
    if len(pool_pos) < l:
        raise DataError(
            f"need {l} positive bags for the labeled set, have {len(pool_pos)}"
        )
    rng = np.random.default_rng(seed)

    labeled_idx = rng.choice(len(pool_pos), size=l, replace=False)
    labeled = [pool_pos[i] for i in labeled_idx]
    remaining_pos = [bag for i, bag in enumerate(pool_pos) if i not in set(labeled_idx.tolist())]

    n_unl_pos = int(rng.binomial(u + t, cfg.pi))
    n_unl_neg = u + t - n_unl_pos
    if n_unl_pos > len(remaining_pos):
        raise DataError(
            f"unlabeled pool draw needs {n_unl_pos} positives, "
            f"have {len(remaining_pos)} after removing the labeled set"
        )
    if n_unl_neg > len(pool_neg):
        raise DataError(
            f"unlabeled pool draw needs {n_unl_neg} negatives, have {len(pool_neg)}"
        )

    pos_idx = rng.choice(len(remaining_pos), size=n_unl_pos, replace=False)
    neg_idx = rng.choice(len(pool_neg), size=n_unl_neg, replace=False)
    mixed = [(remaining_pos[i], BagLabel.POSITIVE) for i in pos_idx]
    mixed += [(pool_neg[i], BagLabel.NEGATIVE) for i in neg_idx]
    order = rng.permutation(len(mixed))
    test_pairs = [mixed[i] for i in order[:t]]
    train_unl = [mixed[i][0] for i in order[t:]]

    dimension = labeled[0].dimension if labeled else test_pairs[0][0].dimension
    train = MilDataset(
        dimension=dimension,
        bags=tuple(
            [(bag, BagLabel.POSITIVE) for bag in labeled]
            + [(bag, BagLabel.UNLABELED) for bag in train_unl]
        ),
        provenance=f"benchmark split (L={l}, U={u})",
    )
    test = MilDataset(
        dimension=dimension,
        bags=tuple(test_pairs),
        provenance=json.dumps(
            {"pi": cfg.pi, "n_unlabeled_pool_pos": n_unl_pos, "n_unlabeled_pool_neg": n_unl_neg}
        ),
    )
    return train, test


def generate_synthetic(cfg: SyntheticConfig, seed=0) -> MilDataset:
    """Fully labeled Gaussian bag data.

    Negative bags draw all instances around `mu_neg`; instances of positive
    bags are positive with probability theta (around `mu_pos`) and bags are
    redrawn until they contain at least one positive instance.
    """
    rng = np.random.default_rng(seed)
    mu_pos = np.asarray(cfg.mu_pos, dtype=float)
    mu_neg = np.asarray(cfg.mu_neg, dtype=float)
    lo, hi = cfg.bag_size_range
    bags = []
    for i in range(cfg.n_pos_bags):
        size = int(rng.integers(lo, hi + 1))
        for _ in range(1000):
            flags = rng.random(size) < cfg.theta
            if flags.any():
                break
        else:
            raise DataError("failed to draw a positive instance; theta too small")
        noise = rng.standard_normal((size, cfg.dimension))
        means = np.where(flags[:, None], mu_pos, mu_neg)
        bags.append((Bag(f"pos{i:04d}", means + noise), BagLabel.POSITIVE))
    for i in range(cfg.n_neg_bags):
        size = int(rng.integers(lo, hi + 1))
        noise = rng.standard_normal((size, cfg.dimension))
        bags.append((Bag(f"neg{i:04d}", mu_neg + noise), BagLabel.NEGATIVE))
    return MilDataset(
        dimension=cfg.dimension,
        bags=tuple(bags),
        provenance=f"synthetic (theta={cfg.theta})",
    )


def _train_method(method: str, train_ds: MilDataset, seed):
    """Train one method; returns (predict_fn, pi_hat or None)."""
    if method == "puskc":
        model, _ = training.train(train_ds, seed=seed)
        return (lambda bag: training.predict(model, bag)[1]), model.pi_hat
    if method == "lsdd":
        model = lsdd_mod.lsdd_train(train_ds, seed=seed)
        return (lambda bag: lsdd_mod.predict_bag(model, bag)[1]), None
    if method == "pumil":
        model = pumil_mod.pumil_train(train_ds, seed=seed)
        return (lambda bag: pumil_mod.pumil_predict(model, bag)[1]), None
    raise DataError(f"unknown method {method!r} (choose from {METHODS})")


def _run_trial(methods, pool_pos, pool_neg, cfg: BenchConfig, trial: int):
    train_ds, test_ds = generate_split(pool_pos, pool_neg, cfg, seed=[cfg.seed, trial])
    truth = np.array([int(label) for _, label in test_ds.bags])
    results = []
    for method in methods:
        t0 = time.perf_counter()
        try:
            predict_fn, pi_hat = _train_method(method, train_ds, seed=[cfg.seed, trial, 1])
            train_seconds = time.perf_counter() - t0
            t1 = time.perf_counter()
            predictions = np.array([predict_fn(bag) for bag, _ in test_ds.bags])
            predict_seconds = time.perf_counter() - t1
            results.append(
                TrialResult(
                    method=method,
                    trial=trial,
                    accuracy=accuracy(predictions, truth),
                    train_seconds=train_seconds,
                    pi_true=cfg.pi,
                    pi_hat=pi_hat,
                    predict_seconds=predict_seconds,
                )
            )
        except Exception as exc:  # failures are recorded, the run continues
            results.append(
                TrialResult(
                    method=method,
                    trial=trial,
                    accuracy=float("nan"),
                    train_seconds=time.perf_counter() - t0,
                    pi_true=cfg.pi,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return results


def run_benchmark(
    methods, source: MilDataset, cfg: BenchConfig, threads: int = 1
) -> tuple[list[TrialResult], dict]:
    """Multi-trial comparison on one dataset; returns per-trial rows + summary.

    `source` is a fully labeled dataset; it is augmented once per run, then
    each trial draws a fresh train/test split and times training only.  For
    fair timing comparisons keep ``threads=1`` (trials run sequentially);
    higher values parallelize whole trials without changing the results.
    """
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise DataError(f"unknown methods {sorted(unknown)} (choose from {METHODS})")
    if not 0.0 < cfg.pi < 1.0:
        raise DataError(f"benchmark runs need a class prior in (0, 1), got {cfg.pi}")
    pool = augment(source, cfg.augment_factor, cfg.noise_variance, seed=[cfg.seed, 9999])
    pool_pos = pool.with_label(BagLabel.POSITIVE)
    pool_neg = pool.with_label(BagLabel.NEGATIVE)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            futures = [
                pool_exec.submit(_run_trial, methods, pool_pos, pool_neg, cfg, trial)
                for trial in range(cfg.trials)
            ]
            per_trial = [f.result() for f in futures]
    else:
        per_trial = [
            _run_trial(methods, pool_pos, pool_neg, cfg, trial)
            for trial in range(cfg.trials)
        ]
    results = [r for trial_rows in per_trial for r in trial_rows]
    return results, summarize(results)


def summarize(results) -> dict:
    """Per-method accuracy/timing statistics plus pairwise test verdicts."""
    by_method: dict[str, list[TrialResult]] = {}
    for r in results:
        by_method.setdefault(r.method, []).append(r)

    summary: dict = {"methods": {}, "t_tests": {}}
    accs: dict[str, np.ndarray] = {}
    for method, rows in by_method.items():
        ok = [r for r in rows if r.error is None]
        acc = np.array([r.accuracy for r in ok])
        accs[method] = acc
        summary["methods"][method] = {
            "trials": len(rows),
            "failed": len(rows) - len(ok),
            "mean_accuracy": float(acc.mean()) if acc.size else None,
            "sd_accuracy": float(acc.std(ddof=1)) if acc.size > 1 else None,
            "mean_train_seconds": float(np.mean([r.train_seconds for r in ok]))
            if ok
            else None,
            "mean_predict_seconds": float(np.mean([r.predict_seconds for r in ok]))
            if ok
            else None,
        }
    names = sorted(accs)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if accs[a].size > 1 and accs[b].size > 1:
                summary["t_tests"][f"{a}_vs_{b}"] = one_sided_t_test(accs[a], accs[b])
    return summary


def sweep_positive_bags(
    source: MilDataset, l_values, cfg: BenchConfig, methods=("puskc",), threads: int = 1
) -> dict[int, dict]:
    """Re-run the benchmark at several labeled-positive counts (config axis L)."""
    out = {}
    for l_value in l_values:
        cfg_l = BenchConfig(
            pi=cfg.pi,
            n_labeled=int(l_value),
            n_unlabeled=cfg.n_unlabeled,
            n_test=cfg.n_test,
            augment_factor=cfg.augment_factor,
            noise_variance=cfg.noise_variance,
            trials=cfg.trials,
            seed=cfg.seed,
        )
        _, summary = run_benchmark(methods, source, cfg_l, threads=threads)
        out[int(l_value)] = summary
    return out


CSV_COLUMNS = ("method", "trial", "pi_true", "pi_hat", "accuracy", "train_seconds")


def write_results_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(
                [
                    r.method,
                    r.trial,
                    repr(r.pi_true),
                    "" if r.pi_hat is None else repr(r.pi_hat),
                    "" if not np.isfinite(r.accuracy) else repr(r.accuracy),
                    repr(r.train_seconds),
                ]
            )


def read_results_csv(path) -> list[TrialResult]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing results columns {sorted(missing)}")
        for rec in reader:
            rows.append(
                TrialResult(
                    method=rec["method"],
                    trial=int(rec["trial"]),
                    accuracy=float(rec["accuracy"]) if rec["accuracy"] else float("nan"),
                    train_seconds=float(rec["train_seconds"]),
                    pi_true=float(rec["pi_true"]),
                    pi_hat=float(rec["pi_hat"]) if rec["pi_hat"] else None,
                    error=None if rec["accuracy"] else "recorded failure",
                )
            )
    return rows
