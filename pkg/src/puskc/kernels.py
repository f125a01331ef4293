"""Minimax bag statistics and the polynomial set kernel.

A bag is summarized by the 2d vector of per-dimension minima followed by
per-dimension maxima; two bags are compared through a polynomial kernel on
those summaries.  Basis vectors against a fixed set of kernel centers give
the feature map used by the classifier and the prior estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Bag
from .errors import DataError


@dataclass(frozen=True, eq=False)
class AffineScaling:
    """Per-coordinate affine map ``s -> (s - shift) * scale`` for statistics."""

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        shift = np.asarray(self.shift, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        if shift.shape != scale.shape or shift.ndim != 1:
            raise DataError("scaling shift and scale must be 1-D of equal length")
        if not (np.all(np.isfinite(shift)) and np.all(np.isfinite(scale))):
            raise DataError("scaling parameters must be finite")
        if np.any(scale <= 0):
            raise DataError("scale factors must be strictly positive")
        shift.setflags(write=False)
        scale.setflags(write=False)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    def apply(self, stats: np.ndarray) -> np.ndarray:
        return (np.asarray(stats, dtype=float) - self.shift) * self.scale

    @staticmethod
    def identity(length: int) -> "AffineScaling":
        return AffineScaling(np.zeros(length), np.ones(length))

    @staticmethod
    def fit_minmax(stats: np.ndarray) -> "AffineScaling":
        """Fit a map sending each statistic coordinate to [0, 1] on `stats` rows.

        Coordinates with zero range are shifted to 0 and left unscaled.
        """
        stats = np.atleast_2d(np.asarray(stats, dtype=float))
        lo = stats.min(axis=0)
        hi = stats.max(axis=0)
        span = hi - lo
        scale = np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 1.0)
        return AffineScaling(shift=lo, scale=scale)


@dataclass(frozen=True, eq=False)
class KernelConfig:
    """Polynomial degree and statistic scaling; ``scaling=None`` means identity."""

    rho: int = 1
    scaling: AffineScaling | None = None

    def __post_init__(self):
        if int(self.rho) < 1:
            raise DataError("kernel degree rho must be a positive integer")
        object.__setattr__(self, "rho", int(self.rho))


def minimax_statistic(bag: Bag) -> np.ndarray:
    """Per-dimension minima then maxima of the bag's instances (length 2d)."""
    inst = bag.instances
    return np.concatenate([inst.min(axis=0), inst.max(axis=0)])


def statistics_matrix(bags) -> np.ndarray:
    """Stack minimax statistics of `bags` into an (n_bags, 2d) matrix."""
    return np.vstack([minimax_statistic(bag) for bag in bags])


def _scaled(stats: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    if cfg.scaling is None:
        return np.asarray(stats, dtype=float)
    return cfg.scaling.apply(stats)


def polynomial_from_scaled(scaled_a: np.ndarray, scaled_b: np.ndarray, rho: int) -> np.ndarray:
    """Kernel values ``(<a, b> + 1)^rho`` on already-scaled statistics."""
    return (scaled_a @ np.asarray(scaled_b, dtype=float).T + 1.0) ** rho


def minimax_kernel(s: np.ndarray, s2: np.ndarray, cfg: KernelConfig) -> float:
    """Polynomial kernel between two minimax statistics, scaling applied internally."""
    s = np.asarray(s, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if s.shape != s2.shape:
        raise DataError(f"statistic length mismatch: {s.shape} vs {s2.shape}")
    return float((_scaled(s, cfg) @ _scaled(s2, cfg) + 1.0) ** cfg.rho)


def basis_vector(bag: Bag, centers: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Kernel values of `bag` against each center statistic (rows of `centers`)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] == 0:
        raise DataError("at least one kernel center is required")
    s = minimax_statistic(bag)
    if centers.shape[1] != s.shape[0]:
        raise DataError(
            f"center length {centers.shape[1]} does not match statistic length {s.shape[0]}"
        )
    return polynomial_from_scaled(_scaled(s, cfg), _scaled(centers, cfg), cfg.rho)


def basis_matrix(bags, centers: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Stack basis vectors of `bags` into an (n_bags, n_centers) matrix."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    stats = statistics_matrix(bags)
    return polynomial_from_scaled(_scaled(stats, cfg), _scaled(centers, cfg), cfg.rho)


def gram_matrix(bags, cfg: KernelConfig) -> np.ndarray:
    """Symmetric kernel matrix over a sequence of bags."""
    scaled = _scaled(statistics_matrix(bags), cfg)
    return polynomial_from_scaled(scaled, scaled, cfg.rho)
