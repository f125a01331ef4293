"""Trained bag classifier container and its JSON serialization.

Center statistics are stored post-scaling together with the scaling
transform, so prediction only has to scale the incoming bag.  Floats are
serialized with full round-trip precision; load(save(m)) is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .kernels import AffineScaling


@dataclass(frozen=True, eq=False)
class TrainedModel:
    centers: np.ndarray  # (M, 2d) minimax statistics, already scaled
    alpha: np.ndarray  # (M,) kernel weights
    beta: float
    rho: int
    lam: float
    pi_hat: float
    scaling: AffineScaling

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        if centers.shape[0] != alpha.shape[0]:
            raise DataError(
                f"alpha length {alpha.shape[0]} does not match "
                f"{centers.shape[0]} centers"
            )
        if centers.shape[1] != self.scaling.shift.shape[0]:
            raise DataError("scaling length does not match center statistics")
        if centers.shape[1] % 2 != 0:
            raise DataError("center statistics must have even length (2d)")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(alpha))):
            raise DataError("model parameters must be finite")
        if not np.isfinite(self.beta):
            raise DataError("beta must be finite")
        if not 0.0 < self.pi_hat < 1.0:
            raise DataError(f"pi_hat must lie in (0, 1), got {self.pi_hat}")
        if int(self.rho) < 1:
            raise DataError("rho must be a positive integer")
        if self.lam < 0:
            raise DataError("lambda must be non-negative")
        centers.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "rho", int(self.rho))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "pi_hat", float(self.pi_hat))

    @property
    def dimension(self) -> int:
        return self.centers.shape[1] // 2


_FIELDS = ("centers", "alpha", "beta", "rho", "lambda", "pi_hat", "scaling")


def save_model(model: TrainedModel, path) -> None:
    # json emits shortest round-trip decimals for floats, so loads are bit-exact
    payload = {
        "centers": model.centers.tolist(),
        "alpha": model.alpha.tolist(),
        "beta": model.beta,
        "rho": model.rho,
        "lambda": model.lam,
        "pi_hat": model.pi_hat,
        "scaling": {
            "shift": model.scaling.shift.tolist(),
            "scale": model.scaling.scale.tolist(),
        },
    }
    with open(Path(path), "w") as fh:
        json.dump(payload, fh)


def _floats(raw, where: str) -> np.ndarray:
    try:
        return np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise DataError(f"model field {where!r} is not numeric") from None


def load_model(path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
    for key in _FIELDS:
        if key not in payload:
            raise DataError(f"{path}: missing field {key!r}")
    for key in ("shift", "scale"):
        if key not in payload["scaling"]:
            raise DataError(f"{path}: missing field 'scaling.{key}'")
    scaling = AffineScaling(
        shift=_floats(payload["scaling"]["shift"], "scaling.shift"),
        scale=_floats(payload["scaling"]["scale"], "scaling.scale"),
    )
    return TrainedModel(
        centers=_floats(payload["centers"], "centers"),
        alpha=_floats(payload["alpha"], "alpha"),
        beta=float(payload["beta"]),
        rho=int(payload["rho"]),
        lam=float(payload["lambda"]),
        pi_hat=float(payload["pi_hat"]),
        scaling=scaling,
    )
