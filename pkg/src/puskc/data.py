"""Bags, labeled bag datasets, and dataset file ingestion.

A bag is a non-empty set of d-dimensional instances that shares a single
label.  Datasets are immutable after construction; the loaders validate
dimensions, labels, and finiteness up front so downstream code never has to.

Two on-disk formats are supported:

* CSV with header ``bag_id,label,f0,...,f{d-1}`` and one row per instance;
  labels are encoded as ``1`` (positive), ``-1`` (negative), ``0`` (unlabeled).
* JSON: ``{"dimension": d, "bags": [{"id", "label", "instances"}, ...]}``.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError


class BagLabel(enum.IntEnum):
    POSITIVE = 1
    NEGATIVE = -1
    UNLABELED = 0


_LABEL_CODES = {1: BagLabel.POSITIVE, -1: BagLabel.NEGATIVE, 0: BagLabel.UNLABELED}


@dataclass(frozen=True, eq=False)
class Bag:
    """A non-empty collection of instances sharing one (possibly unknown) label."""

    bag_id: str
    instances: np.ndarray  # shape (n_instances, dimension), read-only

    def __post_init__(self):
        if not self.bag_id:
            raise DataError("bag id must be a non-empty string")
        inst = np.array(self.instances, dtype=float)
        if inst.ndim != 2 or inst.shape[0] == 0 or inst.shape[1] == 0:
            raise DataError(
                f"bag {self.bag_id!r}: instances must form a non-empty 2-D array"
            )
        if not np.all(np.isfinite(inst)):
            raise DataError(f"bag {self.bag_id!r}: non-finite feature value")
        inst.setflags(write=False)
        object.__setattr__(self, "instances", inst)

    @property
    def dimension(self) -> int:
        return self.instances.shape[1]

    def __len__(self) -> int:
        return self.instances.shape[0]


@dataclass(frozen=True, eq=False)
class MilDataset:
    """An immutable sequence of (bag, label) pairs with a common dimension."""

    dimension: int
    bags: tuple
    provenance: str = ""

    def __post_init__(self):
        if self.dimension < 1:
            raise DataError("dataset dimension must be >= 1")
        pairs = []
        seen = set()
        for bag, label in self.bags:
            label = BagLabel(label)
            if bag.dimension != self.dimension:
                raise DataError(
                    f"bag {bag.bag_id!r} has dimension {bag.dimension}, "
                    f"dataset declares {self.dimension}"
                )
            if bag.bag_id in seen:
                raise DataError(f"duplicate bag id {bag.bag_id!r}")
            seen.add(bag.bag_id)
            pairs.append((bag, label))
        object.__setattr__(self, "bags", tuple(pairs))

    def __len__(self) -> int:
        return len(self.bags)

    def with_label(self, label: BagLabel) -> list[Bag]:
        return [bag for bag, lab in self.bags if lab == label]

    def counts(self) -> dict[BagLabel, int]:
        out = {lab: 0 for lab in BagLabel}
        for _, lab in self.bags:
            out[lab] += 1
        return out

    def instance_count(self) -> int:
        return sum(len(bag) for bag, _ in self.bags)

    def require_pu(self) -> None:
        """Reject datasets carrying negative labels (PU training contract)."""
        for bag, lab in self.bags:
            if lab == BagLabel.NEGATIVE:
                raise DataError(
                    f"bag {bag.bag_id!r} is labeled negative; "
                    "PU training input admits only positive and unlabeled bags"
                )


def _parse_label(raw, where: str) -> BagLabel:
    try:
        code = int(raw)
    except (TypeError, ValueError):
        raise DataError(f"{where}: label {raw!r} is not one of 1, -1, 0") from None
    if code not in _LABEL_CODES:
        raise DataError(f"{where}: label {code} is not one of 1, -1, 0")
    return _LABEL_CODES[code]


def _load_csv(path: Path) -> MilDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "bag_id" or header[1] != "label":
            raise DataError(
                f"{path}: header must be 'bag_id,label,f0,...' (got {header[:3]}...)"
            )
        dimension = len(header) - 2

        order: list[str] = []
        rows: dict[str, list[np.ndarray]] = {}
        labels: dict[str, BagLabel] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != dimension + 2:
                raise DataError(
                    f"{where}: expected {dimension} feature values, got {len(row) - 2}"
                )
            bag_id = row[0]
            if not bag_id:
                raise DataError(f"{where}: empty bag id")
            label = _parse_label(row[1], where)
            try:
                values = np.array([float(v) for v in row[2:]])
            except ValueError:
                raise DataError(f"{where}: non-numeric feature value") from None
            if not np.all(np.isfinite(values)):
                raise DataError(f"{where}: non-finite feature value")
            if bag_id not in rows:
                order.append(bag_id)
                rows[bag_id] = []
                labels[bag_id] = label
            elif labels[bag_id] != label:
                raise DataError(
                    f"{where}: bag {bag_id!r} carries conflicting labels"
                )
            rows[bag_id].append(values)

    if not order:
        raise DataError(f"{path}: no data rows")
    bags = tuple(
        (Bag(bag_id, np.vstack(rows[bag_id])), labels[bag_id]) for bag_id in order
    )
    return MilDataset(dimension=dimension, bags=bags, provenance=str(path))


def _load_json(path: Path) -> MilDataset:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
    for key in ("dimension", "bags"):
        if key not in payload:
            raise DataError(f"{path}: missing field {key!r}")
    bags = []
    for i, entry in enumerate(payload["bags"]):
        where = f"{path}: bags[{i}]"
        for key in ("id", "label", "instances"):
            if key not in entry:
                raise DataError(f"{where}: missing field {key!r}")
        label = _parse_label(entry["label"], where)
        bags.append((Bag(str(entry["id"]), np.asarray(entry["instances"], dtype=float)), label))
    return MilDataset(
        dimension=int(payload["dimension"]), bags=tuple(bags), provenance=str(path)
    )


def _resolve_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise DataError(f"unsupported dataset format {fmt!r} (use csv or json)")
    return fmt


def load_dataset(path, fmt: str | None = None) -> MilDataset:
    """Load a bag dataset from CSV or JSON; format inferred from the suffix."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    if _resolve_format(path, fmt) == "csv":
        return _load_csv(path)
    return _load_json(path)


def save_dataset(dataset: MilDataset, path, fmt: str | None = None) -> None:
    """Write a dataset in the canonical CSV or JSON layout."""
    path = Path(path)
    if _resolve_format(path, fmt) == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["bag_id", "label"] + [f"f{i}" for i in range(dataset.dimension)]
            )
            for bag, label in dataset.bags:
                for row in bag.instances:
                    writer.writerow([bag.bag_id, int(label)] + [repr(v) for v in row])
    else:
        payload = {
            "dimension": dataset.dimension,
            "bags": [
                {
                    "id": bag.bag_id,
                    "label": int(label),
                    "instances": bag.instances.tolist(),
                }
                for bag, label in dataset.bags
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
