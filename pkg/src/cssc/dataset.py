"""Shill-bidding dataset ingestion, labeled/unlabeled partitioning and fold plans."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .seeding import child_seed, make_rng

FEATURE_NAMES = (
    "bidder_tendency",
    "bidding_ratio",
    "last_bidding",
    "auction_bids",
    "starting_price",
    "early_bidding",
    "winning_ratio",
    "buyer_rating",
    "bid_retraction",
)
N_FEATURES = len(FEATURE_NAMES)
ID_COLUMNS = ("bidder_id", "auction_id")
LABEL_COLUMN = "label"
COLUMNS = ID_COLUMNS + FEATURE_NAMES + (LABEL_COLUMN,)

# Header spellings accepted for a leading record-index column in lenient mode.
_INDEX_COLUMNS = {"", "index", "record_id", "record", "id", "row", "unnamed_0"}


class DatasetError(ValueError):
    """Raised for schema violations and malformed rows."""


class Label(IntEnum):
    UNLABELED = -1
    NORMAL = 0
    FRAUD = 1

    @classmethod
    def parse(cls, text: str, lenient: bool = False) -> "Label":
        value = text.strip().lower()
        if value in ("", "unlabeled"):
            return cls.UNLABELED
        if value == "normal":
            return cls.NORMAL
        if value == "fraud":
            return cls.FRAUD
        if lenient and value in ("0", "1"):
            return cls(int(value))
        raise DatasetError(f"unknown label {text!r}")

    def to_text(self) -> str:
        return "" if self is Label.UNLABELED else self.name.lower()


@dataclass(frozen=True)
class Instance:
    bidder_id: str
    auction_id: str
    features: tuple[float, ...]
    label: Label

    def __post_init__(self):
        if len(self.features) != N_FEATURES:
            raise DatasetError(f"expected {N_FEATURES} features, got {len(self.features)}")
        if not all(math.isfinite(v) for v in self.features):
            raise DatasetError("features must be finite")
        if not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label(self.label))


def _normalize_header(name: str) -> str:
    return "_".join(name.strip().lower().replace("-", " ").replace(":", " ").split())


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable table of bidder-in-auction records.

    Features live in ``X`` (n x 9, float64) and labels in ``y`` (int8 codes of
    :class:`Label`). Both arrays are read-only.
    """

    bidder_ids: tuple[str, ...]
    auction_ids: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    source: str = "<memory>"

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True).reshape(-1, N_FEATURES)
        y = np.array(self.y, dtype=np.int8, copy=True).reshape(-1)
        n = X.shape[0]
        if y.shape[0] != n or len(self.bidder_ids) != n or len(self.auction_ids) != n:
            raise DatasetError("ids, features and labels must have equal lengths")
        if not np.all(np.isfinite(X)):
            bad = int(np.argwhere(~np.isfinite(X))[0, 0])
            raise DatasetError(f"non-finite feature value in instance {bad}")
        if not np.all(np.isin(y, (-1, 0, 1))):
            raise DatasetError("labels must be -1 (unlabeled), 0 (normal) or 1 (fraud)")
        pairs = set(zip(self.bidder_ids, self.auction_ids))
        if len(pairs) != n:
            raise DatasetError("duplicate (bidder_id, auction_id) pair")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "bidder_ids", tuple(str(b) for b in self.bidder_ids))
        object.__setattr__(self, "auction_ids", tuple(str(a) for a in self.auction_ids))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_arrays(cls, X, y=None, bidder_ids=None, auction_ids=None, source="<memory>") -> "Dataset":
        X = np.asarray(X, dtype=np.float64).reshape(-1, N_FEATURES)
        n = X.shape[0]
        if y is None:
            y = np.full(n, Label.UNLABELED, dtype=np.int8)
        if bidder_ids is None:
            bidder_ids = tuple(f"b{i}" for i in range(n))
        if auction_ids is None:
            auction_ids = tuple(f"a{i}" for i in range(n))
        return cls(tuple(bidder_ids), tuple(auction_ids), X, np.asarray(y), source)

    @classmethod
    def from_instances(cls, instances: Sequence[Instance], source="<memory>") -> "Dataset":
        X = np.array([inst.features for inst in instances], dtype=np.float64).reshape(-1, N_FEATURES)
        y = np.array([int(inst.label) for inst in instances], dtype=np.int8)
        return cls(
            tuple(inst.bidder_id for inst in instances),
            tuple(inst.auction_id for inst in instances),
            X,
            y,
            source,
        )

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> Instance:
        return Instance(
            self.bidder_ids[i],
            self.auction_ids[i],
            tuple(float(v) for v in self.X[i]),
            Label(int(self.y[i])),
        )

    def __iter__(self) -> Iterator[Instance]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.bidder_ids == other.bidder_ids
            and self.auction_ids == other.auction_ids
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def instances(self) -> list[Instance]:
        return list(self)

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.y != Label.UNLABELED

    @property
    def n_normal(self) -> int:
        return int(np.sum(self.y == Label.NORMAL))

    @property
    def n_fraud(self) -> int:
        return int(np.sum(self.y == Label.FRAUD))

    @property
    def n_labeled(self) -> int:
        return int(np.sum(self.labeled_mask))

    @property
    def n_unlabeled(self) -> int:
        return len(self) - self.n_labeled

    @property
    def provenance(self) -> dict:
        return {"source": self.source, "rows": len(self)}

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp).reshape(-1)
        return Dataset(
            tuple(self.bidder_ids[i] for i in idx),
            tuple(self.auction_ids[i] for i in idx),
            self.X[idx],
            self.y[idx],
            self.source,
        )

    def with_features(self, X) -> "Dataset":
        return Dataset(self.bidder_ids, self.auction_ids, X, self.y, self.source)

    def with_labels(self, y) -> "Dataset":
        return Dataset(self.bidder_ids, self.auction_ids, self.X, y, self.source)


def concat(datasets: Sequence[Dataset], source: str = "<memory>") -> Dataset:
    return Dataset(
        tuple(b for ds in datasets for b in ds.bidder_ids),
        tuple(a for ds in datasets for a in ds.auction_ids),
        np.vstack([ds.X for ds in datasets]) if datasets else np.empty((0, N_FEATURES)),
        np.concatenate([ds.y for ds in datasets]) if datasets else np.empty(0, dtype=np.int8),
        source,
    )


def load_csv(path, schema_mode: str = "strict") -> Dataset:
    """Read a shill-bidding CSV file.

    Parameters
    ----------
    path : str or Path
        UTF-8, comma-separated file with a header row.
    schema_mode : {"strict", "lenient"}
        ``strict`` requires exactly the columns in :data:`COLUMNS`, in order.
        ``lenient`` maps columns by name, tolerates a leading record-index
        column and unknown extra columns, accepts ``0``/``1`` labels and
        treats a missing label column as all-unlabeled.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    DatasetError
        On schema violations, non-numeric features (row number reported;
        the header is row 1) and duplicate (bidder_id, auction_id) pairs.
    """
    if schema_mode not in ("strict", "lenient"):
        raise ValueError(f"schema_mode must be 'strict' or 'lenient', got {schema_mode!r}")
    lenient = schema_mode == "lenient"
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: missing header row") from None
        names = [_normalize_header(h) for h in header]
        positions = _resolve_columns(names, lenient, path)
        bidder_ids, auction_ids, rows, labels = [], [], [], []
        seen: dict[tuple[str, str], int] = {}
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if not lenient and len(row) != len(COLUMNS):
                raise DatasetError(f"{path}: row {rowno}: expected {len(COLUMNS)} fields, got {len(row)}")
            if len(row) < len(header):
                row = row + [""] * (len(header) - len(row))
            b = row[positions["bidder_id"]].strip()
            a = row[positions["auction_id"]].strip()
            feats = []
            for name in FEATURE_NAMES:
                cell = row[positions[name]]
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetError(f"{path}: row {rowno}: non-numeric value {cell!r} for {name}") from None
                if not math.isfinite(value):
                    raise DatasetError(f"{path}: row {rowno}: non-finite value {cell!r} for {name}")
                feats.append(value)
            if LABEL_COLUMN in positions:
                try:
                    label = Label.parse(row[positions[LABEL_COLUMN]], lenient=lenient)
                except DatasetError as exc:
                    raise DatasetError(f"{path}: row {rowno}: {exc}") from None
            else:
                label = Label.UNLABELED
            if (b, a) in seen:
                raise DatasetError(
                    f"{path}: row {rowno}: duplicate (bidder_id, auction_id) = ({b}, {a}), first seen at row {seen[(b, a)]}"
                )
            seen[(b, a)] = rowno
            bidder_ids.append(b)
            auction_ids.append(a)
            rows.append(feats)
            labels.append(int(label))
    X = np.array(rows, dtype=np.float64).reshape(-1, N_FEATURES)
    return Dataset(tuple(bidder_ids), tuple(auction_ids), X, np.array(labels, dtype=np.int8), str(path))


def _resolve_columns(names: list[str], lenient: bool, path: Path) -> dict[str, int]:
    if not lenient:
        if tuple(names) != COLUMNS:
            missing = [c for c in COLUMNS if c not in names]
            extra = [n for n in names if n not in COLUMNS]
            raise DatasetError(
                f"{path}: header does not match schema; missing={missing} extra={extra}; expected {','.join(COLUMNS)}"
            )
        return {name: i for i, name in enumerate(names)}
    positions: dict[str, int] = {}
    for i, name in enumerate(names):
        if i == 0 and name in _INDEX_COLUMNS:
            continue
        if name in COLUMNS and name not in positions:
            positions[name] = i
    required = ID_COLUMNS + FEATURE_NAMES
    missing = [c for c in required if c not in positions]
    if missing:
        raise DatasetError(f"{path}: missing columns {missing}")
    return positions


def save_csv(ds: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for i in range(len(ds)):
            writer.writerow(
                [ds.bidder_ids[i], ds.auction_ids[i]]
                + [repr(float(v)) for v in ds.X[i]]
                + [Label(int(ds.y[i])).to_text()]
            )


def split_labeled_unlabeled(ds: Dataset) -> tuple[Dataset, Dataset]:
    mask = ds.labeled_mask
    return ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask))


def class_ratio(ds: Dataset) -> float:
    """Normal-to-fraud count ratio (about 5:1 for the labeled shill-bidding subset)."""
    if ds.n_fraud == 0:
        raise DatasetError("class ratio undefined: dataset has no fraud instances")
    return ds.n_normal / ds.n_fraud


def minmax_scale(*datasets: Dataset) -> list[Dataset]:
    """Scale features to [0, 1] using ranges pooled over all given datasets."""
    stacked = np.vstack([ds.X for ds in datasets])
    if stacked.shape[0] == 0:
        return list(datasets)
    lo = stacked.min(axis=0)
    span = stacked.max(axis=0) - lo
    span[span == 0] = 1.0
    return [ds.with_features((ds.X - lo) / span) for ds in datasets]


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Repeated stratified k-fold assignment over a dataset's labeled rows.

    ``assignments[run, i]`` is the test fold of instance ``i`` in that run, or
    -1 when the instance is unlabeled and never folded.
    """

    k: int
    runs: int
    seed: int
    assignments: np.ndarray

    def __post_init__(self):
        a = np.array(self.assignments, dtype=np.int32, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    @property
    def n_instances(self) -> int:
        return self.assignments.shape[1]

    def test_indices(self, run: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments[run] == fold)

    def train_indices(self, run: int, fold: int) -> np.ndarray:
        row = self.assignments[run]
        return np.flatnonzero((row != fold) & (row >= 0))

    def cells(self) -> Iterator[tuple[int, int]]:
        for run in range(self.runs):
            for fold in range(self.k):
                yield run, fold

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.k}:{self.runs}:{self.seed}:{self.n_instances}:".encode())
        h.update(self.assignments.astype("<i4").tobytes())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FoldPlan):
            return NotImplemented
        return self.k == other.k and self.runs == other.runs and self.seed == other.seed and np.array_equal(
            self.assignments, other.assignments
        )

    __hash__ = None  # type: ignore[assignment]


def stratified_kfold(ds: Dataset, k: int = 10, runs: int = 1, seed: int = 0) -> FoldPlan:
    """Build a repeated stratified fold plan over the labeled instances of ``ds``.

    Each run shuffles every class independently, concatenates the classes and
    deals positions round-robin into folds. Dealing continues across the class
    boundary, so per-class fold counts are floor/ceil of ``n_class / k`` and
    fold sizes differ by at most one overall.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    members = [np.flatnonzero(ds.y == c) for c in (Label.NORMAL, Label.FRAUD)]
    for cls, idx in zip((Label.NORMAL, Label.FRAUD), members):
        if len(idx) < k:
            raise ValueError(f"class {cls.name.lower()} has {len(idx)} instances, fewer than k={k}")
    assignments = np.full((runs, len(ds)), -1, dtype=np.int32)
    for run in range(runs):
        rng = make_rng(child_seed(seed, run))
        order = np.concatenate([rng.permutation(idx) for idx in members])
        assignments[run, order] = np.arange(len(order)) % k
    return FoldPlan(k=k, runs=runs, seed=int(seed), assignments=assignments)
