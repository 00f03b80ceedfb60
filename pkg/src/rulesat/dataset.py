"""Tabular ingestion, feature binarization, train/test splits and partitions."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

CONSTANT = "constant"
BINARY = "binary"
CATEGORICAL = "categorical"
ORDINAL = "ordinal"
KINDS = (CONSTANT, BINARY, CATEGORICAL, ORDINAL)

MISSING = {"", "?", "na", "nan", "null"}
_TRUTHY = {"1", "1.0", "yes", "y", "true", "t"}
_FALSY = {"0", "0.0", "no", "n", "false", "f"}

# operator pairs; negating a literal swaps the members of a pair
NEGATED_OP = {"<=": ">", ">": "<=", "=": "!=", "!=": "=", "is": "is-not", "is-not": "is"}
DISPLAY_OP = {"<=": "≤", ">": ">", "=": "=", "!=": "≠"}


class DataError(ValueError):
    pass


def _as_number(cell) -> Optional[float]:
    if isinstance(cell, bool):
        return float(cell)
    if isinstance(cell, (int, float, np.integer, np.floating)):
        return float(cell)
    try:
        return float(str(cell).strip())
    except ValueError:
        return None


def _key(cell):
    """Identity of a cell value: numbers compare numerically."""
    x = _as_number(cell)
    return x if x is not None and not math.isnan(x) else str(cell).strip()


@dataclass
class RawTable:
    columns: List[str]
    rows: List[List[Any]]
    class_column: str
    positive: Any

    def __post_init__(self):
        if self.class_column not in self.columns:
            raise DataError(f"class column {self.class_column!r} not in {self.columns}")
        width = len(self.columns)
        for i, r in enumerate(self.rows):
            if len(r) != width:
                raise DataError(f"row {i} has {len(r)} cells, expected {width}")
            for j, cell in enumerate(r):
                if cell is None or (isinstance(cell, str) and cell.strip().lower() in MISSING) \
                        or (isinstance(cell, float) and math.isnan(cell)):
                    raise DataError(f"row {i}: missing value in column {self.columns[j]!r}")
        labels = {_key(r[self.class_index]) for r in self.rows}
        if self.rows and _key(self.positive) not in labels:
            raise DataError(f"positive class {self.positive!r} never occurs in "
                            f"{self.class_column!r}")

    @property
    def class_index(self) -> int:
        return self.columns.index(self.class_column)

    @property
    def feature_indices(self) -> List[int]:
        return [j for j in range(len(self.columns)) if j != self.class_index]

    def column(self, j: int, rows: Optional[Sequence[int]] = None) -> List[Any]:
        idx = range(len(self.rows)) if rows is None else rows
        return [self.rows[i][j] for i in idx]

    def labels(self) -> np.ndarray:
        pos = _key(self.positive)
        return np.array([_key(r[self.class_index]) == pos for r in self.rows], dtype=np.uint8)

    def take(self, rows: Sequence[int]) -> "RawTable":
        return RawTable(self.columns, [self.rows[i] for i in rows], self.class_column, self.positive)


def read_csv(path, class_column: Optional[str] = None, positive=None,
             drop: Sequence[str] = ()) -> RawTable:
    """CSV with a header row.  The class column defaults to the last column
    and the positive value to the lexicographically last label."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [[c.strip() for c in r] for r in reader if any(c.strip() for c in r)]
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i} has {len(r)} cells, expected {len(header)}")
    if drop:
        keep = [j for j, h in enumerate(header) if h not in set(drop)]
        header = [header[j] for j in keep]
        rows = [[r[j] for j in keep] for r in rows]
    class_column = class_column or header[-1]
    if class_column not in header:
        raise DataError(f"{path}: no column {class_column!r}")
    if positive is None:
        ci = header.index(class_column)
        positive = sorted({r[ci] for r in rows if len(r) > ci})[-1]
    return RawTable(header, rows, class_column, positive)


def classify_feature(column: Sequence[Any]) -> str:
    if not column:
        raise DataError("empty column")
    distinct = {_key(c) for c in column}
    if len(distinct) == 1:
        return CONSTANT
    if len(distinct) == 2:
        return BINARY
    if all(isinstance(v, float) for v in distinct):
        return ORDINAL
    return CATEGORICAL


@dataclass
class FeatureSpec:
    column: int
    name: str
    kind: str
    one_value: Any = None
    categories: List[Any] = field(default_factory=list)
    thresholds: List[float] = field(default_factory=list)
    boolean_like: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown feature kind {self.kind!r}")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise DataError(f"{self.name}: thresholds not strictly ascending")

    @property
    def width(self) -> int:
        if self.kind == BINARY:
            return 1
        if self.kind == CATEGORICAL:
            return len(self.categories)
        if self.kind == ORDINAL:
            return len(self.thresholds)
        return 0

    def to_json(self) -> dict:
        return {"column": self.column, "name": self.name, "kind": self.kind,
                "one_value": self.one_value, "categories": self.categories,
                "thresholds": self.thresholds, "boolean_like": self.boolean_like}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureSpec":
        return cls(**d)


@dataclass(frozen=True)
class ColumnInfo:
    """Provenance of one binary column: ``x^j`` reads ``name op value``."""

    spec: int
    name: str
    kind: str
    op: str
    value: Any

    def label(self, positive: bool = True) -> str:
        op = self.op if positive else NEGATED_OP[self.op]
        if op == "is":
            return self.name
        if op == "is-not":
            return f"Not {self.name}"
        return f"{self.name} {DISPLAY_OP[op]} {_fmt_value(self.value)}"


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(round(v, 6))
    return str(v)


def _plain(k):
    if isinstance(k, float) and k.is_integer():
        return int(k)
    return k


def _round_threshold(t: float) -> float:
    return float(f"{t:.10g}")


class Binarizer:
    """Feature specs fitted on a set of rows, applicable to any table with
    the same columns."""

    def __init__(self, specs: List[FeatureSpec], class_column: str, positive: Any,
                 columns: List[str]):
        self.specs = specs
        self.class_column = class_column
        self.positive = positive
        self.columns = columns

    @classmethod
    def fit(cls, raw: RawTable, q: int = 4, rows: Optional[Sequence[int]] = None,
            kinds: Optional[Dict[str, str]] = None) -> "Binarizer":
        if q < 2:
            raise DataError("quantile count must be >= 2")
        if not raw.rows or (rows is not None and len(rows) == 0):
            raise DataError("cannot binarize an empty table")
        kinds = dict(kinds or {})
        if raw.class_column in kinds:
            raise DataError(f"class column {raw.class_column!r} listed as a feature")
        specs = []
        for j in raw.feature_indices:
            name = raw.columns[j]
            col = raw.column(j, rows)
            kind = kinds.get(name) or classify_feature(col)
            specs.append(_fit_spec(j, name, kind, col, q))
        if sum(s.width for s in specs) == 0:
            raise DataError("no informative features after binarization")
        return cls(specs, raw.class_column, raw.positive, list(raw.columns))

    @property
    def column_info(self) -> List[ColumnInfo]:
        out = []
        for si, s in enumerate(self.specs):
            if s.kind == BINARY:
                out.append(ColumnInfo(si, s.name, s.kind, "is" if s.boolean_like else "=",
                                      s.one_value))
            elif s.kind == CATEGORICAL:
                out.extend(ColumnInfo(si, s.name, s.kind, "=", c) for c in s.categories)
            elif s.kind == ORDINAL:
                out.extend(ColumnInfo(si, s.name, s.kind, "<=", t) for t in s.thresholds)
        return out

    def transform(self, raw: RawTable) -> "BinaryDataset":
        if raw.columns != self.columns:
            raise DataError("table columns differ from the fitted columns")
        n = len(raw.rows)
        blocks = []
        for s in self.specs:
            if s.width == 0:
                continue
            col = raw.column(s.column)
            if s.kind == BINARY:
                one = _key(s.one_value)
                blocks.append(np.array([[_key(c) == one] for c in col], dtype=np.uint8))
            elif s.kind == CATEGORICAL:
                keys = [_key(c) for c in col]
                cats = [_key(c) for c in s.categories]
                blocks.append(np.array([[k == c for c in cats] for k in keys],
                                       dtype=np.uint8).reshape(n, len(cats)))
            else:
                vals = np.empty(n)
                for i, c in enumerate(col):
                    x = _as_number(c)
                    if x is None:
                        raise DataError(f"row {i}: non-numeric value {c!r} in ordinal "
                                        f"column {s.name!r}")
                    vals[i] = x
                t = np.asarray(s.thresholds)
                blocks.append((vals[:, None] <= t[None, :]).astype(np.uint8))
        X = np.hstack(blocks) if blocks else np.zeros((n, 0), dtype=np.uint8)
        return BinaryDataset(X, raw.labels(), self.column_info)

    def to_json(self) -> dict:
        return {"class_column": self.class_column, "positive": self.positive,
                "columns": self.columns, "features": [s.to_json() for s in self.specs]}

    @classmethod
    def from_json(cls, d: dict) -> "Binarizer":
        return cls([FeatureSpec.from_json(s) for s in d["features"]], d["class_column"],
                   d["positive"], d["columns"])


def _fit_spec(j: int, name: str, kind: str, col: List[Any], q: int) -> FeatureSpec:
    if kind == CONSTANT:
        return FeatureSpec(j, name, kind)
    if kind == BINARY:
        distinct = {}
        for c in col:
            distinct.setdefault(_key(c), c)
        keys = sorted(distinct, key=lambda k: (isinstance(k, str), k))
        if len(keys) > 2:
            raise DataError(f"{name}: binary override on a column with {len(keys)} values")
        if len(keys) == 1:
            return FeatureSpec(j, name, CONSTANT)
        lo, hi = keys
        norm = {str(distinct[lo]).lower(), str(distinct[hi]).lower()}
        boolean_like = bool(norm & _TRUTHY) and bool(norm & _FALSY)
        one = hi
        if boolean_like:
            one = next(k for k in keys if str(distinct[k]).lower() in _TRUTHY)
        return FeatureSpec(j, name, kind, one_value=_plain(one), boolean_like=boolean_like)
    if kind == CATEGORICAL:
        cats = sorted({_key(c) for c in col}, key=lambda k: (isinstance(k, str), k))
        return FeatureSpec(j, name, kind, categories=[_plain(c) for c in cats])
    if kind == ORDINAL:
        vals = []
        for c in col:
            x = _as_number(c)
            if x is None:
                raise DataError(f"{name}: non-numeric value {c!r} in ordinal column")
            vals.append(x)
        arr = np.asarray(vals, dtype=float)
        qs = np.quantile(arr, [i / q for i in range(1, q)])
        top = arr.max()
        ts = sorted({_round_threshold(t) for t in qs if t < top})
        return FeatureSpec(j, name, kind, thresholds=ts)
    raise DataError(f"unknown feature kind {kind!r}")


@dataclass
class BinaryDataset:
    X: np.ndarray
    y: np.ndarray
    columns: List[ColumnInfo]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.uint8)
        self.y = np.asarray(self.y, dtype=np.uint8)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise DataError(f"X is {self.X.shape}, y has {self.y.shape[0]} rows")
        if self.X.shape[1] != len(self.columns):
            raise DataError("one ColumnInfo per binary column required")
        if self.X.size and self.X.max() > 1 or self.y.size and self.y.max() > 1:
            raise DataError("X and y must be 0/1")

    @classmethod
    def from_arrays(cls, X, y, names: Optional[Sequence[str]] = None) -> "BinaryDataset":
        X = np.asarray(X, dtype=np.uint8)
        m = X.shape[1]
        names = names or [f"x{j + 1}" for j in range(m)]
        cols = [ColumnInfo(j, nm, BINARY, "is", 1) for j, nm in enumerate(names)]
        return cls(X, y, cols)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def take(self, rows: Sequence[int]) -> "BinaryDataset":
        rows = np.asarray(rows, dtype=int)
        return BinaryDataset(self.X[rows], self.y[rows], self.columns)

    def dump(self, csv_path, labels_path) -> None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"b{j + 1}" for j in range(self.m)] + ["class"])
            for row, label in zip(self.X.tolist(), self.y.tolist()):
                w.writerow(row + [label])
        with open(labels_path, "w") as fh:
            json.dump([{"column": f"b{j + 1}", "source": c.name, "kind": c.kind, "op": c.op,
                        "value": c.value, "label": c.label(True), "neg_label": c.label(False)}
                       for j, c in enumerate(self.columns)], fh, indent=1, ensure_ascii=False)


def binarize(raw: RawTable, q: int = 4, kinds: Optional[Dict[str, str]] = None) -> BinaryDataset:
    return Binarizer.fit(raw, q, kinds=kinds).transform(raw)


def split_indices(n: int, ratio: float, seed) -> Tuple[np.ndarray, np.ndarray]:
    if n == 0:
        raise DataError("cannot split an empty dataset")
    if not 0 < ratio <= 1:
        raise DataError(f"split ratio must be in (0, 1], got {ratio}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(ratio * n + 0.5))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_train_test(ds: BinaryDataset, ratio: float = 0.8, seed=0):
    tr, te = split_indices(ds.n, ratio, seed)
    return ds.take(tr), ds.take(te)


@dataclass(frozen=True)
class PartitionPlan:
    parts: Tuple[Tuple[int, ...], ...]
    seed: Any

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)


def make_partitions(train: BinaryDataset, lp: int, seed=0) -> PartitionPlan:
    """Class-balanced partitions of about ``lp`` rows.

    Each class is shuffled and dealt round-robin; dealing continues where the
    previous class stopped so partition sizes never exceed ``lp``.
    """
    if lp < 1:
        raise DataError("samples per partition must be >= 1")
    n = train.n
    if n == 0:
        raise DataError("cannot partition an empty training set")
    p = math.ceil(n / lp)
    rng = np.random.default_rng(seed)
    parts: List[List[int]] = [[] for _ in range(p)]
    slot = 0
    for cls in (0, 1):
        idx = np.flatnonzero(train.y == cls)
        for i in rng.permutation(idx):
            parts[slot].append(int(i))
            slot = (slot + 1) % p
    return PartitionPlan(tuple(tuple(sorted(pt)) for pt in parts), seed)
