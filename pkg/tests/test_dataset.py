from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulesat.dataset import (BINARY, CATEGORICAL, CONSTANT, ORDINAL, Binarizer, BinaryDataset,
                             DataError, RawTable, binarize, classify_feature, make_partitions,
                             read_csv, split_indices, split_train_test)


def table(cols, rows, cls="y", pos=1):
    return RawTable(cols, rows, cls, pos)


# ---------------------------------------------------------------- ingestion


def test_read_csv(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b,label\n1,x,yes\n2,y,no\n3,x,yes\n")
    raw = read_csv(p)
    assert raw.class_column == "label" and raw.positive == "yes"
    assert raw.labels().tolist() == [1, 0, 1]
    raw = read_csv(p, positive="no", drop=("b",))
    assert raw.columns == ["a", "label"] and raw.labels().tolist() == [0, 1, 0]
    with pytest.raises(DataError):
        read_csv(p, class_column="missing")


def test_missing_cell_rejected(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,label\n1,1\n?,0\n")
    with pytest.raises(DataError, match="row 1"):
        read_csv(p)


def test_positive_must_occur():
    with pytest.raises(DataError):
        table(["a", "y"], [[1, 0], [2, 0]], pos=1)


def test_classify_examples():
    assert classify_feature([5, 5, 5]) == CONSTANT
    assert classify_feature(["a", "b", "a"]) == BINARY
    assert classify_feature([0.5, 3, 7]) == ORDINAL
    assert classify_feature(["red", "green", "blue"]) == CATEGORICAL
    # two-valued numeric columns are binary
    assert classify_feature([1.5, 2.5, 1.5]) == BINARY


# ---------------------------------------------------------------- binarize


def test_constant_dropped():
    raw = table(["c", "a", "y"], [[7, 0, 0], [7, 1, 1]])
    ds = binarize(raw)
    assert ds.m == 1 and ds.columns[0].name == "a"


def test_ordinal_median():
    raw = table(["v", "y"], [[1, 0], [2, 0], [3, 1], [4, 1]])
    ds = binarize(raw, q=2)
    assert ds.m == 1
    assert ds.columns[0].label() == "v ≤ 2.5"
    assert ds.columns[0].label(False) == "v > 2.5"
    assert ds.X[:, 0].tolist() == [1, 1, 0, 0]


def test_one_hot():
    raw = table(["c", "y"], [["red", 0], ["green", 1], ["blue", 0], ["red", 1]])
    ds = binarize(raw)
    assert ds.m == 3
    assert ds.X.sum(axis=1).tolist() == [1, 1, 1, 1]
    labels = {c.label() for c in ds.columns}
    assert labels == {"c = red", "c = green", "c = blue"}


def test_boolean_binary_labels():
    raw = table(["Hike", "y"], [["yes", 0], ["no", 1]])
    ds = binarize(raw)
    assert ds.X[:, 0].tolist() == [1, 0]
    assert ds.columns[0].label() == "Hike" and ds.columns[0].label(False) == "Not Hike"


def test_kind_override_and_errors():
    raw = table(["v", "y"], [[1, 0], [2, 0], [3, 1]])
    ds = binarize(raw, kinds={"v": CATEGORICAL})
    assert ds.m == 3
    with pytest.raises(DataError):
        binarize(raw, q=1)
    with pytest.raises(DataError):
        binarize(raw, kinds={"y": ORDINAL})
    with pytest.raises(DataError):
        binarize(table(["c", "y"], [[1, 0], [1, 1]]))


def test_fit_on_train_rows_only():
    raw = table(["v", "y"], [[1, 0], [2, 0], [3, 1], [100, 1]])
    binz = Binarizer.fit(raw, q=2, rows=[0, 1, 2])
    assert binz.specs[0].thresholds == [2.0]
    ds = binz.transform(raw)
    assert ds.X[:, 0].tolist() == [1, 1, 0, 0]


def test_binarizer_json_round_trip(tmp_path):
    raw = table(["v", "c", "y"], [[1.5, "a", 0], [2.5, "b", 1], [9.0, "c", 1]])
    binz = Binarizer.fit(raw, q=4)
    d = json.loads(json.dumps(binz.to_json()))
    again = Binarizer.from_json(d).transform(raw)
    assert np.array_equal(again.X, binz.transform(raw).X)
    again.dump(tmp_path / "x.csv", tmp_path / "x.json")
    assert (tmp_path / "x.csv").read_text().splitlines()[0].endswith(",class")


raw_tables = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-50, 50, allow_nan=False).map(lambda x: round(x, 1)),
             min_size=n, max_size=n),
    st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.integers(2, 6)))


@given(raw_tables)
@settings(max_examples=80)
def test_binarize_read_back(data):
    vals, cats, labels, q = data
    labels[0] = 1
    raw = table(["v", "c", "y"], [[v, c, l] for v, c, l in zip(vals, cats, labels)])
    if len(set(vals)) == 1 and len(set(cats)) == 1:
        with pytest.raises(DataError):
            binarize(raw, q=q)
        return
    ds = binarize(raw, q=q)
    for j, info in enumerate(ds.columns):
        if info.kind == ORDINAL:
            assert ds.X[:, j].tolist() == [int(v <= info.value) for v in vals]
    # one-hot block of c sums to 1 on every row (when c is categorical)
    cat_cols = [j for j, info in enumerate(ds.columns) if info.kind == CATEGORICAL]
    if cat_cols:
        assert (ds.X[:, cat_cols].sum(axis=1) == 1).all()
    # no constant binary columns from ordinal thresholds
    for j, info in enumerate(ds.columns):
        if info.kind == ORDINAL:
            assert 0 < ds.X[:, j].sum() < ds.n


def test_dataset_validation():
    with pytest.raises(DataError):
        BinaryDataset.from_arrays([[2]], [0])
    with pytest.raises(DataError):
        BinaryDataset.from_arrays([[1], [0]], [0])


# ---------------------------------------------------------------- splits


def test_split_examples():
    tr, te = split_indices(150, 0.8, seed=3)
    assert len(tr) == 120 and len(te) == 30
    tr, te = split_indices(10, 1.0, seed=3)
    assert len(tr) == 10 and len(te) == 0
    a = split_indices(57, 0.8, seed=9)
    b = split_indices(57, 0.8, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(DataError):
        split_indices(0, 0.8, 0)
    with pytest.raises(DataError):
        split_indices(5, 0.0, 0)


@given(st.integers(1, 500), st.floats(0.05, 1.0), st.integers(0, 10 ** 6))
def test_split_is_partition(n, ratio, seed):
    tr, te = split_indices(n, ratio, seed)
    assert len(tr) == int(np.floor(ratio * n + 0.5))
    assert set(tr.tolist()) | set(te.tolist()) == set(range(n))
    assert not set(tr.tolist()) & set(te.tolist())


def test_split_train_test_dataset():
    ds = BinaryDataset.from_arrays(np.eye(5, dtype=int), [0, 1, 0, 1, 1])
    train, test = split_train_test(ds, 0.6, seed=1)
    assert train.n == 3 and test.n == 2


# ---------------------------------------------------------------- partitions


def labelled(y):
    y = np.asarray(y)
    return BinaryDataset.from_arrays(np.zeros((len(y), 1), dtype=int), y)


def counts(plan, ds):
    return ([int((ds.y[list(p)] == 0).sum()) for p in plan],
            [int((ds.y[list(p)] == 1).sum()) for p in plan])


def test_partition_examples():
    ds = labelled([1, 1, 0, 0])
    plan = make_partitions(ds, 2, seed=0)
    assert len(plan) == 2
    assert counts(plan, ds) == ([1, 1], [1, 1])
    plan = make_partitions(ds, 10, seed=0)
    assert len(plan) == 1 and plan.parts[0] == (0, 1, 2, 3)
    ds = labelled([0] * 6 + [1] * 4)
    plan = make_partitions(ds, 4, seed=5)
    assert len(plan) == 3
    assert counts(plan, ds) == ([2, 2, 2], [2, 1, 1])
    with pytest.raises(DataError):
        make_partitions(ds, 0)
    with pytest.raises(DataError):
        make_partitions(labelled([]), 2)


@given(st.integers(1, 3000), st.integers(1, 400), st.integers(0, 10 ** 6),
       st.floats(0, 1))
@settings(max_examples=60)
def test_partition_invariants(n, lp, seed, frac):
    lp = min(lp, n)
    rng = np.random.default_rng(seed)
    ds = labelled((rng.random(n) < frac).astype(int))
    plan = make_partitions(ds, lp, seed)
    assert len(plan) == -(-n // lp)
    flat = [i for p in plan for i in p]
    assert sorted(flat) == list(range(n))
    assert all(len(p) <= lp for p in plan)
    neg, pos = counts(plan, ds)
    assert max(neg) - min(neg) <= 1 and max(pos) - min(pos) <= 1


def test_partition_large_n():
    n = 10 ** 4
    ds = labelled(np.arange(n) % 3 == 0)
    plan = make_partitions(ds, 16, seed=1)
    neg, pos = counts(plan, ds)
    assert len(plan) == 625 and max(neg) - min(neg) <= 1 and max(pos) - min(pos) <= 1
    assert make_partitions(ds, 16, seed=1) == plan
