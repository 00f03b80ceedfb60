from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import imli_oracle, random_tiny_dataset
from rulesat.dataset import BinaryDataset
from rulesat.maxsat import HARD_UNSAT, brute_force, solve
from rulesat.proplogic import FALSE, Lit, Or
from rulesat.imli import (ImliParams, ImliState, amp_disjunction, concat_with_negation,
                          decode_cnf_rules, encode_partition, state_from, train_imli)
from rulesat.rules import CNF, DNF, format_ruleset, negate, predict


def test_concat_examples():
    assert concat_with_negation([1, 0, 0]) == [1, 0, 0, 0, 1, 1]
    assert concat_with_negation([0, 0]) == [0, 0, 1, 1]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
def test_concat_popcount(row):
    c = concat_with_negation(row)
    assert len(c) == 2 * len(row) and sum(c) == len(row)


def test_amp_examples():
    b = [1, 2, 3, 4, 5, 6]
    assert amp_disjunction([1, 0, 0, 0, 1, 1], b) == Or(Lit(1), Lit(5), Lit(6))
    assert amp_disjunction([0] * 6, b) is FALSE
    assert amp_disjunction([1] * 6, b) == Or(*[Lit(v) for v in b])
    with pytest.raises(ValueError):
        amp_disjunction([1, 0], b)


def test_params_validation():
    with pytest.raises(ValueError):
        ImliParams(k=0)
    with pytest.raises(ValueError):
        ImliParams(lam=2.5)
    with pytest.raises(ValueError):
        ImliParams(form="XNF")


def test_soft_counts_and_prior_polarity(example1):
    X, y = example1
    n, m = X.shape
    k = 2
    inst, vm = encode_partition(X, y, ImliParams(k=k, lam=10))
    assert len(inst.soft) == n + 2 * m * k
    assert all(w == 10 for w, c in inst.soft[:n])
    assert {c for w, c in inst.soft[n:]} == {(-v,) for row in vm.b for v in row}
    prior = ImliState([[v == 0 for v in range(2 * m)] for _ in range(k)])
    inst2, vm2 = encode_partition(X, y, ImliParams(k=k, lam=10), prior)
    assert (1, (vm2.b[0][0],)) in inst2.soft
    assert (1, (-vm2.b[0][1],)) in inst2.soft


def test_false_conjunct_forces_eta():
    # y=1 sample; with every b of the rule false the body is false, so eta must be true
    X = np.array([[1, 0]])
    inst, vm = encode_partition(X, [1], ImliParams(k=1, lam=3))
    for v in vm.b[0]:
        inst.add_hard([-v])
    inst.add_hard([-vm.eta[0]])
    assert brute_force(inst).status == HARD_UNSAT


def test_example1_k1_matches_oracle(example1):
    X, y = example1
    for lam in (1, 5, 10):
        inst, _ = encode_partition(X, y, ImliParams(k=1, lam=lam))
        assert solve(inst).cost == imli_oracle(X, y, 1, lam)
        assert brute_force(inst).cost == imli_oracle(X, y, 1, lam)


def test_encoding_objective_random():
    rng = random.Random(77)
    for _ in range(40):
        X, y = random_tiny_dataset(rng)
        k = rng.randint(1, 2)
        lam = rng.choice((5, 10))
        prior = None
        if rng.random() < 0.5:
            prior = ImliState([[rng.random() < 0.3 for _ in range(2 * X.shape[1])]
                               for _ in range(k)])
        inst, vm = encode_partition(X, y, ImliParams(k=k, lam=lam), prior)
        res = solve(inst)
        assert res.cost == imli_oracle(X, y, k, lam, None if prior is None else prior.b)
        # eta consistency: eta false means the decoded clauses classify the sample
        cnf = decode_cnf_rules(res.assignment, vm, BinaryDataset.from_arrays(X, y).columns)
        pred = predict(cnf, X)
        for i, e in enumerate(vm.eta):
            if not res.assignment[e]:
                assert pred[i] == y[i]


def test_decode_examples():
    X = np.zeros((1, 3), dtype=int)
    inst, vm = encode_partition(X, [0], ImliParams(k=2))
    cols = BinaryDataset.from_arrays(X, [0]).columns
    a = [False] * (inst.nvars + 1)
    a[vm.b[0][0]] = a[vm.b[0][4]] = True
    rs = decode_cnf_rules(a, vm, cols)
    assert rs.form == CNF and format_ruleset(rs) == "(x1 or Not x2) and (false)"
    assert rs.sizes == [2, 0]
    rs = decode_cnf_rules([False] * (inst.nvars + 1), vm, cols)
    assert rs.sizes == [0, 0]


@given(st.integers(0, 10 ** 9))
@settings(max_examples=40)
def test_dnf_trick(seed):
    rng = random.Random(seed)
    m, k = rng.randint(1, 4), rng.randint(1, 3)
    X = np.array(list(itertools.product((0, 1), repeat=m)))
    inst, vm = encode_partition(X, [0] * len(X), ImliParams(k=k))
    a = [rng.random() < 0.3 for _ in range(inst.nvars + 1)]
    cnf = decode_cnf_rules(a, vm, BinaryDataset.from_arrays(X, [0] * len(X)).columns)
    d = negate(cnf)
    assert d.form == DNF
    assert (predict(d, X) == 1 - predict(cnf, X)).all()


def separable_toy():
    X = np.array(list(itertools.product((0, 1), repeat=3)))
    y = np.array([int(r[0] or (r[1] and not r[2])) for r in X])
    return BinaryDataset.from_arrays(X, y)


def test_train_imli_separable():
    ds = separable_toy()
    rs = train_imli(ds, ImliParams(k=2, lam=10 ** 6, lp=8))
    assert rs.form == DNF and rs.meta["partitions"] == 1
    assert (predict(rs, ds.X) == ds.y).all()
    assert rs.meta["train_seconds"] >= 0


def test_train_imli_cnf_form():
    ds = separable_toy()
    rs = train_imli(ds, ImliParams(k=2, lam=10 ** 6, lp=8, form=CNF))
    assert rs.form == CNF and (predict(rs, ds.X) == ds.y).all()


def test_train_imli_deterministic():
    rng = np.random.default_rng(4)
    X = rng.integers(0, 2, (40, 5))
    y = (X[:, 0] & X[:, 1]) | X[:, 4]
    ds = BinaryDataset.from_arrays(X, y)
    p = ImliParams(k=2, lam=5, lp=8, seed=11)
    a, b = train_imli(ds, p), train_imli(ds, p)
    assert format_ruleset(a) == format_ruleset(b)
    assert a.meta["partitions"] == 5


def test_state_from_round_trip(example1):
    X, y = example1
    inst, vm = encode_partition(X, y, ImliParams(k=2))
    res = solve(inst)
    st_ = state_from(res.assignment, vm, 1)
    assert st_.partition == 1
    assert st_.b == [[res.assignment[v] for v in row] for row in vm.b]
