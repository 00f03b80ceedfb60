from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dpll
from rulesat.proplogic import (FALSE, TRUE, And, Iff, Implies, Lit, Not, Or, VarAllocator,
                               WcnfInstance, define, eval_formula, exactly_one,
                               normalize_clause, tseitin, variables, weighted_counter)


def satisfied(clauses, assignment):
    return all(any(assignment[abs(l)] == (l > 0) for l in c) for c in clauses)


def models_of_clauses(clauses, nvars):
    out = []
    for bits in itertools.product((False, True), repeat=nvars):
        a = dict(enumerate(bits, 1))
        if satisfied(clauses, a):
            out.append(bits)
    return out


# ---------------------------------------------------------------- allocator


def test_allocator_dense_and_named():
    a = VarAllocator()
    assert [a.new(), a.new("x"), a.new()] == [1, 2, 3]
    assert a.names == {"x": 2}
    assert list(a.block(3)) == [4, 5, 6]
    with pytest.raises(ValueError):
        a.new("x")


# ---------------------------------------------------------------- clauses


def test_normalize_drops_duplicates_and_tautologies():
    assert normalize_clause([1, 2, 1, -3]) == (1, 2, -3)
    assert normalize_clause([1, -1, 2]) is None
    with pytest.raises(ValueError):
        normalize_clause([0])


@given(st.lists(st.integers(-6, 6).filter(bool), max_size=10))
def test_normalize_idempotent(lits):
    c = normalize_clause(lits)
    if c is not None:
        assert normalize_clause(c) == c


def test_wcnf_instance_checks():
    inst = WcnfInstance(nvars=2)
    inst.add_hard([1, -1])          # tautology removed
    assert inst.hard == []
    with pytest.raises(ValueError):
        inst.add_soft([1], 0)
    inst.add_soft([3], 1)
    with pytest.raises(ValueError):
        inst.validate()


def test_exactly_one_examples():
    assert len(exactly_one([1, 2])) == 2
    assert len(exactly_one([1, 2, 3, 4])) == 7
    assert len(models_of_clauses(exactly_one([1, 2, 3]), 3)) == 3
    with pytest.raises(ValueError):
        exactly_one([1, -1])
    with pytest.raises(ValueError):
        exactly_one([])


@pytest.mark.parametrize("n", range(1, 51))
def test_exactly_one_count(n):
    assert len(exactly_one(list(range(1, n + 1)))) == 1 + n * (n - 1) // 2


@given(st.lists(st.integers(1, 5), min_size=1, max_size=5), st.integers(0, 8))
@settings(max_examples=60)
def test_weighted_counter_outputs(weights, bound):
    """out[j-1] may be false only when the weighted sum is below j, and can
    always be false in that case (exhaustive over inputs and auxiliaries)."""
    n = len(weights)
    alloc = VarAllocator(n)
    clauses, out = weighted_counter(list(range(1, n + 1)), weights, bound, alloc)
    for bits in itertools.product((False, True), repeat=n):
        total = sum(w for w, b in zip(weights, bits) if b)
        fixed = [v if b else -v for v, b in enumerate(bits, 1)]
        for c in range(1, bound + 2):
            ok = dpll(clauses, fixed + [-out[c - 1]])
            assert ok == (total < c), (weights, bits, c)


# ---------------------------------------------------------------- formulas


def test_eval_examples():
    assert eval_formula(And(), {}) is True
    assert eval_formula(Or(), {}) is False
    # x1 or (x2 and not x3) on [0, 0, 1]
    f = Or(Lit(1), And(Lit(2), Not(Lit(3))))
    assert eval_formula(f, {1: False, 2: False, 3: True}) is False
    with pytest.raises(KeyError):
        eval_formula(Lit(1), {})


def test_tseitin_examples():
    alloc = VarAllocator(1)
    assert tseitin(Lit(1), alloc) == ([], 1)
    alloc = VarAllocator(3)
    clauses, root = tseitin(Iff(Lit(1), And(Lit(2), Lit(3))), alloc)
    assert root is None and alloc.top == 3
    assert set(clauses) == {(-1, 2), (-1, 3), (1, -2, -3)}
    alloc = VarAllocator(2)
    clauses, root = tseitin(Implies(Lit(1), Lit(2)), alloc)
    assert root is None and clauses == [(-1, 2)] and alloc.top == 2


def test_tseitin_constants():
    alloc = VarAllocator()
    assert tseitin(TRUE, alloc)[0] == []
    assert tseitin(FALSE, alloc)[0] == [()]


VARS = 4


def formulas():
    leaves = st.builds(Lit, st.integers(1, VARS).flatmap(lambda v: st.sampled_from((v, -v)))) \
        | st.sampled_from((TRUE, FALSE))

    def extend(children):
        return (st.builds(Not, children)
                | st.lists(children, min_size=1, max_size=3).map(lambda cs: And(*cs))
                | st.lists(children, min_size=1, max_size=3).map(lambda cs: Or(*cs))
                | st.builds(Implies, children, children)
                | st.builds(Iff, children, children))
    return st.recursive(leaves, extend, max_leaves=7)


def depth(f):
    if isinstance(f, (Lit, type(TRUE))):
        return 0
    if isinstance(f, Not):
        return 1 + depth(f.child)
    if isinstance(f, (And, Or)):
        return 1 + max((depth(c) for c in f.children), default=0)
    return 1 + max(depth(f.left), depth(f.right))


def projected_models(clauses, root, top):
    """Assignments over 1..VARS extendable to a model of the clauses."""
    if root is not None:
        clauses = clauses + [(root,)]
    out = set()
    for bits in itertools.product((False, True), repeat=VARS):
        if dpll(clauses, [v if b else -v for v, b in enumerate(bits, 1)]):
            out.add(bits)
    return out


def true_models(f):
    return {bits for bits in itertools.product((False, True), repeat=VARS)
            if eval_formula(f, dict(enumerate(bits, 1)))}


@given(formulas())
@settings(max_examples=150, deadline=None)
def test_tseitin_projection(f):
    if depth(f) > 4:
        return
    alloc = VarAllocator(VARS)
    clauses, root = tseitin(f, alloc)
    assert projected_models(clauses, root, alloc.top) == true_models(f)


@given(formulas())
@settings(max_examples=100, deadline=None)
def test_define_is_equivalence(f):
    if depth(f) > 4:
        return
    alloc = VarAllocator(VARS)
    clauses, t = define(f, alloc)
    assert projected_models(clauses, t, alloc.top) == true_models(f)
    assert projected_models(clauses, -t, alloc.top) == \
        set(itertools.product((False, True), repeat=VARS)) - true_models(f)


def test_add_formula_asserts():
    alloc = VarAllocator(2)
    inst = WcnfInstance()
    inst.add_formula(Lit(2), alloc)
    inst.add_formula(Or(Lit(1), And(Lit(2), Lit(-1))), alloc)
    assert (2,) in inst.hard
    assert inst.nvars >= 2
    assert variables(Or(Lit(1), Lit(-2))) == {1, 2}
