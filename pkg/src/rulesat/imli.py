"""IMLI: incremental MaxSAT learning of CNF rules (DNF through negation).

Per partition the instance has soft units ``-eta_i`` (weight lambda), soft
units on every rule-literal selector ``b[o][v]`` (weight 1; all negative on
the first partition, matching the previous solution afterwards) and the
hard constraint

    -eta_i -> (y_i <-> AND_o ((X_i ++ not X_i) @ L_o))

where ``@`` keeps the selectors at the 1-positions of the sample and ORs
them.  Selector ``b[o][v]`` puts ``x^v`` (v < m) or ``not x^(v-m)`` into
clause ``o``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dataset import BinaryDataset, make_partitions
from .maxsat import BackendConfig, SolverError, solve
from .proplogic import (FALSE, TRUE, And, Formula, Iff, Implies, Lit, Not, Or, VarAllocator,
                        WcnfInstance)
from .rules import CNF, DNF, RuleSet, literals_for, negate, reduce_redundancy


@dataclass
class ImliParams:
    k: int = 2
    lam: int = 10
    lp: int = 16
    q: int = 4
    seed: int = 0
    form: str = DNF

    def __post_init__(self):
        if self.k < 1 or self.lam < 1 or self.lp < 1:
            raise ValueError("k, lambda and lp must all be >= 1")
        if int(self.lam) != self.lam:
            raise ValueError("lambda must be an integer weight")
        if self.form not in (DNF, CNF):
            raise ValueError(f"unknown target form {self.form!r}")


@dataclass
class ImliVarMap:
    k: int
    m: int
    b: List[List[int]]             # b[o][v], v in 0..2m-1
    eta: List[int] = field(default_factory=list)


@dataclass
class ImliState:
    b: List[List[bool]]
    partition: int = 0


def concat_with_negation(sample: Sequence[int]) -> List[int]:
    s = [int(v) for v in sample]
    return s + [1 - v for v in s]


def amp_disjunction(concat: Sequence[int], selectors: Sequence[int]) -> Formula:
    if len(concat) != len(selectors):
        raise ValueError(f"length mismatch: {len(concat)} bits vs {len(selectors)} selectors")
    lits = [Lit(b) for bit, b in zip(concat, selectors) if bit]
    if not lits:
        return FALSE
    if len(lits) == 1:
        return lits[0]
    return Or(*lits)


def _selector_vars(k: int, m: int) -> List[List[int]]:
    return [[1 + o * 2 * m + v for v in range(2 * m)] for o in range(k)]


def encode_partition(X: np.ndarray, y: np.ndarray, params: ImliParams,
                     prior: Optional[ImliState] = None):
    """Weighted CNF for one partition; returns ``(instance, varmap)``."""
    X = np.asarray(X)
    n, m = X.shape
    if n == 0:
        raise ValueError("empty partition")
    k, lam = params.k, int(params.lam)
    alloc = VarAllocator()
    b = [[alloc.new(("b", o, v)) for v in range(2 * m)] for o in range(k)]
    eta = [alloc.new(("eta", i)) for i in range(n)]
    inst = WcnfInstance()
    for i in range(n):
        inst.add_soft((-eta[i],), lam)
    for o in range(k):
        for v in range(2 * m):
            keep = prior is not None and prior.b[o][v]
            inst.add_soft((b[o][v],) if keep else (-b[o][v],), 1)
    for i in range(n):
        concat = concat_with_negation(X[i])
        body = And(*[amp_disjunction(concat, b[o]) for o in range(k)])
        target = TRUE if y[i] else FALSE
        inst.add_formula(Implies(Not(Lit(eta[i])), Iff(target, body)), alloc)
    inst.nvars = alloc.top
    inst.names = alloc.names
    return inst, ImliVarMap(k, m, b, eta)


def state_from(assignment: Sequence[bool], vm: ImliVarMap, partition: int = 0) -> ImliState:
    return ImliState([[bool(assignment[v]) for v in row] for row in vm.b], partition)


def decode_cnf_rules(assignment: Sequence[bool], vm: ImliVarMap, columns) -> RuleSet:
    lit = literals_for(columns)
    m = vm.m
    rules = []
    for o in range(vm.k):
        clause = []
        for v, var in enumerate(vm.b[o]):
            if assignment[var]:
                clause.append(lit(v, True) if v < m else lit(v - m, False))
        rules.append(tuple(clause))
    return RuleSet(CNF, rules)


def train_imli(ds: BinaryDataset, params: ImliParams,
               backend: Optional[BackendConfig] = None) -> RuleSet:
    """Incremental training over class-balanced partitions of ``ds``."""
    backend = backend or BackendConfig(seed=params.seed)
    target = 1 - ds.y if params.form == DNF else ds.y
    plan = make_partitions(ds, params.lp, params.seed)
    t0 = time.perf_counter()
    prior = None
    vm = None
    assignment = None
    cost = 0
    for t, part in enumerate(plan):
        rows = list(part)
        inst, vm = encode_partition(ds.X[rows], target[rows], params, prior)
        res = solve(inst, backend)
        if not res.optimal:
            raise SolverError("IMLI encoding reported hard-unsat (internal error)")
        assignment = res.assignment
        cost = res.cost
        prior = state_from(assignment, vm, t + 1)
    rs = decode_cnf_rules(assignment, vm, ds.columns)
    if params.form == DNF:
        rs = negate(rs)
    rs = reduce_redundancy(rs)
    seconds = time.perf_counter() - t0
    rs.meta.update({"learner": "imli", "k": params.k, "lambda": int(params.lam),
                    "lp": params.lp, "q": params.q, "seed": params.seed,
                    "partitions": len(plan), "last_cost": cost, "train_seconds": seconds})
    return rs
