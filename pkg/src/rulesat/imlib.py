"""IMLIB: incremental MaxSAT learning of DNF rules with at most ``l``
literals per rule, plus the all-hard exact variant (a single SAT query).

Rule ``o`` has ``l`` slots.  Slot ``(o, d)`` selects exactly one of the
``m`` binary columns or the skip marker via ``u[o][d][j]`` (``j == m`` is the
skip marker) and its sign via ``p[o][d]``.  ``e[o][d][i]`` holds when the
slot's literal is true on sample ``i`` (or the slot is skipped) and
``z[o][i] <-> AND_d e[o][d][i]`` is "rule o fires on sample i".
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dataset import BinaryDataset, make_partitions
from .maxsat import BackendConfig, SolverError, solve, solve_sat
from .proplogic import And, Iff, Lit, VarAllocator, WcnfInstance
from .rules import DNF, RuleSet, literals_for, reduce_redundancy


@dataclass
class ImlibParams:
    k: int = 2
    l: int = 2
    lam: int = 10
    lp: int = 16
    q: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.l < 1 or self.lam < 1 or self.lp < 1:
            raise ValueError("k, l, lambda and lp must all be >= 1")
        if int(self.lam) != self.lam:
            raise ValueError("lambda must be an integer weight")


@dataclass
class ImlibVarMap:
    k: int
    l: int
    m: int
    u: List[List[List[int]]]       # u[o][d][j], j == m is the skip marker
    p: List[List[int]]
    e: List[List[List[int]]] = field(default_factory=list)   # e[o][d][i]
    z: List[List[int]] = field(default_factory=list)         # z[o][i]


@dataclass
class ImlibState:
    u: List[List[List[bool]]]
    p: List[List[bool]]
    partition: int = 0


def substitute_s(bit: int, e_lit: int) -> int:
    return e_lit if bit else -e_lit


def _layout(k: int, l: int, m: int):
    u = [[[1 + (o * l + d) * (m + 1) + j for j in range(m + 1)] for d in range(l)]
         for o in range(k)]
    base = k * l * (m + 1)
    p = [[base + 1 + o * l + d for d in range(l)] for o in range(k)]
    return u, p, base + k * l


@lru_cache(maxsize=8)
def _static_clauses(k: int, l: int, m: int) -> Tuple[Tuple[int, ...], ...]:
    """Slot exactly-one (at-least-one + pairwise at-most-one) and the
    non-empty-rule clauses; identical for every partition."""
    u, _, _ = _layout(k, l, m)
    out = []
    for o in range(k):
        for d in range(l):
            slot = u[o][d]
            out.append(tuple(slot))
            out.extend((-a, -b) for a, b in combinations(slot, 2))
    for o in range(k):
        out.append(tuple(-u[o][d][m] for d in range(l)))
    return tuple(out)


def encode_partition(X: np.ndarray, y: np.ndarray, params: ImlibParams,
                     prior: Optional[ImlibState] = None, exact: bool = False):
    """Weighted CNF for one partition; ``exact`` makes every constraint
    hard and drops the size objective.  Returns ``(instance, varmap)``."""
    X = np.asarray(X, dtype=np.uint8)
    n, m = X.shape
    if n == 0:
        raise ValueError("empty partition")
    k, l, lam = params.k, params.l, int(params.lam)
    u, p, top = _layout(k, l, m)
    alloc = VarAllocator(top)
    e = [[list(alloc.block(n)) for d in range(l)] for o in range(k)]
    z = [list(alloc.block(n)) for o in range(k)]
    inst = WcnfInstance()
    hard = inst.hard
    hard.extend(_static_clauses(k, l, m))

    rows = X.tolist()
    for o in range(k):
        for d in range(l):
            pv = p[o][d]
            ev = e[o][d]
            uo = u[o][d]
            for j in range(m):
                nu = -uo[j]
                for i in range(n):
                    s = substitute_s(rows[i][j], ev[i])
                    # u -> (p <-> s)
                    hard.append((nu, -pv, s))
                    hard.append((nu, pv, -s))
            skip = -uo[m]
            hard.extend((skip, ev[i]) for i in range(n))
    for o in range(k):
        for i in range(n):
            inst.add_formula(Iff(Lit(z[o][i]), And(*[Lit(e[o][d][i]) for d in range(l)])), alloc)

    if not exact:
        for o in range(k):
            for d in range(l):
                for j in range(m + 1):
                    var = u[o][d][j]
                    if prior is None:
                        inst.soft.append((1, (var,) if j == m else (-var,)))
                    else:
                        inst.soft.append((1, (var,) if prior.u[o][d][j] else (-var,)))
    for i in range(n):
        if y[i]:
            c = tuple(z[o][i] for o in range(k))
            if exact:
                hard.append(c)
            else:
                inst.soft.append((lam, c))
        else:
            for o in range(k):
                if exact:
                    hard.append((-z[o][i],))
                else:
                    inst.soft.append((lam, (-z[o][i],)))
    inst.nvars = alloc.top
    names = {}
    for o in range(k):
        for d in range(l):
            for j in range(m + 1):
                names[("u", o, d, "*" if j == m else j)] = u[o][d][j]
            names[("p", o, d)] = p[o][d]
            for i in range(n):
                names[("e", o, d, i)] = e[o][d][i]
        for i in range(n):
            names[("z", o, i)] = z[o][i]
    inst.names = names
    return inst, ImlibVarMap(k, l, m, u, p, e, z)


def state_from(assignment: Sequence[bool], vm: ImlibVarMap, partition: int = 0) -> ImlibState:
    return ImlibState([[[bool(assignment[v]) for v in slot] for slot in rule] for rule in vm.u],
                      [[bool(assignment[v]) for v in rule] for rule in vm.p], partition)


class DecodeError(RuntimeError):
    pass


def decode_dnf_rules(assignment: Sequence[bool], vm: ImlibVarMap, columns) -> RuleSet:
    lit = literals_for(columns)
    m = vm.m
    rules = []
    for o in range(vm.k):
        rule = []
        for d in range(vm.l):
            chosen = [j for j, v in enumerate(vm.u[o][d]) if assignment[v]]
            if len(chosen) != 1:
                raise DecodeError(f"slot ({o},{d}) selects {len(chosen)} features")
            j = chosen[0]
            if j == m:
                continue
            rule.append(lit(j, bool(assignment[vm.p[o][d]])))
        rules.append(tuple(rule))
    return RuleSet(DNF, rules)


def fold_slot_objective(inst: WcnfInstance, vm: ImlibVarMap) -> WcnfInstance:
    """Equivalent instance for the embedded solver.  Under the slot
    exactly-one constraint a slot's m+1 unit softs cost 0 when its reference
    literal (the prior choice, or the skip marker) holds and 2 otherwise, so
    they collapse into one weight-2 unit.  The core-guided search no longer
    has to rediscover that pairing one core at a time."""
    n_slot = vm.k * vm.l * (vm.m + 1)
    soft = []
    for w, c in inst.soft[:n_slot]:
        if c[0] > 0:
            soft.append((2 * w, c))
    assert len(soft) == vm.k * vm.l, "expected one positive unit per slot"
    return WcnfInstance(inst.nvars, inst.hard, soft + inst.soft[n_slot:], inst.names)


def train_imlib(ds: BinaryDataset, params: ImlibParams,
                backend: Optional[BackendConfig] = None) -> RuleSet:
    if params.l > ds.m:
        raise ValueError(f"l={params.l} exceeds the {ds.m} binary features")
    backend = backend or BackendConfig(seed=params.seed)
    plan = make_partitions(ds, params.lp, params.seed)
    t0 = time.perf_counter()
    prior = None
    vm = None
    assignment = None
    cost = 0
    for t, part in enumerate(plan):
        rows = list(part)
        inst, vm = encode_partition(ds.X[rows], ds.y[rows], params, prior)
        if backend.backend == "embedded":
            res = solve(fold_slot_objective(inst, vm), backend)
        else:
            res = solve(inst, backend)
        if not res.optimal:
            raise SolverError("IMLIB encoding reported hard-unsat")
        assignment = res.assignment
        cost = inst.cost(assignment)
        assert cost == res.cost, "folded objective disagrees with the encoding"
        prior = state_from(assignment, vm, t + 1)
    raw = decode_dnf_rules(assignment, vm, ds.columns)
    sizes = raw.sizes
    assert all(1 <= s <= params.l for s in sizes), sizes
    rs = reduce_redundancy(raw)
    assert all(s <= params.l for s in rs.sizes)
    seconds = time.perf_counter() - t0
    rs.meta.update({"learner": "imlib", "k": params.k, "l": params.l,
                    "lambda": int(params.lam), "lp": params.lp, "q": params.q,
                    "seed": params.seed, "partitions": len(plan), "last_cost": cost,
                    "sizes_before_reduction": sizes, "train_seconds": seconds})
    return rs


def solve_sqfsat_exact(ds: BinaryDataset, k: int, l: int, seed: int = 0) -> Optional[RuleSet]:
    """Perfect DNF classifier with ``k`` rules of at most ``l`` literals, or
    None when none exists."""
    params = ImlibParams(k=k, l=l, lam=1, lp=max(1, ds.n), seed=seed)
    inst, vm = encode_partition(ds.X, ds.y, params, exact=True)
    model = solve_sat(inst.hard, inst.nvars, seed=seed)
    if model is None:
        return None
    rs = decode_dnf_rules(model, vm, ds.columns)
    rs.meta.update({"learner": "sqfsat", "k": k, "l": l, "seed": seed})
    return rs
