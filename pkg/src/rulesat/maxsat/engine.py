"""Weighted partial MaxSAT on the embedded CDCL.

Two algorithms are provided: core-guided OLL with incremental totalizers and
weight stratification (the default), and linear SAT-UNSAT search with the
objective as a native pseudo-Boolean bound or a weighted sequential counter.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..proplogic import VarAllocator, WcnfInstance, weighted_counter
from .cdcl import Solver, SolverTimeout

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
HARD_UNSAT = "hard-unsat"


class SolverError(RuntimeError):
    """Base class for backend failures."""


class ExternalSolverError(SolverError):
    pass


class ExternalSolverTimeout(SolverError):
    pass


class MalformedSolverOutput(SolverError):
    pass


class EmbeddedTimeout(SolverError):
    pass


@dataclass
class SolveResult:
    status: str
    assignment: Optional[List[bool]] = None  # index = VarId, [0] unused
    cost: Optional[int] = None
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def value(self, var: int) -> bool:
        return self.assignment[var]


@dataclass
class BackendConfig:
    backend: str = "embedded"          # "embedded" | "external"
    command: Optional[str] = None      # external command template, "{wcnf}" = instance path
    dialect: str = "classic"           # "classic" | "mse22"
    time_limit: Optional[float] = None
    seed: int = 0
    bound: str = "native"              # lsu bound: "native" | "counter"
    algorithm: str = "oll"             # embedded search: "oll" | "lsu"

    def __post_init__(self):
        if self.backend not in ("embedded", "external"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "external" and not self.command:
            raise ValueError("external backend requires a command")
        if self.dialect not in ("classic", "mse22"):
            raise ValueError(f"unknown WCNF dialect {self.dialect!r}")
        if self.bound not in ("native", "counter"):
            raise ValueError(f"unknown bound mode {self.bound!r}")
        if self.algorithm not in ("oll", "lsu"):
            raise ValueError(f"unknown embedded algorithm {self.algorithm!r}")


def verify(inst: WcnfInstance, res: SolveResult) -> SolveResult:
    """Re-check a returned assignment and recompute its cost."""
    if res.status != OPTIMAL:
        return res
    a = res.assignment
    if a is None or len(a) < inst.nvars + 1:
        raise MalformedSolverOutput("assignment does not cover every variable")
    if not inst.hard_ok(a):
        raise SolverError("returned assignment violates a hard clause")
    cost = inst.cost(a)
    if res.cost is not None and res.cost != cost:
        log.warning("reported cost %s differs from recomputed cost %s; using recomputed",
                    res.cost, cost)
    res.cost = cost
    return res


class _Totalizer:
    """Incremental totalizer: ``outs[j]`` is forced true when at least
    ``j + 1`` of the input literals are true."""

    def __init__(self, solver: Solver, lits: List[int]):
        self.solver = solver
        self.root = self._build(list(lits))
        self.size = len(lits)

    def _build(self, lits):
        if len(lits) == 1:
            return [None, None, 1, lits, 1]          # left, right, size, outs, built
        mid = len(lits) // 2
        a, b = self._build(lits[:mid]), self._build(lits[mid:])
        return [a, b, len(lits), [], 0]

    def _extend(self, node, cap):
        left, right, size, outs, built = node
        cap = min(cap, size)
        if cap <= built:
            return
        self._extend(left, cap)
        self._extend(right, cap)
        s = self.solver
        outs.extend(s.new_var() for _ in range(cap - built))
        A, B = left[3], right[3]
        for i in range(len(A) + 1):
            for j in range(len(B) + 1):
                t = i + j
                if built < t <= cap:
                    c = [outs[t - 1]]
                    if i:
                        c.append(-A[i - 1])
                    if j:
                        c.append(-B[j - 1])
                    s.add_clause(c)
        node[4] = cap

    def out(self, j: int) -> int:
        self._extend(self.root, j + 1)
        return self.root[3][j]


def _solve_oll(inst: WcnfInstance, seed: int = 0,
               time_limit: Optional[float] = None) -> SolveResult:
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    s = Solver(inst.nvars, seed=seed)
    if not s.add_clauses(inst.hard):
        return SolveResult(HARD_UNSAT)
    weights: Dict[int, int] = {}     # assumption literal -> remaining weight
    lb = 0
    for w, c in inst.soft:
        if not c:
            lb += w
            continue
        if len(c) == 1:
            a = c[0]
        else:
            r = s.new_var()
            s.add_clause(c + (r,))
            a = -r
        weights[a] = weights.get(a, 0) + w
    for a in weights:
        s.set_phase(a)
    sums: Dict[int, tuple] = {}      # assumption -> (totalizer, j) for "fewer than j+1"

    def remaining():
        return None if deadline is None else max(0.0, deadline - time.monotonic())

    best, ub = None, None
    cores = 0
    try:
        level = max(weights.values(), default=0)
        while ub is None or ub > lb:
            active = [a for a, w in weights.items() if w >= level]
            if s.solve(remaining(), active):
                model = s.model[: inst.nvars + 1]
                c = inst.cost(model)
                if ub is None or c < ub:
                    best, ub = model, c
                lower = [w for w in weights.values() if w < level]
                if not lower:
                    break
                level = max(lower)
                continue
            core = s.core
            if not core:
                if ub is None:
                    return SolveResult(HARD_UNSAT)
                raise SolverError("hard clauses became unsatisfiable during core search")
            # cheap trimming: re-solve on the core itself while it shrinks
            for _ in range(3):
                if len(core) <= 2 or s.solve(remaining(), core[::-1]):
                    break
                if len(s.core) >= len(core):
                    break
                core = s.core
            cores += 1
            w = weights[core[0]] if len(core) == 1 else min(weights[a] for a in core)
            lb += w
            for a in core:
                weights[a] -= w
                if not weights[a]:
                    del weights[a]
                if a in sums:
                    tot, j = sums[a]
                    if j + 1 < tot.size:
                        nxt = -tot.out(j + 1)
                        weights[nxt] = weights.get(nxt, 0) + w
                        sums[nxt] = (tot, j + 1)
            if len(core) == 1:
                s.add_clause((-core[0],))
            else:
                tot = _Totalizer(s, [-a for a in core])
                a = -tot.out(1)
                weights[a] = weights.get(a, 0) + w
                sums[a] = (tot, 1)
    except SolverTimeout as e:
        raise EmbeddedTimeout(str(e)) from None
    if ub != lb:
        raise SolverError(f"core-guided search ended with bounds {lb} < {ub}")
    return SolveResult(OPTIMAL, best, ub, stats={
        "cores": cores, "conflicts": s.conflicts, "seconds": time.monotonic() - t0})


def _solve_embedded(inst: WcnfInstance, seed: int = 0, time_limit: Optional[float] = None,
                    bound: str = "native") -> SolveResult:
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    s = Solver(inst.nvars, seed=seed)
    if not s.add_clauses(inst.hard):
        return SolveResult(HARD_UNSAT)
    weights: Dict[int, int] = {}
    constant = 0
    for w, c in inst.soft:
        if not c:
            constant += w
            continue
        if len(c) == 1:
            viol = -c[0]
        else:
            viol = s.new_var()
            s.add_clause(c + (viol,))
        weights[viol] = weights.get(viol, 0) + w
    for viol in weights:
        s.set_phase(-viol)

    counter_out: List[int] = []
    if bound == "native":
        s.set_objective(weights)

    def remaining():
        return None if deadline is None else max(0.0, deadline - time.monotonic())

    iters = 0
    try:
        if not s.solve(remaining()):
            return SolveResult(HARD_UNSAT)
        best = s.model[: inst.nvars + 1]
        cost = inst.cost(best)
        while cost > constant:
            iters += 1
            target = cost - constant - 1  # weighted violations must be <= target
            if bound == "native":
                if not s.set_bound(target):
                    break
            else:
                if not counter_out:
                    alloc = VarAllocator(s.nvars)
                    lits = sorted(weights)
                    clauses, counter_out = weighted_counter(
                        lits, [weights[l] for l in lits], target, alloc)
                    s.grow(alloc.top)
                    for c in clauses:
                        s.add_clause(c)
                if not s.add_clause((-counter_out[target],)):
                    break
            if not s.solve(remaining()):
                break
            best = s.model[: inst.nvars + 1]
            cost = inst.cost(best)
    except SolverTimeout as e:
        raise EmbeddedTimeout(str(e)) from None
    res = SolveResult(OPTIMAL, best, cost, stats={
        "iterations": iters, "conflicts": s.conflicts, "seconds": time.monotonic() - t0})
    return res


def solve(inst: WcnfInstance, cfg: Optional[BackendConfig] = None) -> SolveResult:
    """Optimal solution of a weighted partial MaxSAT instance."""
    cfg = cfg or BackendConfig()
    if cfg.backend == "embedded":
        if cfg.algorithm == "oll":
            res = _solve_oll(inst, seed=cfg.seed, time_limit=cfg.time_limit)
        else:
            res = _solve_embedded(inst, seed=cfg.seed, time_limit=cfg.time_limit,
                                  bound=cfg.bound)
    else:
        from .external import solve_external
        res = solve_external(inst, cfg)
    return verify(inst, res)


def brute_force(inst: WcnfInstance) -> SolveResult:
    """Exhaustive enumeration over all 2^nvars assignments (test oracle)."""
    n = inst.nvars
    if n > 22:
        raise ValueError("brute force limited to 22 variables")
    best = None
    best_cost = None
    for bits in itertools.product((False, True), repeat=n):
        a = [False] + list(bits)
        if not inst.hard_ok(a):
            continue
        c = inst.cost(a)
        if best_cost is None or c < best_cost:
            best, best_cost = a, c
    if best is None:
        return SolveResult(HARD_UNSAT)
    return SolveResult(OPTIMAL, best, best_cost)
