"""CDCL SAT engine with an optional native linear objective bound.

Internal literals are ``2*v`` (positive) and ``2*v + 1`` (negative); the
public interface speaks DIMACS integers.  Besides clauses the solver carries
one pseudo-Boolean constraint ``sum(w_i * [l_i]) <= bound`` used by the
linear SAT-UNSAT MaxSAT loop; it is propagated directly on the trail and
explained lazily from the stack of currently true weighted literals.
"""
from __future__ import annotations

import heapq
import random
import time
from typing import Dict, Iterable, List, Optional, Sequence


class SolverTimeout(RuntimeError):
    pass


def _luby(i: int) -> int:
    # i >= 1
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    x = i
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


def _ilit(d: int) -> int:
    return (d << 1) if d > 0 else ((-d) << 1) | 1


def _dimacs(p: int) -> int:
    return -(p >> 1) if p & 1 else p >> 1


class Solver:
    """Incremental CDCL solver: two watched literals, VSIDS, 1-UIP learning,
    Luby restarts, phase saving and LBD-based clause deletion."""

    restart_base = 100
    var_decay = 0.95

    def __init__(self, nvars: int = 0, seed: int = 0):
        self.nvars = 0
        self.value: List[int] = [0, 0]
        self.level: List[int] = [0]
        self.reason: list = [None]
        self.activity: List[float] = [0.0]
        self.polarity: List[int] = [1]  # 1 -> prefer negative literal
        self.watches: List[list] = [[], []]
        self.bins: List[list] = [[], []]   # bins[q]: literals implied once q is false
        self.terns: List[list] = [[], []]  # terns[q]: (a, b) of original ternaries holding q
        self.seen = bytearray(1)
        self.pb_w: List[int] = [0, 0]
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.learnts: List[list] = []
        self.lbd: Dict[int, int] = {}
        self.heap: list = []
        self.inheap = bytearray(1)      # live (current-activity) heap entry exists
        self.var_inc = 1.0
        self.ok = True
        self.rng = random.Random(seed)
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.max_learnts = 2000.0
        self.deadline: Optional[float] = None
        self.model: List[bool] = []
        self.assumptions: List[int] = []
        self.core: List[int] = []       # DIMACS assumption literals of the last failure
        # objective bound
        self.pb_bound: Optional[int] = None
        self.pb_sum = 0
        self.pb_true: List[int] = []
        self.pb_groups: List[tuple] = []
        self.pb_done: List[bool] = []
        self.grow(nvars)

    # ------------------------------------------------------------------ setup
    def grow(self, nvars: int) -> None:
        extra = nvars - self.nvars
        if extra <= 0:
            return
        self.value.extend([0] * (2 * extra))
        self.pb_w.extend([0] * (2 * extra))
        self.level.extend([0] * extra)
        self.reason.extend([None] * extra)
        # tiny seeded jitter fixes the initial order deterministically
        self.activity.extend(self.rng.random() * 1e-5 for _ in range(extra))
        self.polarity.extend([1] * extra)
        self.watches.extend([] for _ in range(2 * extra))
        self.bins.extend([] for _ in range(2 * extra))
        self.terns.extend([] for _ in range(2 * extra))
        self.seen.extend(bytes(extra))
        self.inheap.extend(b"\x01" * extra)
        for v in range(self.nvars + 1, nvars + 1):
            heapq.heappush(self.heap, (-self.activity[v], v))
        self.nvars = nvars

    def new_var(self) -> int:
        self.grow(self.nvars + 1)
        return self.nvars

    def set_phase(self, lit: int) -> None:
        """Prefer assigning DIMACS literal ``lit`` true when branching."""
        self.polarity[abs(lit)] = 0 if lit > 0 else 1

    def add_clause(self, lits: Iterable[int]) -> bool:
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        value = self.value
        out = []
        seen = set()
        for d in lits:
            p = _ilit(d)
            if (p >> 1) > self.nvars:
                self.grow(p >> 1)
                value = self.value
            if p in seen:
                continue
            if p ^ 1 in seen or value[p] == 1:
                return True
            if value[p] == -1:
                continue
            seen.add(p)
            out.append(p)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        if len(out) == 2:
            self.bins[out[0]].append(out[1])
            self.bins[out[1]].append(out[0])
            return True
        if len(out) == 3:
            self._add_tern(*out)
            return True
        self.watches[out[0]].append(out)
        self.watches[out[1]].append(out)
        return True

    def _add_tern(self, a: int, b: int, c: int) -> None:
        terns = self.terns
        terns[a].append((b, c))
        terns[b].append((a, c))
        terns[c].append((a, b))

    def add_clauses(self, clauses: Iterable[Sequence[int]]) -> bool:
        """Bulk ``add_clause``; clauses over unassigned, distinct variables
        skip the general normalisation."""
        if self.trail_lim:
            self._cancel_until(0)
        value = self.value
        watches = self.watches
        bins = self.bins
        top = 2 * self.nvars + 1
        for c in clauses:
            if not self.ok:
                return False
            n = len(c)
            if n == 2:
                a, b = c
                pa = a + a if a > 0 else 1 - a - a
                pb = b + b if b > 0 else 1 - b - b
                if pa >> 1 != pb >> 1 and pa <= top and pb <= top \
                        and not value[pa] and not value[pb]:
                    bins[pa].append(pb)
                    bins[pb].append(pa)
                    continue
            elif n > 2:
                lits = [d + d if d > 0 else 1 - d - d for d in c]
                if max(lits) <= top and len({p >> 1 for p in lits}) == n \
                        and not any(map(value.__getitem__, lits)):
                    if n == 3:
                        self._add_tern(*lits)
                        continue
                    watches[lits[0]].append(lits)
                    watches[lits[1]].append(lits)
                    continue
            self.add_clause(c)
            value, watches, bins = self.value, self.watches, self.bins
            top = 2 * self.nvars + 1
        return self.ok

    def set_objective(self, weights: Dict[int, int]) -> None:
        """Install weighted literals (DIMACS) for the linear bound."""
        if self.trail_lim:
            self._cancel_until(0)
        groups: Dict[int, List[int]] = {}
        for d, w in weights.items():
            if w <= 0:
                continue
            p = _ilit(d)
            if (p >> 1) > self.nvars:
                self.grow(p >> 1)
            self.pb_w[p] += w
        for p in range(2, 2 * self.nvars + 2):
            w = self.pb_w[p]
            if w:
                groups.setdefault(w, []).append(p)
                if self.value[p] == 1:
                    self.pb_sum += w
                    self.pb_true.append(p)
        self.pb_groups = sorted(groups.items(), reverse=True)
        self.pb_done = [False] * len(self.pb_groups)

    def set_bound(self, bound: int) -> bool:
        """Require the weighted sum of objective literals to be <= bound."""
        if self.trail_lim:
            self._cancel_until(0)
        self.pb_bound = bound
        self.pb_done = [False] * len(self.pb_groups)
        if not self.ok:
            return False
        if self.pb_sum > bound or self._pb_check() is not None or self._propagate() is not None:
            self.ok = False
        return self.ok

    # --------------------------------------------------------------- core
    def _enqueue(self, p: int, why) -> None:
        v = p >> 1
        self.value[p] = 1
        self.value[p ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = why
        self.trail.append(p)
        w = self.pb_w[p]
        if w:
            self.pb_sum += w
            self.pb_true.append(p)

    def _pb_check(self):
        """Propagate the objective bound; return a conflict clause or None."""
        bound = self.pb_bound
        slack = bound - self.pb_sum
        if slack < 0:
            # keep only enough true literals to exceed the bound
            need = bound + 1
            conf = []
            for p in sorted(self.pb_true, key=self.pb_w.__getitem__, reverse=True):
                conf.append(p ^ 1)
                need -= self.pb_w[p]
                if need <= 0:
                    break
            return conf
        value = self.value
        for g, (w, lits) in enumerate(self.pb_groups):
            if w <= slack:
                break
            if self.pb_done[g]:
                continue
            k = len(self.pb_true)
            for p in lits:
                if value[p] == 0:
                    self._enqueue(p ^ 1, k)
            self.pb_done[g] = True
        return None

    def _propagate(self):
        trail = self.trail
        value = self.value
        watches = self.watches
        bins = self.bins
        terns = self.terns
        pb_w = self.pb_w
        has_bound = self.pb_bound is not None
        level = self.level
        reason = self.reason
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            if has_bound and pb_w[p]:
                confl = self._pb_check()
                if confl is not None:
                    return confl
            fl = p ^ 1
            for q in bins[fl]:
                vq = value[q]
                if vq == 1:
                    continue
                if vq == -1:
                    self.qhead = len(trail)
                    return [q, fl]
                v = q >> 1
                value[q] = 1
                value[q ^ 1] = -1
                level[v] = len(self.trail_lim)
                reason[v] = (q, fl)
                trail.append(q)
                w = pb_w[q]
                if w:
                    self.pb_sum += w
                    self.pb_true.append(q)
            for a, b in terns[fl]:
                va = value[a]
                if va == 1:
                    continue
                vb = value[b]
                if vb == 1:
                    continue
                if va == -1:
                    if vb == -1:
                        self.qhead = len(trail)
                        return [a, b, fl]
                    q, r = b, (b, a, fl)
                elif vb == -1:
                    q, r = a, (a, b, fl)
                else:
                    continue
                value[q] = 1
                value[q ^ 1] = -1
                level[q >> 1] = len(self.trail_lim)
                reason[q >> 1] = r
                trail.append(q)
                w = pb_w[q]
                if w:
                    self.pb_sum += w
                    self.pb_true.append(q)
            ws = watches[fl]
            if not ws:
                continue
            keep = []
            i = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                first = c[0]
                if first == fl:
                    first = c[1]
                    c[0] = first
                    c[1] = fl
                vf = value[first]
                if vf == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    q = c[k]
                    if value[q] != -1:
                        c[1] = q
                        c[k] = fl
                        watches[q].append(c)
                        break
                else:
                    keep.append(c)
                    if vf == -1:
                        keep.extend(ws[i:])
                        watches[fl] = keep
                        self.qhead = len(trail)
                        return c
                    # unit: inline enqueue
                    v = first >> 1
                    value[first] = 1
                    value[first ^ 1] = -1
                    level[v] = len(self.trail_lim)
                    reason[v] = c
                    trail.append(first)
                    w = pb_w[first]
                    if w:
                        self.pb_sum += w
                        self.pb_true.append(first)
            watches[fl] = keep
        return None

    def _reason_lits(self, v: int, r):
        if type(r) is int:
            return [q ^ 1 for q in self.pb_true[:r]]
        return r[1:] if (r[0] >> 1) == v else [q for q in r if (q >> 1) != v]

    def _analyze(self, confl):
        seen = self.seen
        level = self.level
        trail = self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        idx = len(trail) - 1
        lits = confl
        p = -1
        bumped = []
        while True:
            for q in lits:
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    bumped.append(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = 0
            path -= 1
            if path <= 0:
                break
            lits = self._reason_lits(v, self.reason[v])
        learnt[0] = p ^ 1
        # local minimisation: drop literals implied by others in the clause
        if len(learnt) > 2:
            for q in learnt[1:]:
                seen[q >> 1] = 1
            out = [learnt[0]]
            reason = self.reason
            for q in learnt[1:]:
                r = reason[q >> 1]
                if r is None:
                    out.append(q)
                    continue
                for s in self._reason_lits(q >> 1, r):
                    u = s >> 1
                    if not seen[u] and level[u] > 0:
                        out.append(q)
                        break
            for q in learnt[1:]:
                seen[q >> 1] = 0
            learnt = out
        for v in bumped:
            seen[v] = 0
        self._bump(bumped)
        if len(learnt) == 1:
            return learnt, 0
        mi = 1
        ml = level[learnt[1] >> 1]
        for i in range(2, len(learnt)):
            lv = level[learnt[i] >> 1]
            if lv > ml:
                ml = lv
                mi = i
        learnt[1], learnt[mi] = learnt[mi], learnt[1]
        return learnt, ml

    def _final(self, seeds: List[int], out: List[int]) -> List[int]:
        """Append to ``out`` the assumptions (DIMACS) that imply the false
        literals ``seeds``; all of them live on the assumption level."""
        seen = self.seen
        level = self.level
        trail = self.trail
        marked = []
        for q in seeds:
            v = q >> 1
            if level[v] > 0 and not seen[v]:
                seen[v] = 1
                marked.append(v)
        if marked:
            for i in range(len(trail) - 1, self.trail_lim[0] - 1, -1):
                q = trail[i]
                v = q >> 1
                if not seen[v]:
                    continue
                r = self.reason[v]
                if r is None:
                    out.append(_dimacs(q))
                else:
                    for t in self._reason_lits(v, r):
                        u = t >> 1
                        if level[u] > 0 and not seen[u]:
                            seen[u] = 1
                            marked.append(u)
        for v in marked:
            seen[v] = 0
        return out

    def _assume(self):
        """Open level 1 and assert every assumption on it; returns a core
        (possibly empty list for 'no conflict') or None when consistent."""
        value = self.value
        self.trail_lim.append(len(self.trail))
        for p in self.assumptions:
            vp = value[p]
            if vp == 1:
                continue
            if vp == -1:
                return self._final([p], [_dimacs(p)])
            self.decisions += 1
            self._enqueue(p, None)
            confl = self._propagate()
            if confl is not None:
                return self._final(confl, [])
        return None

    def _bump(self, vs):
        act = self.activity
        inc = self.var_inc
        heap = self.heap
        value = self.value
        inheap = self.inheap
        for v in vs:
            a = act[v] + inc
            act[v] = a
            if value[v << 1] == 0:
                heapq.heappush(heap, (-a, v))
                inheap[v] = 1
            else:
                inheap[v] = 0
        if inc > 1e100:
            for v in range(1, self.nvars + 1):
                act[v] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()

    def _rebuild_heap(self):
        act = self.activity
        value = self.value
        self.heap = [(-act[v], v) for v in range(1, self.nvars + 1) if value[v << 1] == 0]
        heapq.heapify(self.heap)
        self.inheap = bytearray(self.nvars + 1)
        for _, v in self.heap:
            self.inheap[v] = 1

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        trail = self.trail
        value = self.value
        reason = self.reason
        pol = self.polarity
        act = self.activity
        heap = self.heap
        pb_w = self.pb_w
        pb_true = self.pb_true
        inheap = self.inheap
        stop = self.trail_lim[lvl]
        for i in range(len(trail) - 1, stop - 1, -1):
            p = trail[i]
            v = p >> 1
            value[p] = 0
            value[p ^ 1] = 0
            reason[v] = None
            pol[v] = p & 1
            if pb_w[p]:
                self.pb_sum -= pb_w[p]
                pb_true.pop()
            if not inheap[v]:
                heapq.heappush(heap, (-act[v], v))
                inheap[v] = 1
        del trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(trail)
        if self.pb_done:
            self.pb_done = [False] * len(self.pb_groups)
        if len(heap) > 6 * self.nvars + 100:
            self._rebuild_heap()

    def _pick(self) -> int:
        heap = self.heap
        value = self.value
        act = self.activity
        inheap = self.inheap
        while heap:
            a, v = heapq.heappop(heap)
            if -a == act[v]:
                inheap[v] = 0
                if value[v << 1] == 0:
                    return v
        # stale entries exhausted; fall back to a scan
        for v in range(1, self.nvars + 1):
            if value[v << 1] == 0:
                return v
        return 0

    def _reduce_db(self) -> None:
        reason = self.reason
        lbd = self.lbd
        locked = set()
        for p in self.trail:
            r = reason[p >> 1]
            if r is not None and type(r) is not int:
                locked.add(id(r))
        cands = [c for c in self.learnts if len(c) > 2 and lbd.get(id(c), 0) > 2 and id(c) not in locked]
        cands.sort(key=lambda c: lbd[id(c)])
        drop = {id(c) for c in cands[len(cands) // 2:]}
        if not drop:
            return
        self.learnts = [c for c in self.learnts if id(c) not in drop]
        for c in list(lbd):
            if c in drop:
                del lbd[c]
        for i, ws in enumerate(self.watches):
            if ws:
                self.watches[i] = [c for c in ws if id(c) not in drop]

    def _search(self, budget: int) -> Optional[bool]:
        level = self.level
        nconf = 0
        root = 1 if self.assumptions else 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                nconf += 1
                dl = len(self.trail_lim)
                if dl == 0:
                    return False
                if dl == root:
                    self.core = self._final(confl, [])
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len({level[q >> 1] for q in learnt})
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
                if self.deadline is not None and (self.conflicts & 255) == 0 \
                        and time.monotonic() > self.deadline:
                    raise SolverTimeout("embedded solver exceeded its time limit")
            else:
                if nconf >= budget:
                    self._cancel_until(root)
                    return None
                if len(self.learnts) - len(self.trail) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.1
                if root and not self.trail_lim:
                    core = self._assume()
                    if core is not None:
                        self.core = core
                        return False
                    continue
                v = self._pick()
                if v == 0:
                    return True
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue((v << 1) | self.polarity[v], None)

    def solve(self, time_limit: Optional[float] = None,
              assumptions: Sequence[int] = ()) -> bool:
        """Satisfiability under DIMACS ``assumptions``.  On failure ``core``
        holds a subset of the assumptions that cannot hold together (empty
        when the clauses alone are unsatisfiable)."""
        self.core = []
        if self.trail_lim:
            self._cancel_until(0)
        self.assumptions = [_ilit(d) for d in assumptions]
        for p in self.assumptions:
            if (p >> 1) > self.nvars:
                self.grow(p >> 1)
        if time_limit is not None:
            self.deadline = time.monotonic() + time_limit
        else:
            self.deadline = None
        if not self.ok:
            return False
        if self.pb_bound is not None and self._pb_check() is not None:
            self.ok = False
            return False
        if self._propagate() is not None:
            self.ok = False
            return False
        restarts = 0
        while True:
            restarts += 1
            res = self._search(_luby(restarts) * self.restart_base)
            if res is True:
                val = self.value
                self.model = [False] + [val[v << 1] == 1 for v in range(1, self.nvars + 1)]
                self._cancel_until(0)
                return True
            if res is False:
                if self.core:
                    self._cancel_until(0)
                else:
                    self.ok = False
                return False


def solve_sat(clauses: Sequence[Sequence[int]], nvars: int = 0, seed: int = 0,
              time_limit: Optional[float] = None) -> Optional[List[bool]]:
    """Satisfiability of hard clauses; returns ``model`` (index = var) or None."""
    top = max([nvars] + [abs(l) for c in clauses for l in c])
    s = Solver(top, seed=seed)
    if not s.add_clauses(clauses):
        return None
    if not s.solve(time_limit):
        return None
    return s.model
