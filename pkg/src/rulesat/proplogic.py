"""Propositional formulas, clause encodings and CNF conversion.

Literals are DIMACS-style signed integers: variable ``v`` is the positive
literal ``v`` and its negation is ``-v``.  Clauses are tuples of literals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

Clause = Tuple[int, ...]


class VarAllocator:
    """Dense variable allocator; ids start at 1 and are never reused."""

    def __init__(self, start: int = 0):
        self.top = start
        self.names: Dict[Hashable, int] = {}

    def new(self, tag: Hashable = None) -> int:
        self.top += 1
        if tag is not None:
            if tag in self.names:
                raise ValueError(f"variable tag {tag!r} already allocated")
            self.names[tag] = self.top
        return self.top

    def block(self, count: int) -> range:
        """Allocate ``count`` anonymous consecutive variables."""
        first = self.top + 1
        self.top += count
        return range(first, self.top + 1)


def normalize_clause(lits: Iterable[int]) -> Optional[Clause]:
    """Drop duplicate literals; return None for a tautology."""
    out = tuple(dict.fromkeys(lits))
    seen = set(out)
    for lit in out:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in seen:
            return None
    return out


@dataclass
class WcnfInstance:
    """Hard clauses plus weighted soft clauses over variables 1..nvars."""

    nvars: int = 0
    hard: List[Clause] = field(default_factory=list)
    soft: List[Tuple[int, Clause]] = field(default_factory=list)
    names: Dict[Hashable, int] = field(default_factory=dict)

    def add_hard(self, lits: Iterable[int]) -> None:
        c = normalize_clause(lits)
        if c is not None:
            self.hard.append(c)

    def add_soft(self, lits: Iterable[int], weight: int) -> None:
        if int(weight) != weight or weight < 1:
            raise ValueError(f"soft weight must be a positive integer, got {weight!r}")
        c = normalize_clause(lits)
        if c is not None:
            self.soft.append((int(weight), c))

    def add_formula(self, f: "Formula", alloc: VarAllocator) -> None:
        """Assert a (hard) formula, converting it to clauses."""
        clauses, root = tseitin(f, alloc)
        for c in clauses:
            self.add_hard(c)
        if root is not None:
            self.add_hard((root,))
        self.nvars = max(self.nvars, alloc.top)

    def validate(self) -> None:
        for c in self.hard:
            for lit in c:
                if lit == 0 or abs(lit) > self.nvars:
                    raise ValueError(f"literal {lit} out of range 1..{self.nvars}")
        for w, c in self.soft:
            if w < 1:
                raise ValueError(f"soft weight {w} < 1")
            for lit in c:
                if lit == 0 or abs(lit) > self.nvars:
                    raise ValueError(f"literal {lit} out of range 1..{self.nvars}")

    def _truth(self, model: Sequence[bool]) -> List[bool]:
        # t[l] for signed l: negative indices wrap onto the negated half
        n = self.nvars
        pos = [bool(model[v]) for v in range(1, n + 1)]
        return [False] + pos + [not b for b in reversed(pos)]

    def hard_ok(self, model: Sequence[bool]) -> bool:
        """``model[v]`` is the value of variable v (index 0 unused)."""
        get = self._truth(model).__getitem__
        return all(any(map(get, c)) for c in self.hard)

    def cost(self, model: Sequence[bool]) -> int:
        get = self._truth(model).__getitem__
        return sum(w for w, c in self.soft if not any(map(get, c)))

    @property
    def top_weight(self) -> int:
        return 1 + sum(w for w, _ in self.soft)


def exactly_one(lits: Sequence[int]) -> List[Clause]:
    """At-least-one clause followed by the pairwise at-most-one clauses."""
    if not lits:
        raise ValueError("exactly_one needs at least one literal")
    if len({abs(l) for l in lits}) != len(lits):
        raise ValueError("exactly_one over duplicate variables")
    out: List[Clause] = [tuple(lits)]
    out.extend((-a, -b) for a, b in combinations(lits, 2))
    return out


def weighted_counter(lits: Sequence[int], weights: Sequence[int], bound: int,
                     alloc: VarAllocator) -> Tuple[List[Clause], List[int]]:
    """Weighted sequential counter for ``sum(w_i * lit_i)``.

    Returns the clauses and output literals ``out`` where ``out[j-1]`` is
    forced true whenever the weighted sum reaches ``j`` (``1 <= j <= bound+1``).
    Asserting ``-out[c-1]`` forbids sums ``>= c``, so tightening needs only a
    new unit clause.
    """
    cap = bound + 1
    clauses: List[Clause] = []
    prev: List[int] = []
    for lit, w in zip(lits, weights):
        w = min(int(w), cap)
        cur = list(alloc.block(cap))
        for j in range(cap):
            if j < w:
                clauses.append((-lit, cur[j]))
            if prev:
                clauses.append((-prev[j], cur[j]))
                clauses.append((-lit, -prev[j], cur[min(j + w, cap - 1)]))
        prev = cur
    return clauses, prev


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Formula):
    lit: int


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: Tuple[Formula, ...]

    def __init__(self, *children: Formula):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Or(Formula):
    children: Tuple[Formula, ...]

    def __init__(self, *children: Formula):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


def variables(f: Formula) -> set:
    if isinstance(f, Lit):
        return {abs(f.lit)}
    if isinstance(f, Const):
        return set()
    if isinstance(f, Not):
        return variables(f.child)
    if isinstance(f, (And, Or)):
        out = set()
        for c in f.children:
            out |= variables(c)
        return out
    return variables(f.left) | variables(f.right)


def eval_formula(f: Formula, assignment: Mapping[int, bool]) -> bool:
    if isinstance(f, Lit):
        v = abs(f.lit)
        if v not in assignment:
            raise KeyError(f"variable {v} is unassigned")
        return bool(assignment[v]) == (f.lit > 0)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not eval_formula(f.child, assignment)
    if isinstance(f, And):
        return all(eval_formula(c, assignment) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(c, assignment) for c in f.children)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, assignment)) or eval_formula(f.right, assignment)
    if isinstance(f, Iff):
        return eval_formula(f.left, assignment) == eval_formula(f.right, assignment)
    raise TypeError(f"not a formula: {f!r}")


def _nnf(f: Formula, neg: bool = False) -> Formula:
    """Negation normal form over Lit/Const/And/Or/Iff, with constants folded.

    Iff nodes survive (their children in NNF) so the encoder can give them a
    definitional treatment instead of duplicating subformulas.
    """
    if isinstance(f, Lit):
        return Lit(-f.lit) if neg else f
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Not):
        return _nnf(f.child, not neg)
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), neg)
    if isinstance(f, Iff):
        left = _nnf(f.left)
        right = _nnf(f.right, neg)
        if isinstance(left, Const):
            return right if left.value else _nnf(right, True)
        if isinstance(right, Const):
            return left if right.value else _nnf(left, True)
        return Iff(left, right)
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And) != neg
        kids = []
        for c in f.children:
            k = _nnf(c, neg)
            if isinstance(k, Const):
                if k.value != is_and:  # absorbing constant
                    return Const(not is_and)
                continue
            if isinstance(k, And if is_and else Or):
                kids.extend(k.children)
            else:
                kids.append(k)
        if not kids:
            return Const(is_and)
        if len(kids) == 1:
            return kids[0]
        return And(*kids) if is_and else Or(*kids)
    raise TypeError(f"not a formula: {f!r}")


def _negate_nnf(f: Formula) -> Formula:
    return _nnf(f, True)


class _Encoder:
    def __init__(self, alloc: VarAllocator):
        self.alloc = alloc
        self.clauses: List[Clause] = []
        self.cache: Dict[Tuple[Formula, bool], int] = {}

    def define(self, f: Formula, both: bool) -> int:
        """Literal ``t`` with ``t -> f`` (and ``f -> t`` when ``both``)."""
        if isinstance(f, Lit):
            return f.lit
        key = (f, both)
        if key in self.cache:
            return self.cache[key]
        t = self.alloc.new()
        self.cache[key] = t
        self.imply(t, f)
        if both:
            self.imply(-t, _negate_nnf(f))
        return t

    def imply(self, t: int, f: Formula) -> None:
        """Add clauses for ``t -> f``."""
        for c in self.clausify(f):
            self.clauses.append((-t,) + c)

    def clausify(self, f: Formula) -> List[Clause]:
        """Clauses whose conjunction implies f (and is implied by f
        extended with fresh definitions)."""
        if isinstance(f, Const):
            return [] if f.value else [()]
        if isinstance(f, Lit):
            return [(f.lit,)]
        if isinstance(f, And):
            out: List[Clause] = []
            for c in f.children:
                out.extend(self.clausify(c))
            return out
        if isinstance(f, Or):
            head: List[int] = []
            conj: List[Formula] = []
            for c in f.children:
                if isinstance(c, Lit):
                    head.append(c.lit)
                else:
                    conj.append(c)
            # one compound child of plain literal clauses: distribute, no aux
            if len(conj) == 1 and isinstance(conj[0], And) and all(
                    _is_lit_clause(g) for g in conj[0].children):
                return [tuple(head) + _lit_clause(g) for g in conj[0].children]
            if len(conj) == 1 and isinstance(conj[0], Iff) and all(
                    isinstance(s, Lit) for s in (conj[0].left, conj[0].right)):
                a, b = conj[0].left.lit, conj[0].right.lit
                return [tuple(head) + (-a, b), tuple(head) + (a, -b)]
            for c in conj:
                head.append(self.define(c, False))
            return [tuple(head)]
        if isinstance(f, Iff):
            left, right = f.left, f.right
            if isinstance(right, Lit) and not isinstance(left, Lit):
                left, right = right, left
            if isinstance(left, Lit) and isinstance(right, (And, Or)) and all(
                    isinstance(c, Lit) for c in right.children):
                z = left.lit
                ks = [c.lit for c in right.children]
                if isinstance(right, And):
                    return [(-z, k) for k in ks] + [(z,) + tuple(-k for k in ks)]
                return [(-z,) + tuple(ks)] + [(z, -k) for k in ks]
            a = self.define(left, True)
            b = self.define(right, True)
            return [(-a, b), (a, -b)]
        raise TypeError(f"unexpected node {f!r}")


def _is_lit_clause(f: Formula) -> bool:
    return isinstance(f, Lit) or (isinstance(f, Or) and all(isinstance(c, Lit) for c in f.children))


def _lit_clause(f: Formula) -> Clause:
    if isinstance(f, Lit):
        return (f.lit,)
    return tuple(c.lit for c in f.children)


def tseitin(f: Formula, alloc: VarAllocator) -> Tuple[List[Clause], Optional[int]]:
    """Convert ``f`` to clauses asserting it, allocating auxiliaries from ``alloc``.

    Returns ``(clauses, root)``.  A bare literal comes back as ``([], lit)``
    and the caller asserts the root.  Anything else is asserted directly and
    ``root`` is None.  Auxiliaries are only introduced for compound children
    of disjunctions and for non-literal sides of biconditionals; the models
    of the clauses, projected onto the variables of ``f``, are exactly the
    models of ``f``.
    """
    g = _nnf(f)
    if isinstance(g, Lit):
        return [], g.lit
    enc = _Encoder(alloc)
    return _finish(enc.clauses + enc.clausify(g)), None


def define(f: Formula, alloc: VarAllocator) -> Tuple[List[Clause], int]:
    """Full definitional encoding: returns clauses and ``t`` with ``t <-> f``."""
    g = _nnf(f)
    if isinstance(g, Const):
        t = alloc.new()
        return [(t,) if g.value else (-t,)], t
    enc = _Encoder(alloc)
    t = enc.define(g, True)
    return _finish(enc.clauses), t


def _finish(clauses: Iterable[Clause]) -> List[Clause]:
    out = []
    for c in clauses:
        n = normalize_clause(c)
        if n is not None:
            out.append(n)
    return out
