"""Rule sets over binarized features.

A ``RuleSet`` in DNF is a disjunction of rules, each a conjunction of
feature literals; in CNF each rule is read as a disjunction (a clause).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import NEGATED_OP, ORDINAL, ColumnInfo

DNF = "DNF"
CNF = "CNF"


@dataclass(frozen=True)
class FeatureLiteral:
    column: int          # binary column index j (0-based)
    positive: bool       # x^j vs not x^j
    name: str = ""
    op: str = "is"       # operator of the positive literal x^j
    value: Any = None
    kind: str = "binary"

    @classmethod
    def of(cls, info: ColumnInfo, column: int, positive: bool = True) -> "FeatureLiteral":
        return cls(column, positive, info.name, info.op, info.value, info.kind)

    @property
    def operator(self) -> str:
        return self.op if self.positive else NEGATED_OP[self.op]

    def negate(self) -> "FeatureLiteral":
        return FeatureLiteral(self.column, not self.positive, self.name, self.op,
                              self.value, self.kind)

    def holds(self, sample) -> bool:
        return bool(sample[self.column]) == self.positive

    def __str__(self):
        return ColumnInfo(0, self.name or f"x{self.column + 1}", self.kind, self.op,
                          self.value).label(self.positive)


Rule = Tuple[FeatureLiteral, ...]


@dataclass
class RuleSet:
    form: str
    rules: List[Rule]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in (DNF, CNF):
            raise ValueError(f"unknown form {self.form!r}")
        self.rules = [tuple(r) for r in self.rules]

    @property
    def sizes(self) -> List[int]:
        return [len(r) for r in self.rules]

    def __eq__(self, other):
        return isinstance(other, RuleSet) and self.form == other.form \
            and [_core(r) for r in self.rules] == [_core(r) for r in other.rules]

    def __str__(self):
        return format_ruleset(self)


def _core(rule: Rule):
    return tuple((l.column, l.positive) for l in rule)


def negate(rs: RuleSet) -> RuleSet:
    """De Morgan dual: a CNF clause becomes a DNF conjunction of the
    complemented literals, and vice versa."""
    form = DNF if rs.form == CNF else CNF
    return RuleSet(form, [tuple(l.negate() for l in r) for r in rs.rules], dict(rs.meta))


def apply(rs: RuleSet, sample) -> int:
    m = len(sample)
    for r in rs.rules:
        for l in r:
            if not 0 <= l.column < m:
                raise IndexError(f"literal column {l.column} outside sample of width {m}")
    if rs.form == DNF:
        return int(any(all(l.holds(sample) for l in r) for r in rs.rules))
    return int(all(any(l.holds(sample) for l in r) for r in rs.rules))


def predict(rs: RuleSet, X: np.ndarray) -> np.ndarray:
    """Vectorised ``apply`` over the rows of a 0/1 matrix."""
    X = np.asarray(X, dtype=bool)
    n = X.shape[0]
    if rs.form == DNF:
        out = np.zeros(n, dtype=bool)
        for r in rs.rules:
            fires = np.ones(n, dtype=bool)
            for l in r:
                fires &= X[:, l.column] if l.positive else ~X[:, l.column]
            out |= fires
    else:
        out = np.ones(n, dtype=bool)
        for r in rs.rules:
            sat = np.zeros(n, dtype=bool)
            for l in r:
                sat |= X[:, l.column] if l.positive else ~X[:, l.column]
            out &= sat
    return out.astype(np.uint8)


def metrics(rs: RuleSet) -> Dict[str, int]:
    sizes = rs.sizes
    return {"n_rules": len(sizes), "size": sum(sizes), "largest": max(sizes, default=0)}


# ---------------------------------------------------------------- reduction


def _reduce_rule(rule: Rule) -> Optional[Rule]:
    """Rewrite one conjunction; None when it can never fire."""
    out: List[Optional[FeatureLiteral]] = []
    polarity: Dict[int, bool] = {}
    for l in rule:
        if l.column in polarity:
            if polarity[l.column] != l.positive:
                return None      # x and not x
            continue             # repeated literal
        polarity[l.column] = l.positive
        out.append(l)
    # ordinal dominance within one source column
    upper: Dict[str, int] = {}   # name -> position of the tightest "<= t"
    lower: Dict[str, int] = {}   # name -> position of the tightest "> t"
    for i, l in enumerate(out):
        if l.kind != ORDINAL or l.op != "<=":
            continue
        if l.operator == "<=":
            j = upper.get(l.name)
            if j is None:
                upper[l.name] = i
            elif l.value < out[j].value:
                out[j], out[i] = l, None
            else:
                out[i] = None
        else:
            j = lower.get(l.name)
            if j is None:
                lower[l.name] = i
            elif l.value > out[j].value:
                out[j], out[i] = l, None
            else:
                out[i] = None
    for name, j in upper.items():
        if name in lower and out[j].value <= out[lower[name]].value:
            return None          # value > a and value <= b with b <= a
    return tuple(l for l in out if l is not None)


def reduce_redundancy(rs: RuleSet) -> RuleSet:
    """Deduplicate literals, merge ordinal thresholds on one source column,
    and drop rules that contain a literal together with its opposite."""
    if rs.form == CNF:
        return negate(reduce_redundancy(negate(rs)))
    rules = []
    for r in rs.rules:
        red = _reduce_rule(r)
        if red is not None:
            rules.append(red)
    return RuleSet(rs.form, rules, dict(rs.meta))


# ---------------------------------------------------------------- display


def format_ruleset(rs: RuleSet) -> str:
    inner, outer = (" and ", " or ") if rs.form == DNF else (" or ", " and ")
    if not rs.rules:
        return "(false)" if rs.form == DNF else "(true)"
    parts = []
    for r in rs.rules:
        if not r:
            parts.append("(true)" if rs.form == DNF else "(false)")
        else:
            parts.append("(" + inner.join(str(l) for l in r) + ")")
    return outer.join(parts)


def literal_to_json(l: FeatureLiteral) -> dict:
    return {"binary_column": l.column, "source": l.name, "op": l.operator,
            "value": l.value, "positive": l.positive, "kind": l.kind}


def literal_from_json(d: dict) -> FeatureLiteral:
    pos = d["positive"]
    op = d["op"] if pos else NEGATED_OP[d["op"]]
    return FeatureLiteral(d["binary_column"], pos, d["source"], op, d["value"], d["kind"])


def ruleset_to_json(rs: RuleSet) -> dict:
    return {"form": rs.form, "text": format_ruleset(rs),
            "rules": [[literal_to_json(l) for l in r] for r in rs.rules],
            "meta": rs.meta}


def ruleset_from_json(d: dict) -> RuleSet:
    return RuleSet(d["form"], [tuple(literal_from_json(l) for l in r) for r in d["rules"]],
                   dict(d.get("meta", {})))


def literals_for(columns: Sequence[ColumnInfo]):
    """``lit(j, positive)`` factory bound to a dataset's column metadata."""
    def lit(j: int, positive: bool = True) -> FeatureLiteral:
        return FeatureLiteral.of(columns[j], j, positive)
    return lit
