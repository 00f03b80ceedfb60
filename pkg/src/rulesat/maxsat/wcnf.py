"""WCNF text in the classic (``p wcnf`` header + top weight) and the
MaxSAT Evaluation 2022 (``h`` prefix, no header) dialects, plus parsing of
solver output in MaxSAT Evaluation conventions."""
from __future__ import annotations

import logging
from typing import List, Optional

from ..proplogic import WcnfInstance
from .engine import HARD_UNSAT, OPTIMAL, MalformedSolverOutput, SolveResult

log = logging.getLogger(__name__)


def _clause_text(c) -> str:
    return " ".join(str(l) for l in c) + (" 0" if c else "0")


def emit_wcnf(inst: WcnfInstance, dialect: str = "classic") -> str:
    lines = []
    if dialect == "classic":
        top = inst.top_weight
        lines.append(f"p wcnf {inst.nvars} {len(inst.hard) + len(inst.soft)} {top}")
        for c in inst.hard:
            lines.append(f"{top} {_clause_text(c)}")
    elif dialect == "mse22":
        for c in inst.hard:
            lines.append(f"h {_clause_text(c)}")
    else:
        raise ValueError(f"unknown WCNF dialect {dialect!r}")
    for w, c in inst.soft:
        lines.append(f"{w} {_clause_text(c)}")
    return "\n".join(lines) + "\n"


def parse_wcnf(text: str) -> WcnfInstance:
    """Read either dialect; the dialect is recognised from the content."""
    inst = WcnfInstance()
    top: Optional[int] = None
    nvars = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "wcnf":
                raise ValueError(f"line {lineno}: unsupported header {line!r}")
            nvars = int(parts[2])
            top = int(parts[4]) if len(parts) > 4 else None
            continue
        toks = line.split()
        if toks[-1] != "0":
            raise ValueError(f"line {lineno}: clause not 0-terminated")
        lits = tuple(int(t) for t in toks[1:-1])
        if toks[0] == "h":
            inst.hard.append(lits)
        else:
            w = int(toks[0])
            if top is not None and w >= top:
                inst.hard.append(lits)
            else:
                inst.soft.append((w, lits))
        for l in lits:
            nvars = max(nvars, abs(l))
    inst.nvars = nvars
    return inst


def parse_external_result(text: str, nvars: Optional[int] = None) -> SolveResult:
    status = None
    cost = None
    values: List[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s "):
            status = line[2:].strip().upper()
        elif line.startswith("o "):
            try:
                cost = int(line.split()[1])
            except (IndexError, ValueError):
                raise MalformedSolverOutput(f"bad cost line {line!r}") from None
        elif line.startswith("v"):
            values.extend(line[1:].split())
    if status is None:
        raise MalformedSolverOutput("solver output has no status line")
    if status == "UNSATISFIABLE":
        return SolveResult(HARD_UNSAT)
    if status not in ("OPTIMUM FOUND",):
        raise MalformedSolverOutput(f"unexpected status {status!r}")
    if not values:
        raise MalformedSolverOutput("optimum reported without a value line")
    # "v 0110" (one bit per variable) vs signed literals; a lone "1"/"0"
    # token is a bit string only when the instance has a single variable
    if len(values) == 1 and set(values[0]) <= {"0", "1"} and (len(values[0]) > 1 or nvars == 1):
        bits = values[0]
        if nvars is not None and len(bits) != nvars:
            raise MalformedSolverOutput(f"value line has {len(bits)} bits, expected {nvars}")
        assignment = [False] + [b == "1" for b in bits]
    else:
        lits = [int(t) for t in values]
        if lits and lits[-1] == 0:
            lits = lits[:-1]
        n = nvars if nvars is not None else max((abs(l) for l in lits), default=0)
        assignment = [False] * (n + 1)
        seen = set()
        for l in lits:
            if abs(l) > n:
                raise MalformedSolverOutput(f"literal {l} exceeds {n} variables")
            assignment[abs(l)] = l > 0
            seen.add(abs(l))
        if nvars is not None and len(seen) != nvars:
            raise MalformedSolverOutput(f"value line assigns {len(seen)} of {nvars} variables")
    return SolveResult(OPTIMAL, assignment, cost)
