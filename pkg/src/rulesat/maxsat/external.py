"""Bridge to an external MaxSAT solver process."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

from ..proplogic import WcnfInstance
from .engine import BackendConfig, ExternalSolverError, ExternalSolverTimeout, SolveResult
from .wcnf import emit_wcnf, parse_external_result


def build_command(template: str, path: str) -> list:
    """Substitute the instance path into the command template.

    ``{wcnf}`` (or ``{}``) marks the path; without a marker it is appended.
    """
    args = shlex.split(template)
    if any("{wcnf}" in a or "{}" in a for a in args):
        return [a.replace("{wcnf}", path).replace("{}", path) for a in args]
    return args + [path]


def solve_external(inst: WcnfInstance, cfg: BackendConfig) -> SolveResult:
    fd, path = tempfile.mkstemp(suffix=".wcnf", prefix="rulesat-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(emit_wcnf(inst, cfg.dialect))
        cmd = build_command(cfg.command, path)
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=cfg.time_limit)
        except subprocess.TimeoutExpired:
            raise ExternalSolverTimeout(f"external solver exceeded {cfg.time_limit}s") from None
        except OSError as e:
            raise ExternalSolverError(f"cannot run external solver: {e}") from None
        # exit codes vary between solvers (10/20/30 conventions); status lines decide
        if not any(l.startswith("s ") for l in proc.stdout.splitlines()):
            raise ExternalSolverError(
                f"external solver produced no status line (exit {proc.returncode}): "
                f"{proc.stderr.strip()[:200]}")
        return parse_external_result(proc.stdout, inst.nvars)
    finally:
        os.unlink(path)
