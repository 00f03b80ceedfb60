"""Stand-alone MaxSAT solver speaking MaxSAT Evaluation output conventions.

    python -m rulesat.maxsat instance.wcnf [--binary-values]
"""
import argparse
import sys

from .engine import solve
from .wcnf import parse_wcnf


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m rulesat.maxsat")
    ap.add_argument("wcnf")
    ap.add_argument("--binary-values", action="store_true",
                    help="print the model as a 0/1 string instead of signed literals")
    args = ap.parse_args(argv)
    with open(args.wcnf) as fh:
        inst = parse_wcnf(fh.read())
    res = solve(inst)
    if not res.optimal:
        print("s UNSATISFIABLE")
        return 20
    print(f"o {res.cost}")
    print("s OPTIMUM FOUND")
    a = res.assignment
    if args.binary_values:
        print("v " + "".join("1" if a[v] else "0" for v in range(1, inst.nvars + 1)))
    else:
        print("v " + " ".join(str(v if a[v] else -v) for v in range(1, inst.nvars + 1)))
    return 30


if __name__ == "__main__":
    sys.exit(main())
