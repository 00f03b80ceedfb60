"""Command line entry point: ``rulesat <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dataset import Binarizer, DataError, make_partitions, split_indices
from .harness import (MODELS, ExperimentConfig, base_seed, evaluate, format_summary,
                      resolve_dataset, run_grid, summarize, write_records, write_timings)
from .imli import ImliParams, encode_partition as imli_encode, state_from as imli_state
from .imli import train_imli
from .imlib import ImlibParams, encode_partition as imlib_encode, state_from as imlib_state
from .imlib import solve_sqfsat_exact, train_imlib
from .maxsat import BackendConfig, SolverError, emit_wcnf, solve
from .rules import metrics, predict, ruleset_from_json, ruleset_to_json


def _backend(args) -> BackendConfig:
    return BackendConfig(backend=args.backend, command=args.solver_cmd,
                         dialect=args.wcnf_dialect, time_limit=args.time_limit,
                         seed=args.seed)


def _add_data(p):
    p.add_argument("data", help="CSV path or a known dataset name (iris, wdbc, ...)")
    p.add_argument("--class-col", help="class column (default: last column)")
    p.add_argument("--positive", help="class value mapped to y=1")


def _add_learner(p, grid=False):
    if grid:
        p.add_argument("--model", default="imli,imlib",
                       help="comma-separated subset of " + ",".join(MODELS))
        p.add_argument("-k", type=int, nargs="+", default=[1, 2, 3])
        p.add_argument("--lambda", dest="lam", type=int, nargs="+", default=[5, 10])
        p.add_argument("--lp", type=int, nargs="+", default=[8, 16])
    else:
        p.add_argument("--model", choices=MODELS, default="imlib")
        p.add_argument("-k", type=int, default=2)
        p.add_argument("-l", type=int, default=2, help="literals per rule (imlib, sqfsat)")
        p.add_argument("--lambda", dest="lam", type=int, default=10)
        p.add_argument("--lp", type=int, default=16)
    p.add_argument("-q", type=int, default=4, help="quantiles per ordinal feature")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (default: $RULESAT_SEED or 0)")


def _add_backend(p):
    p.add_argument("--backend", choices=("embedded", "external"), default="embedded")
    p.add_argument("--solver-cmd", help="external solver command; {wcnf} marks the path")
    p.add_argument("--wcnf-dialect", choices=("classic", "mse22"), default="classic")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solver call")


def _load(args):
    spec = resolve_dataset(args.data, args.class_col, args.positive)
    return spec, spec.load()


def _train_rows(args, n):
    if args.ratio >= 1:
        return np.arange(n), np.arange(0)
    return split_indices(n, args.ratio, args.seed)


def cmd_binarize(args):
    spec, raw = _load(args)
    binz = Binarizer.fit(raw, args.q)
    ds = binz.transform(raw)
    out = Path(args.out or spec.name)
    ds.dump(f"{out}.bin.csv", f"{out}.labels.json")
    with open(f"{out}.binarizer.json", "w") as fh:
        json.dump(binz.to_json(), fh, indent=1)
    print(f"{spec.name}: {ds.n} rows, {ds.m} binary columns -> {out}.bin.csv")
    return 0


def _fit(args, train):
    backend = _backend(args)
    if args.model == "imli":
        return train_imli(train, ImliParams(k=args.k, lam=args.lam, lp=args.lp, q=args.q,
                                            seed=args.seed), backend)
    if args.model == "imlib":
        return train_imlib(train, ImlibParams(k=args.k, l=args.l, lam=args.lam, lp=args.lp,
                                              q=args.q, seed=args.seed), backend)
    rs = solve_sqfsat_exact(train, args.k, args.l, seed=args.seed)
    if rs is None:
        raise SolverError(f"no {args.k}-rule DNF with at most {args.l} literals per rule "
                          "classifies the training rows exactly")
    return rs


def cmd_train(args):
    spec, raw = _load(args)
    tr, te = _train_rows(args, len(raw.rows))
    binz = Binarizer.fit(raw, args.q, rows=tr)
    ds = binz.transform(raw)
    train = ds.take(tr)
    rs = _fit(args, train)
    mt = metrics(rs)
    print(rs)
    print(f"rules={mt['n_rules']} |R|={mt['size']} largest={mt['largest']} "
          f"train_accuracy={evaluate(rs, train):.4f}", end="")
    if len(te):
        print(f" test_accuracy={evaluate(rs, ds.take(te)):.4f}", end="")
    print(f" seconds={rs.meta.get('train_seconds', 0.0):.3f}")
    if not rs.rules:
        print("warning: every rule was removed; the model predicts the negative class",
              file=sys.stderr)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"model": args.model, "dataset": spec.name,
                       "binarizer": binz.to_json(), "ruleset": ruleset_to_json(rs)},
                      fh, indent=1, ensure_ascii=False)
    return 0


def _model_and_data(args):
    with open(args.model_file) as fh:
        d = json.load(fh)
    binz = Binarizer.from_json(d["binarizer"])
    rs = ruleset_from_json(d["ruleset"])
    spec = resolve_dataset(args.data, binz.class_column, str(binz.positive))
    raw = spec.load()
    return rs, binz.transform(raw)


def cmd_predict(args):
    rs, ds = _model_and_data(args)
    pred = predict(rs, ds.X)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["row", "prediction"])
        for i, p in enumerate(pred.tolist()):
            w.writerow([i, p])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_eval(args):
    rs, ds = _model_and_data(args)
    print(f"accuracy={evaluate(rs, ds):.4f} rows={ds.n}")
    return 0


def cmd_grid(args):
    specs = [resolve_dataset(d, args.class_col, args.positive) for d in args.data]
    models = tuple(m.strip() for m in args.model.split(",") if m.strip())
    cfg = ExperimentConfig(specs, models=models, ks=tuple(args.k), lams=tuple(args.lam),
                           lps=tuple(args.lp), realizations=args.realizations,
                           ratio=args.ratio, q=args.q, seed=args.seed, backend=_backend(args))
    records = run_grid(cfg)
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / "records.csv")
    write_timings(records, out / "timings.csv")
    table = format_summary(summarize(records, models))
    (out / "summary.txt").write_text(table + "\n")
    print(table)
    return 0


def cmd_emit_wcnf(args):
    _, raw = _load(args)
    tr, _ = _train_rows(args, len(raw.rows))
    ds = Binarizer.fit(raw, args.q, rows=tr).transform(raw).take(tr)
    y = 1 - ds.y if args.model == "imli" else ds.y
    if args.model == "imli":
        params = ImliParams(k=args.k, lam=args.lam, lp=args.lp, q=args.q, seed=args.seed)
        encode, state = imli_encode, imli_state
    elif args.model == "imlib":
        params = ImlibParams(k=args.k, l=args.l, lam=args.lam, lp=args.lp, q=args.q,
                             seed=args.seed)
        encode, state = imlib_encode, imlib_state
    else:
        print("emit-wcnf supports --model imli or imlib", file=sys.stderr)
        return 2
    plan = list(make_partitions(ds, args.lp, args.seed))
    if not 0 <= args.partition < len(plan):
        print(f"partition index must be in 0..{len(plan) - 1}", file=sys.stderr)
        return 2
    prior = None
    for t in range(args.partition):
        rows = list(plan[t])
        inst, vm = encode(ds.X[rows], y[rows], params, prior)
        prior = state(solve(inst, BackendConfig(seed=args.seed)).assignment, vm, t + 1)
    rows = list(plan[args.partition])
    inst, _ = encode(ds.X[rows], y[rows], params, prior)
    text = emit_wcnf(inst, args.wcnf_dialect)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{inst.nvars} vars, {len(inst.hard)} hard, {len(inst.soft)} soft -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rulesat", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("binarize", help="binarize a CSV and dump the 0/1 matrix")
    _add_data(p)
    p.add_argument("-q", type=int, default=4)
    p.add_argument("--out", help="output prefix")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("train", help="learn a rule set and print it")
    _add_data(p)
    _add_learner(p)
    _add_backend(p)
    p.add_argument("--ratio", type=float, default=1.0, help="train fraction (rest is test)")
    p.add_argument("--out", help="write the model JSON here")
    p.set_defaults(func=cmd_train)

    for name, fn, text in (("predict", cmd_predict, "predict rows with a saved model"),
                           ("eval", cmd_eval, "accuracy of a saved model")):
        p = sub.add_parser(name, help=text)
        p.add_argument("model_file")
        p.add_argument("data")
        if name == "predict":
            p.add_argument("--out")
        p.set_defaults(func=fn)

    p = sub.add_parser("grid", help="paired grid experiment with mean ± std summary")
    p.add_argument("data", nargs="+")
    p.add_argument("--class-col")
    p.add_argument("--positive")
    _add_learner(p, grid=True)
    _add_backend(p)
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--out", help="output directory (default: results)")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("emit-wcnf", help="write one partition's MaxSAT instance")
    _add_data(p)
    _add_learner(p)
    _add_backend(p)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--partition", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_emit_wcnf)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "seed") and args.seed is None:
        args.seed = base_seed()
    try:
        return args.func(args)
    except (DataError, SolverError, ValueError, OSError) as e:
        print(f"rulesat: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
