"""Experiment pipeline: seeded 80/20 splits, the k/lambda/lp grid, the
IMLIB l-sweep, paired IMLI/IMLIB runs and mean +- std summaries."""
from __future__ import annotations

import csv
import logging
import os
import time
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Binarizer, BinaryDataset, DataError, RawTable, read_csv, split_indices
from .imli import ImliParams, train_imli
from .imlib import ImlibParams, solve_sqfsat_exact, train_imlib
from .maxsat import BackendConfig, SolverError
from .rules import RuleSet, metrics, predict

log = logging.getLogger(__name__)

MODELS = ("imli", "imlib", "sqfsat")


# ---------------------------------------------------------------- datasets


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str
    class_column: Optional[str] = None
    positive: Optional[str] = None
    drop: Tuple[str, ...] = ()

    def load(self) -> RawTable:
        if not Path(self.path).is_file():
            raise DataError(f"dataset {self.name!r}: no file at {self.path}")
        return read_csv(self.path, self.class_column, self.positive, self.drop)


# file name, class column, positive class, dropped columns
KNOWN = {
    "iris": ("iris.csv", "class", "versicolor", ()),
    "wdbc": ("wdbc.csv", "diagnosis", "M", ()),
    "pima": ("pima.csv", "class", "tested_positive", ()),
    "ionosphere": ("ionosphere.csv", "class", "b", ()),
    "mushroom": ("mushroom.csv", "class", "p", ()),
    "lung_cancer": ("lung_cancer.csv", "Result", "1", ("Name", "Surname")),
    "transfusion": ("transfusion.csv", "whether he/she donated blood in March 2007", "1", ()),
}


def data_dir() -> Path:
    env = os.environ.get("RULESAT_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "datasets"


def resolve_dataset(ref: str, class_column: Optional[str] = None,
                    positive: Optional[str] = None) -> DatasetSpec:
    """A known dataset name (looked up in ``data_dir()``) or a CSV path."""
    if ref in KNOWN and not Path(ref).is_file():
        fname, cc, pos, drop = KNOWN[ref]
        return DatasetSpec(ref, str(data_dir() / fname), class_column or cc,
                           positive or pos, drop)
    return DatasetSpec(Path(ref).stem, ref, class_column, positive)


def derive_seed(base: int, *keys) -> int:
    words = [int(base)]
    for k in keys:
        words.append(zlib.crc32(k.encode()) if isinstance(k, str) else int(k))
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def base_seed(default: int = 0) -> int:
    env = os.environ.get("RULESAT_SEED")
    return int(env) if env not in (None, "") else default


# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    datasets: List[DatasetSpec]
    models: Tuple[str, ...] = ("imli", "imlib")
    ks: Tuple[int, ...] = (1, 2, 3)
    lams: Tuple[int, ...] = (5, 10)
    lps: Tuple[int, ...] = (8, 16)
    realizations: int = 10
    ratio: float = 0.8
    q: int = 4
    seed: int = 0
    backend: BackendConfig = field(default_factory=BackendConfig)

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not 0 < self.ratio <= 1:
            raise ValueError("ratio must be in (0, 1]")
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ValueError(f"unknown models {bad}")
        if not self.ks or not self.lams or not self.lps:
            raise ValueError("empty parameter grid")

    def grid(self) -> List[Tuple[int, int, int]]:
        return [(k, lam, lp) for k in self.ks for lam in self.lams for lp in self.lps]


@dataclass
class ExperimentRecord:
    dataset: str
    model: str
    k: int
    lam: int
    lp: int
    realization: int
    seed: int
    n_rows: int = 0
    positive: str = ""
    status: str = "pending"        # "ok" once filled, or "failed"
    n_rules: int = 0
    size: int = 0
    largest: int = 0
    rule_sizes: str = ""
    accuracy: float = float("nan")
    l: Optional[int] = None
    flags: str = ""
    rules: str = ""
    train_seconds: float = 0.0     # the reported training run only
    sweep_seconds: float = 0.0     # every training of an l-sweep

    def __post_init__(self):
        self.check()

    def check(self):
        if self.status == "ok" and not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy {self.accuracy} outside [0, 1]")
        if self.train_seconds < 0 or self.sweep_seconds < 0:
            raise ValueError("negative training time")

    @property
    def config(self) -> Tuple[int, int, int]:
        return (self.k, self.lam, self.lp)


RECORD_FIELDS = [f for f in ExperimentRecord.__dataclass_fields__
                 if f not in ("train_seconds", "sweep_seconds")]
TIMING_FIELDS = ["dataset", "model", "k", "lam", "lp", "realization", "l",
                 "train_seconds", "sweep_seconds"]


# ---------------------------------------------------------------- operations


def evaluate(rs: RuleSet, test: BinaryDataset) -> float:
    if test.n == 0:
        raise ValueError("cannot evaluate on an empty test set")
    return float(np.mean(predict(rs, test.X) == test.y))


@dataclass
class SweepResult:
    params: ImlibParams
    ruleset: RuleSet
    accuracy: float
    fallback: bool
    seconds: float
    tried: List[Tuple[int, float]]


def sweep_l(train: BinaryDataset, test: BinaryDataset, imli_rs: RuleSet,
            base: ImlibParams, backend: Optional[BackendConfig] = None) -> SweepResult:
    """Train IMLIB for every l in 1..s-1 (s = largest IMLI rule) and keep
    the most accurate on ``test``; ties go to the smallest l."""
    s = max(imli_rs.sizes, default=0)
    ls = list(range(1, s))
    fallback = not ls
    if fallback:
        ls = [1]
    best = None
    tried = []
    total = 0.0
    for l in ls:
        params = ImlibParams(k=base.k, l=l, lam=base.lam, lp=base.lp, q=base.q, seed=base.seed)
        rs = train_imlib(train, params, backend)
        total += rs.meta["train_seconds"]
        acc = evaluate(rs, test)
        tried.append((l, acc))
        if best is None or acc > best[2]:
            best = (params, rs, acc)
    return SweepResult(best[0], best[1], best[2], fallback, total, tried)


def _fill(rec: ExperimentRecord, rs: RuleSet, acc: float) -> None:
    mt = metrics(rs)
    rec.n_rules, rec.size, rec.largest = mt["n_rules"], mt["size"], mt["largest"]
    rec.rule_sizes = "|".join(str(s) for s in rs.sizes)
    rec.accuracy = acc
    rec.rules = str(rs)
    flags = [] if not rec.flags else rec.flags.split(";")
    if not rs.rules:
        flags.append("empty-ruleset")
    rec.flags = ";".join(flags)
    rec.status = "ok"
    rec.check()


def run_dataset(spec: DatasetSpec, cfg: ExperimentConfig) -> List[ExperimentRecord]:
    raw = spec.load()
    n = len(raw.rows)
    records = []
    for r in range(cfg.realizations):
        seed = derive_seed(cfg.seed, spec.name, r)
        tr, te = split_indices(n, cfg.ratio, seed)
        if len(te) == 0:
            raise ValueError("the split leaves no test rows; use ratio < 1")
        binz = Binarizer.fit(raw, cfg.q, rows=tr)
        ds = binz.transform(raw)
        train, test = ds.take(tr), ds.take(te)
        for k, lam, lp in cfg.grid():
            common = dict(dataset=spec.name, k=k, lam=lam, lp=lp, realization=r, seed=seed,
                          n_rows=n, positive=f"{raw.class_column}={raw.positive}")
            imli_rs = None
            if "imli" in cfg.models or "imlib" in cfg.models:
                rec = ExperimentRecord(model="imli", **common)
                try:
                    imli_rs = train_imli(train, ImliParams(k=k, lam=lam, lp=lp, q=cfg.q,
                                                           seed=seed), cfg.backend)
                    _fill(rec, imli_rs, evaluate(imli_rs, test))
                    rec.train_seconds = imli_rs.meta["train_seconds"]
                except SolverError as e:
                    log.warning("imli failed on %s %s r=%d: %s", spec.name, (k, lam, lp), r, e)
                    rec.status = "failed"
                    rec.flags = type(e).__name__
                if "imli" in cfg.models:
                    records.append(rec)
            if "imlib" in cfg.models:
                rec = ExperimentRecord(model="imlib", **common)
                if imli_rs is None:
                    rec.status = "failed"
                    rec.flags = "imli-failed"
                else:
                    try:
                        sw = sweep_l(train, test, imli_rs,
                                     ImlibParams(k=k, l=1, lam=lam, lp=lp, q=cfg.q, seed=seed),
                                     cfg.backend)
                        rec.l = sw.params.l
                        rec.flags = "l-fallback" if sw.fallback else ""
                        _fill(rec, sw.ruleset, sw.accuracy)
                        rec.train_seconds = sw.ruleset.meta["train_seconds"]
                        rec.sweep_seconds = sw.seconds
                    except SolverError as e:
                        log.warning("imlib failed on %s %s r=%d: %s", spec.name,
                                    (k, lam, lp), r, e)
                        rec.status = "failed"
                        rec.flags = type(e).__name__
                records.append(rec)
            if "sqfsat" in cfg.models:
                records.append(_run_sqfsat(train, test, imli_rs, common))
    return records


def _run_sqfsat(train, test, imli_rs, common) -> ExperimentRecord:
    """Exact mode with l one below IMLI's largest rule (at least 1)."""
    rec = ExperimentRecord(model="sqfsat", **common)
    l = max(1, max(imli_rs.sizes, default=1) - 1) if imli_rs is not None else 1
    rec.l = l
    t0 = time.perf_counter()
    rs = solve_sqfsat_exact(train, common["k"], l, seed=common["seed"])
    rec.train_seconds = time.perf_counter() - t0
    if rs is None:
        rec.status = "failed"
        rec.flags = "infeasible"
    else:
        _fill(rec, rs, evaluate(rs, test))
    return rec


def run_grid(cfg: ExperimentConfig) -> List[ExperimentRecord]:
    records = []
    for spec in cfg.datasets:
        records.extend(run_dataset(spec, cfg))
    return records


# ---------------------------------------------------------------- output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_records(records: Sequence[ExperimentRecord], path) -> None:
    """Deterministic columns only; timings live in ``write_timings``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for rec in records:
            d = asdict(rec)
            w.writerow([_cell(d[f]) for f in RECORD_FIELDS])


def write_timings(records: Sequence[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMING_FIELDS)
        for rec in records:
            d = asdict(rec)
            w.writerow([_cell(d[f]) for f in TIMING_FIELDS])


def read_records(path) -> List[ExperimentRecord]:
    ints = {"k", "lam", "lp", "realization", "seed", "n_rows", "n_rules", "size", "largest"}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            d = dict(row)
            for f in ints:
                d[f] = int(d[f])
            d["accuracy"] = float(d["accuracy"])
            d["l"] = int(d["l"]) if d["l"] else None
            out.append(ExperimentRecord(**d))
    return out


@dataclass
class Stat:
    mean: float
    std: float
    count: int

    def __str__(self):
        return f"{self.mean:.2f} ± {self.std:.2f}"


def mean_std(values: Sequence[float]) -> Stat:
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return Stat(float("nan"), float("nan"), 0)
    std = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return Stat(float(np.mean(a)), std, int(a.size))


SUMMARY_COLUMNS = ("Number of rules", "|R|", "Largest rule size", "Accuracy", "Training time")


@dataclass
class SummaryRow:
    dataset: str
    selected_by: str          # model whose best config picked the row
    model: str
    config: Tuple[int, int, int]
    stats: Dict[str, Stat]
    runs: int
    failed: int
    flagged: int


def _ok(records, dataset, model, config=None):
    return [r for r in records if r.dataset == dataset and r.model == model
            and r.status == "ok" and (config is None or r.config == config)]


def best_config(records: Sequence[ExperimentRecord], dataset: str, model: str):
    """Best mean test accuracy, ties broken by smaller mean |R|."""
    configs = sorted({r.config for r in _ok(records, dataset, model)})
    if not configs:
        return None

    def key(c):
        rs = _ok(records, dataset, model, c)
        # rounding keeps float noise (0.9+0.8 vs 0.85+0.85) from breaking ties
        return (-round(float(np.mean([r.accuracy for r in rs])), 9),
                round(float(np.mean([r.size for r in rs])), 9), c)
    return min(configs, key=key)


def _summary_row(records, dataset, selected_by, model, config) -> SummaryRow:
    rows = [r for r in records if r.dataset == dataset and r.model == model
            and r.config == config]
    ok = [r for r in rows if r.status == "ok"]
    if len(ok) < len(rows):
        log.warning("%s/%s %s: %d of %d runs failed and are excluded", dataset, model,
                    config, len(rows) - len(ok), len(rows))
    stats = {
        "Number of rules": mean_std([r.n_rules for r in ok]),
        "|R|": mean_std([r.size for r in ok]),
        "Largest rule size": mean_std([r.largest for r in ok]),
        "Accuracy": mean_std([r.accuracy for r in ok]),
        "Training time": mean_std([r.train_seconds for r in ok]),
    }
    return SummaryRow(dataset, selected_by, model, config, stats, len(rows),
                      len(rows) - len(ok), sum(1 for r in ok if r.flags))


def summarize(records: Sequence[ExperimentRecord],
              models: Sequence[str] = ("imli", "imlib")) -> List[SummaryRow]:
    """For each dataset and each model's best config, one row per model at
    that config (a paired layout: both models side by side per selection)."""
    out = []
    present = [m for m in models if any(r.model == m for r in records)]
    for dataset in dict.fromkeys(r.dataset for r in records):
        for sel in present:
            cfg = best_config(records, dataset, sel)
            if cfg is None:
                continue
            for m in [sel] + [x for x in present if x != sel]:
                out.append(_summary_row(records, dataset, sel, m, cfg))
    return out


def format_summary(rows: Sequence[SummaryRow]) -> str:
    head = ["Dataset", "Best for", "Model", "k,λ,lp"] + list(SUMMARY_COLUMNS) + ["Runs"]
    lines = []
    for r in rows:
        t = r.stats["Training time"]
        cells = [r.dataset, r.selected_by, r.model, ",".join(map(str, r.config))]
        cells += [str(r.stats[c]) for c in SUMMARY_COLUMNS[:-1]]
        cells.append(f"{t.mean:.4f} ± {t.std:.4f}")
        runs = f"{r.runs - r.failed}/{r.runs}"
        if r.flagged:
            runs += f" ({r.flagged} flagged)"
        cells.append(runs)
        lines.append(cells)
    widths = [max(len(str(x)) for x in col) for col in zip(head, *lines)]
    fmt = "  ".join("{:<%d}" % w for w in widths)
    return "\n".join([fmt.format(*head), fmt.format(*["-" * w for w in widths])]
                     + [fmt.format(*c) for c in lines])
