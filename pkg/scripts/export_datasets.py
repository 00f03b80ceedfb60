"""Export the benchmark CSVs under datasets/.

Needs scikit-learn (iris, wdbc) and the keel-ds wheel (pima, ionosphere,
mushroom); neither is a runtime dependency of the package.

    python3 scripts/export_datasets.py [--keel-wheel PATH]
"""
from __future__ import annotations

import argparse
import csv
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "datasets"

PIMA = ["pregnancies", "glucose", "blood_pressure", "skin_thickness", "insulin", "bmi",
        "pedigree", "age", "class"]
MUSHROOM = ["cap-shape", "cap-surface", "cap-color", "bruises", "odor", "gill-attachment",
            "gill-spacing", "gill-size", "gill-color", "stalk-shape", "stalk-root",
            "stalk-surface-above-ring", "stalk-surface-below-ring", "stalk-color-above-ring",
            "stalk-color-below-ring", "veil-type", "veil-color", "ring-number", "ring-type",
            "spore-print-color", "population", "habitat", "class"]
# KEEL drops the constant second attribute
IONOSPHERE = ["a1"] + [f"a{i}" for i in range(3, 35)] + ["class"]


def write(name, header, rows):
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"{name}: {len(rows)} rows")


def sklearn_sets():
    from sklearn.datasets import load_breast_cancer, load_iris
    iris = load_iris()
    header = [c.replace(" (cm)", "").replace(" ", "_") for c in iris.feature_names] + ["class"]
    write("iris", header, [[*map(float, x), iris.target_names[t]]
                           for x, t in zip(iris.data, iris.target)])
    bc = load_breast_cancer()
    header = [c.replace(" ", "_") for c in bc.feature_names] + ["diagnosis"]
    write("wdbc", header, [[*map(float, x), "B" if t else "M"] for x, t in zip(bc.data, bc.target)])


def keel_sets(wheel):
    z = zipfile.ZipFile(wheel)
    for name, header in [("pima", PIMA), ("ionosphere", IONOSPHERE), ("mushroom", MUSHROOM)]:
        text = z.read(f"keel_ds/data/balanced/raw/{name}.dat").decode()
        rows = [line.split(",") for line in text.splitlines()
                if line.strip() and not line.startswith("@")]
        rows = [[c.strip() for c in r] for r in rows]
        assert all(len(r) == len(header) for r in rows), name
        write(name, header, rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--keel-wheel", default="/tmp/dl/keel_ds-0.2.5-py3-none-any.whl")
    args = ap.parse_args()
    OUT.mkdir(exist_ok=True)
    sklearn_sets()
    keel_sets(args.keel_wheel)


if __name__ == "__main__":
    main()
