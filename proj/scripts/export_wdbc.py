#!/usr/bin/env python3
"""Export the Wisconsin Diagnostic Breast Cancer dataset to data/wdbc.csv.

Uses the copy bundled with scikit-learn (569 examples, 30 features). The
label column holds the classic M/B diagnosis codes.
"""
import csv
import pathlib

from sklearn.datasets import load_breast_cancer


def main() -> None:
    ds = load_breast_cancer()
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "wdbc.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    # sklearn target: 0 = malignant, 1 = benign
    code = {0: "M", 1: "B"}
    names = [n.replace(" ", "_") for n in ds.feature_names]
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["diagnosis"] + names)
        for target, row in zip(ds.target, ds.data):
            w.writerow([code[int(target)]] + [repr(float(v)) for v in row])
    print(f"wrote {out} ({len(ds.data)} rows, {len(names)} features)")


if __name__ == "__main__":
    main()
