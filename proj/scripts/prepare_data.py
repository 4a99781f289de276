#!/usr/bin/env python3
"""Write the two real-data CSVs used by the example workflows.

diabetes.csv       442 rows, 10 baseline covariates + progression response
                   (sklearn's copy of the Efron et al. LARS data, unscaled).
breast_cancer.csv  Wisconsin breast cancer data (MASS::biopsy layout, 699 rows).
                   Rows with a missing bare-nuclei value are dropped (683 remain);
                   the response `malignant` is 1 for malignant, 0 for benign.

Usage: prepare_data.py OUT_DIR [--biopsy PATH_TO_biopsy.csv]
"""
import argparse
import csv
import pathlib


def write_diabetes(out: pathlib.Path) -> None:
    from sklearn.datasets import load_diabetes

    d = load_diabetes(scaled=False)
    names = ["age", "sex", "bmi", "map", "tc", "ldl", "hdl", "tch", "ltg", "glu"]
    with open(out / "diabetes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["y"])
        for row, target in zip(d.data, d.target):
            w.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def write_breast_cancer(out: pathlib.Path, biopsy: pathlib.Path) -> None:
    names = ["clump", "cell_size", "cell_shape", "adhesion", "epithelial",
             "bare_nuclei", "chromatin", "nucleoli", "mitoses"]
    with open(biopsy, newline="") as fh, open(out / "breast_cancer.csv", "w", newline="") as oh:
        r = csv.DictReader(fh)
        w = csv.writer(oh)
        w.writerow(names + ["malignant"])
        for row in r:
            vals = [row[f"V{i}"] for i in range(1, 10)]
            if any(v in ("NA", "") for v in vals):
                continue
            w.writerow(vals + ["1" if row["class"] == "malignant" else "0"])


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--biopsy")
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_diabetes(out)
    if args.biopsy:
        write_breast_cancer(out, pathlib.Path(args.biopsy))


if __name__ == "__main__":
    main()
