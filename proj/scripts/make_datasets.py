#!/usr/bin/env python3
"""Regenerate data/breast_cancer.csv and data/redwine.csv.

breast_cancer.csv: the ten "mean" measurements of the Wisconsin Diagnostic
Breast Cancer set as bundled with scikit-learn, plus the diagnosis.

redwine.csv: the UCI red wine quality set. It is reassembled from the KEEL
subsets shipped in the `imbalanced_databases` wheel: `winequality-red-4`
holds every row in the original order (label: quality 4 vs rest), and the
3-vs-5, 8-vs-6 and 8-vs-6/7 subsets are order-preserving subsequences that
pin down the remaining quality grades.

Usage:
    pip download --no-deps imbalanced_databases==0.1.1 -d /tmp/wheels
    python3 scripts/make_datasets.py --wheel /tmp/wheels/imbalanced_databases-0.1.1-py3-none-any.whl
"""

import argparse
import collections
import csv
import io
import pathlib
import zipfile

import sklearn

BC_NAMES = [
    "radius", "texture", "perimeter", "area", "smoothness", "compactness",
    "concavity", "concave_points", "symmetry", "fractal_dimension",
]
RW_NAMES = [
    "fixed_acidity", "volatile_acidity", "citric_acid", "residual_sugar",
    "chlorides", "free_sulfur_dioxide", "total_sulfur_dioxide", "density",
    "ph", "sulphates", "alcohol",
]


def breast_cancer(out):
    src = pathlib.Path(sklearn.__file__).parent / "datasets/data/breast_cancer.csv"
    rows = list(csv.reader(open(src)))
    names = {"0": "malignant", "1": "benign"}
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BC_NAMES + ["class"])
        for r in rows[1:]:
            w.writerow(r[:10] + [names[r[-1]]])


def keel_rows(wheel, name):
    text = wheel.read(f"imbalanced_databases/data/{name}/{name}.dat").decode()
    out = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        cells = [c.strip() for c in line.split(",")]
        out.append((tuple(cells[:-1]), cells[-1] == "positive"))
    return out


def redwine(wheel_path, out):
    wheel = zipfile.ZipFile(wheel_path)
    full = keel_rows(wheel, "winequality-red-4")
    label = [4 if pos else None for _, pos in full]

    def align(subset, pos_label, neg_label, accepts):
        j = 0
        for i, (feats, _) in enumerate(full):
            if j < len(subset) and accepts(label[i]) and feats == subset[j][0]:
                if label[i] is None:
                    label[i] = pos_label if subset[j][1] else neg_label
                j += 1
        assert j == len(subset), "subset is not a subsequence of the full set"

    align(keel_rows(wheel, "winequality-red-3_vs_5"), 3, 5, lambda l: l is None)
    align(keel_rows(wheel, "winequality-red-8_vs_6"), 8, 6, lambda l: l is None)
    align(keel_rows(wheel, "winequality-red-8_vs_6-7"), 8, 7, lambda l: l in (None, 6, 8))

    counts = collections.Counter(label)
    assert counts == {5: 681, 6: 638, 7: 199, 4: 53, 8: 18, 3: 10}, counts
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RW_NAMES + ["class"])
        for (feats, _), l in zip(full, label):
            w.writerow(list(feats) + [l])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", required=True, help="imbalanced_databases wheel")
    ap.add_argument("--out-dir", default=str(pathlib.Path(__file__).parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    breast_cancer(out / "breast_cancer.csv")
    redwine(args.wheel, out / "redwine.csv")


if __name__ == "__main__":
    main()
