"""Rebuild an a9a-style LIBSVM file from the raw UCI Adult training data.

The a9a benchmark set is UCI Adult with every attribute one-hot encoded
into 123 binary features: the five continuous attributes age, fnlwgt,
education-num and hours-per-week are cut into quintiles, capital-gain and
capital-loss into zero / nonzero, and each categorical attribute gets one
column per value in the order listed in ``adult.names``. Missing values
('?') produce no feature. Labels are ``+1`` for ">50K" and ``-1`` otherwise.

Quintile edges are estimated from the training and test rows together, so
the result matches the published file in layout and size (n = 32561,
p = 123) but bin edges may differ slightly from the original preprocessing.

Usage: python scripts/adult_to_a9a.py ADULT_DATA ADULT_TEST OUT.gz
"""

import argparse
import csv
import gzip

import numpy as np

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, "
    "Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, "
    "Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, "
    "Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, "
    "Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), "
    "India, Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, "
    "Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, "
    "Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}
CATEGORIES = {k: [s.strip() for s in v.split(",")] for k, v in CATEGORIES.items()}

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status", "occupation",
    "relationship", "race", "sex", "capital-gain", "capital-loss", "hours-per-week", "native-country",
]
QUINTILE = {"age", "fnlwgt", "education-num", "hours-per-week"}
BINARY = {"capital-gain", "capital-loss"}


def read_rows(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh, skipinitialspace=True):
            if len(rec) != 15:
                continue  # blank lines and the test file's header
            rows.append(rec)
    return rows


def width(col):
    if col in QUINTILE:
        return 5
    if col in BINARY:
        return 2
    return len(CATEGORIES[col])


def encode(rows, edges):
    lines = []
    for rec in rows:
        label = "+1" if rec[14].rstrip(".") == ">50K" else "-1"
        feats, offset = [], 0
        for col, raw in zip(COLUMNS, rec[:14]):
            if raw != "?":
                if col in QUINTILE:
                    pos = int(np.searchsorted(edges[col], float(raw), side="right"))
                elif col in BINARY:
                    pos = int(float(raw) != 0)
                else:
                    pos = CATEGORIES[col].index(raw)
                feats.append(offset + pos + 1)
            offset += width(col)
        lines.append(" ".join([label, *(f"{j}:1" for j in feats)]))
    return lines


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("train")
    ap.add_argument("test")
    ap.add_argument("out")
    args = ap.parse_args()
    train, test = read_rows(args.train), read_rows(args.test)
    edges = {}
    for col in QUINTILE:
        k = COLUMNS.index(col)
        vals = np.array([float(r[k]) for r in train + test])
        edges[col] = np.quantile(vals, [0.2, 0.4, 0.6, 0.8])
    text = "\n".join(encode(train, edges)) + "\n"
    with gzip.GzipFile(args.out, "wb", mtime=0) as fh:
        fh.write(text.encode("ascii"))
    print(f"wrote {len(train)} rows, {sum(width(c) for c in COLUMNS)} features to {args.out}")


if __name__ == "__main__":
    main()
