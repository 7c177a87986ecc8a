#!/usr/bin/env python3
"""Download the benchmark datasets into data/ as plain CSV files.

Requires scikit-learn (for fetch_openml) and network access to openml.org.
The CSVs produced here pair with the recipes in specs/:

  data/ionosphere.csv  header a01..a34,class   class in {g, b}
  data/pima.csv        header a01..a08,class   class in {0, 1}
  data/spambase.csv    header a01..a57,class   class in {0, 1}
  data/wilt.csv        header a01..a05,class   class in {n, w}

Run from the repository root:  python3 scripts/fetch_data.py
"""

import sys
from pathlib import Path

try:
    from sklearn.datasets import fetch_openml
except ImportError:
    sys.exit("scikit-learn is required: pip install scikit-learn")

OUT_DIR = Path(__file__).resolve().parent.parent / "data"

# name -> (openml dataset name, openml version, label normalization)
DATASETS = {
    "ionosphere": ("ionosphere", 1, lambda v: str(v)),
    "pima": ("diabetes", 1, lambda v: "1" if str(v) == "tested_positive" else "0"),
    "spambase": ("spambase", 1, lambda v: str(int(float(v)))),
    "wilt": ("wilt", 2, lambda v: "w" if str(v) in ("w", "1") else "n"),
}


def fetch(name: str) -> None:
    openml_name, version, normalize = DATASETS[name]
    print(f"fetching {name} (openml '{openml_name}' v{version}) ...")
    bunch = fetch_openml(name=openml_name, version=version, as_frame=True, parser="auto")
    frame = bunch.frame
    target_col = bunch.target_names[0] if bunch.target_names else "class"

    feature_cols = [c for c in frame.columns if c != target_col]
    out_path = OUT_DIR / f"{name}.csv"
    with out_path.open("w", encoding="utf-8") as out:
        header = [f"a{i + 1:02d}" for i in range(len(feature_cols))] + ["class"]
        out.write(",".join(header) + "\n")
        for _, row in frame.iterrows():
            values = [repr(float(row[c])) for c in feature_cols]
            values.append(normalize(row[target_col]))
            out.write(",".join(values) + "\n")
    print(f"  wrote {out_path} ({len(frame)} rows, {len(feature_cols)} features)")


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    names = sys.argv[1:] or ["ionosphere", "pima"]
    unknown = [n for n in names if n not in DATASETS]
    if unknown:
        sys.exit(f"unknown dataset(s) {unknown}; available: {sorted(DATASETS)}")
    for name in names:
        fetch(name)


if __name__ == "__main__":
    main()
