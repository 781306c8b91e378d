"""End-to-end demo on a synthetic 3-cluster dataset.

Generates the data, runs a short evolutionary search through the CLI, and
leaves all report files in out/synthetic/.
"""
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gpembed.cli import main  # noqa: E402

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "out", "synthetic")


def write_dataset(path, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for c in range(3):
        center = np.zeros(10)
        center[0] = c * 8.0
        center[1] = (c % 2) * 8.0
        rows.append(center + rng.normal(0.0, 1.0, size=(100, 10)))
        labels.extend([f"cluster_{c}"] * 100)
    X = np.vstack(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"x{j}" for j in range(10)) + ",cls\n")
        for row, label in zip(X, labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label}\n")


if __name__ == "__main__":
    os.makedirs(OUT_DIR, exist_ok=True)
    data_path = os.path.join(OUT_DIR, "clusters.csv")
    write_dataset(data_path)
    sys.exit(main([
        "run",
        "--data", data_path,
        "--label-col", "cls",
        "--out", OUT_DIR,
        "--seed", "42",
        "--generations", "50",
        "--population", "32",
    ]))
