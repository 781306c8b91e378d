"""Wine benchmark run at a desk-scale budget (one seed, 200 generations).

Reports land in out/wine/; expect low-cost individuals with around 90%
KNN accuracy at complexities well under 100.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gpembed.cli import main  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..")

if __name__ == "__main__":
    sys.exit(main([
        "run",
        "--data", os.path.join(ROOT, "data", "wine.csv"),
        "--label-col", "class",
        "--out", os.path.join(ROOT, "out", "wine"),
        "--seed", "1",
        "--generations", "200",
        "--population", "64",
    ]))
