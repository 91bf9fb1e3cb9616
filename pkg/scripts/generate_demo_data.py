"""Regenerates src/fpt/data/thyroid_demo.csv.

The file is 401 rows. Nine hand-written rows pin the class ratios of the four
(tirads=TIR3B, sex=F, multifocal=No, hashimoto=No) cells so that the bundled
demo patient's prediction is 0.427; the remaining 392 rows are drawn from a
seeded synthetic cohort, rejecting anything that would land in those four
cells. Output is deterministic, so running this script must reproduce the
committed file byte for byte.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "fpt" / "data" / "thyroid_demo.csv"

HEADER = ["patient_id", "tirads", "sex", "age", "multifocal", "hashimoto", "nodule_mm", "outcome"]

# Class counts per (age50, large_nodule) cell inside the pinned block:
# (0,0)->(2 benign, 0), (0,1)->(2,0), (1,0)->(1,2), (1,1)->(1,1).
PLANTED = [
    ("TIR3B", "F", 44, "No", "No", 12, "benign"),
    ("TIR3B", "F", 46, "No", "No", 15, "benign"),
    ("TIR3B", "F", 43, "No", "No", 25, "benign"),
    ("TIR3B", "F", 47, "No", "No", 28, "benign"),
    ("TIR3B", "F", 58, "No", "No", 14, "benign"),
    ("TIR3B", "F", 62, "No", "No", 16, "malignant"),
    ("TIR3B", "F", 55, "No", "No", 11, "malignant"),
    ("TIR3B", "F", 61, "No", "No", 24, "benign"),
    ("TIR3B", "F", 66, "No", "No", 30, "malignant"),
]

TIRADS = ["TIR2", "TIR3A", "TIR3B", "TIR4", "TIR5"]
TIRADS_W = [0.26, 0.22, 0.20, 0.19, 0.13]
TIRADS_RISK = {"TIR2": 0.03, "TIR3A": 0.10, "TIR3B": 0.22, "TIR4": 0.48, "TIR5": 0.82}


def filler_rows(n: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    rows: list[tuple] = []
    while len(rows) < n:
        tirads = str(rng.choice(TIRADS, p=TIRADS_W))
        sex = "F" if rng.random() < 0.62 else "M"
        multifocal = "Yes" if rng.random() < 0.34 else "No"
        hashimoto = "Yes" if rng.random() < 0.24 else "No"
        if tirads == "TIR3B" and sex == "F" and multifocal == "No" and hashimoto == "No":
            continue  # protected block: ratios are pinned by the planted rows
        age = int(rng.integers(24, 79))
        nodule = int(rng.integers(5, 41))
        p = TIRADS_RISK[tirads]
        p += 0.12 if nodule >= 20 else 0.0
        p += 0.06 if age >= 50 else 0.0
        p += 0.05 if multifocal == "Yes" else 0.0
        p = min(max(p, 0.02), 0.95)
        outcome = "malignant" if rng.random() < p else "benign"
        rows.append((tirads, sex, age, multifocal, hashimoto, nodule, outcome))
    return rows


def main() -> int:
    rows = PLANTED + filler_rows(401 - len(PLANTED), seed=20240401)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for i, row in enumerate(rows, start=1):
            writer.writerow([f"P{i:04d}", *row])
    print(f"wrote {len(rows)} rows to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
