"""CSV and JSON-manifest helpers shared by the export functions and the CLI.

Floats are printed with 17 significant digits so a written file reimports
bit-exactly; sweep outputs are reproducible byte-for-byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt17(x) -> str:
    """Shortest-faithful decimal form: 17 significant digits."""
    return format(float(x), ".17g")


def write_csv(path, header, columns) -> None:
    """Write equal-length columns as CSV with a header row."""
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("all CSV columns must have the same length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for i in range(n):
            f.write(
                ",".join(
                    str(c[i]) if np.issubdtype(c.dtype, np.integer) else fmt17(c[i])
                    for c in cols
                )
                + "\n"
            )


def read_csv_columns(path) -> dict:
    """Read back a CSV written by :func:`write_csv` as name -> float array."""
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = [line.strip().split(",") for line in f if line.strip()]
    cols = {name: np.array([float(row[i]) for row in data]) for i, name in enumerate(header)}
    return cols


def write_manifest(path, manifest: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def read_manifest(path) -> dict:
    with open(path) as f:
        return json.load(f)
