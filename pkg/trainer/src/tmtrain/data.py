"""Training data: synthetic power-law TMs or historical TM CSV files.

The TM CSV format matches the estimator package (header
``src,dst,demand_mbps``); each file is one TM, flattened to a vector in
row order. The trainer never imports the estimator package, only its file
formats.
"""

from __future__ import annotations

import csv
import glob

import numpy as np


class DataEmpty(Exception):
    """No training TMs available."""


def sample_power_law_tms(n_tms: int, p: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """n_tms demand vectors whose normalized empirical cdf follows y**alpha.

    Each row is p iid Beta(alpha, 1) draws divided by the row maximum
    (computed ratio-first so every row's maximum is exactly 1).
    """
    if n_tms < 1 or p < 1:
        raise DataEmpty("need at least one TM and one demand")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    u = 1.0 - rng.random((n_tms, p))
    return np.power(u / u.max(axis=1, keepdims=True), 1.0 / alpha)


def load_tm_csvs(pattern: str) -> np.ndarray:
    """Stack TM CSVs matching the glob into an (n_tms, p) demand array.

    All files must list the same OD pairs in the same order.
    """
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise DataEmpty(f"no TM files match {pattern!r}")
    rows = []
    key_order: list[tuple[str, str]] | None = None
    for path in paths:
        pairs, values = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or "demand_mbps" not in reader.fieldnames:
                raise ValueError(f"{path}: expected header src,dst,demand_mbps")
            for row in reader:
                pairs.append((row["src"], row["dst"]))
                values.append(float(row["demand_mbps"]))
        if key_order is None:
            key_order = pairs
        elif pairs != key_order:
            raise ValueError(f"{path}: OD pair order differs from {paths[0]}")
        rows.append(values)
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        raise DataEmpty("TM files contain no demands")
    return data
