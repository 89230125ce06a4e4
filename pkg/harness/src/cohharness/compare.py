"""Rank-correlation between accuracy and entropy curves."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import stats as sstats

from .data import DatasetError


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if len(lines) < 2:
        raise DatasetError(f"CSV {path} has no data rows")
    header = lines[0].split(",")
    rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return header, rows


def compare_curves(accuracy_csv, entropy_csv) -> dict:
    """Spearman rank correlation of accuracy vs mean entropy across l_c.

    Refuses mismatched l_c grids; identical grids are the contract between
    the simulator's entropy CSV and the harness accuracy CSV.
    """
    _, acc = _read_csv(accuracy_csv)
    _, ent = _read_csv(entropy_csv)
    acc = acc[np.argsort(acc[:, 0])]
    ent = ent[np.argsort(ent[:, 0])]
    if acc.shape[0] != ent.shape[0] or not np.allclose(acc[:, 0], ent[:, 0], rtol=1e-9):
        raise DatasetError("accuracy and entropy CSVs use different l_c grids")
    if acc.shape[0] < 2:
        raise DatasetError("need at least two l_c points")
    rho = sstats.spearmanr(acc[:, 1], ent[:, 1]).statistic
    return {"spearman_rho": float(rho), "n_points": int(acc.shape[0]),
            "l_c_m": acc[:, 0].tolist()}
