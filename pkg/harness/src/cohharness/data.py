"""Readers for the simulator's published dataset formats.

Implemented directly from the wire-format contracts so this package stays
decoupled from the simulator code:

* CINT record: little-endian magic "CINT", u32 n, f64 pitch, f32 values[n^2].
* Manifest: JSON lines; header record first, then one item record per line
  with fields item_id, label, depth_label, l_c, path, sha256, ...

Images are fed to the networks raw: no normalization and no per-image
scaling.  The only transform is an area-average downsample to the training
resolution, recorded in the report.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_CINT_MAGIC = b"CINT"


class DatasetError(Exception):
    """Broken manifest, record, or hash mismatch."""


def read_cint(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != _CINT_MAGIC:
        raise DatasetError(f"bad CINT magic in {path}")
    n, _pitch = struct.unpack("<Id", raw[4:16])
    values = np.frombuffer(raw[16:16 + 4 * n * n], dtype="<f4")
    if values.size != n * n:
        raise DatasetError(f"truncated CINT payload in {path}")
    return values.reshape(n, n).copy()


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class Manifest:
    header: dict
    items: list[dict]
    root: Path

    @classmethod
    def load(cls, path) -> "Manifest":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise DatasetError(f"empty manifest {path}")
        header = json.loads(lines[0])
        if header.get("record") != "header":
            raise DatasetError("manifest must start with a header record")
        if not header.get("complete"):
            raise DatasetError(f"manifest {path} is incomplete")
        items = [json.loads(ln) for ln in lines[1:] if ln.strip()]
        return cls(header=header, items=items, root=path.parent)

    def verify_hashes(self) -> None:
        for rec in self.items:
            p = self.root / rec["path"]
            if not p.exists():
                raise DatasetError(f"missing item file {p}")
            if _sha256(p) != rec["sha256"]:
                raise DatasetError(f"hash mismatch for item {rec['item_id']}")

    @property
    def taxonomy(self) -> str:
        return self.header["label_taxonomy"]

    @property
    def l_c(self) -> float | None:
        vals = {r["l_c"] for r in self.items if r["l_c"] is not None}
        return vals.pop() if len(vals) == 1 else None

    def num_classes(self) -> int:
        return len({r["label"] for r in self.items})


def area_downsample(values: np.ndarray, target: int) -> np.ndarray:
    n = values.shape[0]
    if n % target != 0:
        raise DatasetError(f"cannot area-average {n} px down to {target}")
    f = n // target
    return values.reshape(target, f, target, f).mean(axis=(1, 3))


def load_arrays(manifest: Manifest, input_size: int = 128,
                verify: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """All images (float32, input_size^2, raw values) and integer labels,
    in item-id order."""
    if verify:
        manifest.verify_hashes()
    items = sorted(manifest.items, key=lambda r: r["item_id"])
    images = np.empty((len(items), input_size, input_size), dtype=np.float32)
    labels = np.empty(len(items), dtype=np.int64)
    for i, rec in enumerate(items):
        values = read_cint(manifest.root / rec["path"])
        if values.shape[0] != input_size:
            values = area_downsample(values, input_size)
        images[i] = values.astype(np.float32)
        labels[i] = int(rec["label"])
    return images, labels


def split_indices(count: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic shuffled split; train and test are disjoint."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(count)
    n_train = int(round(count * train_fraction))
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def split_by_group(groups: np.ndarray, train_fraction: float,
                   seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Split item indices so whole groups (e.g. source objects) stay on one
    side.  At paper scale an image-level split is effectively group-level
    because objects are unique; at desk scale with few objects the image
    split would leak same-object images across the boundary."""
    uniq = np.unique(groups)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(uniq))
    n_train = int(round(len(uniq) * train_fraction))
    train_groups = set(uniq[order[:n_train]].tolist())
    mask = np.array([g in train_groups for g in groups])
    idx = np.arange(len(groups))
    return idx[mask], idx[~mask]


def item_groups(manifest: Manifest) -> np.ndarray:
    """Source-object index per item, in item-id order."""
    items = sorted(manifest.items, key=lambda r: r["item_id"])
    return np.array([int(r["source_index"]) for r in items])
