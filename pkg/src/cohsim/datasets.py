"""Dataset plumbing: IDX ingestion, raw intensity records, manifests.

Wire formats (all little-endian except IDX, which is big-endian per the
original container):

* IDX images:  u32 magic 0x00000803, u32 count, u32 rows, u32 cols, bytes.
* IDX labels:  u32 magic 0x00000801, u32 count, bytes.
* CINT record: magic "CINT", u32 n, f64 pitch, f32 values[n^2].
* PGM preview: P5, maxval 255, pixel = clamp(round(value * exposure_scale)).
* Manifest:    UTF-8 JSON lines; first line is the header record, then one
               item record per line in item-id order, stable field order.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .field import GridSpec, IntensityImage

_IDX_IMAGE_MAGIC = 0x00000803
_IDX_LABEL_MAGIC = 0x00000801
_CINT_MAGIC = b"CINT"


@dataclass(frozen=True)
class IdxDataset:
    """Decoded IDX pair: count x 28 x 28 uint8 images and uint8 labels."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise DataError(
                f"image count {len(self.images)} != label count {len(self.labels)}")
        if self.images.ndim != 3 or self.images.shape[1:] != (28, 28):
            raise DataError(f"images must be count x 28 x 28, got {self.images.shape}")

    def __len__(self) -> int:
        return len(self.images)


def parse_idx_images(data: bytes) -> np.ndarray:
    if len(data) < 16:
        raise DataError(f"IDX image header truncated at offset {len(data)}")
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != _IDX_IMAGE_MAGIC:
        raise DataError(
            f"image magic {_IDX_IMAGE_MAGIC:#010x} expected, got {magic:#010x} at offset 0")
    expected = count * rows * cols
    payload = data[16:]
    if len(payload) < expected:
        raise DataError(f"IDX image payload truncated at offset {16 + len(payload)}")
    if (rows, cols) != (28, 28):
        raise DataError(f"expected 28x28 images, got {rows}x{cols}")
    return np.frombuffer(payload[:expected], dtype=np.uint8).reshape(count, rows, cols).copy()


def parse_idx_labels(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise DataError(f"IDX label header truncated at offset {len(data)}")
    magic, count = struct.unpack(">II", data[:8])
    if magic != _IDX_LABEL_MAGIC:
        raise DataError(
            f"label magic {_IDX_LABEL_MAGIC:#010x} expected, got {magic:#010x} at offset 0")
    payload = data[8:]
    if len(payload) < count:
        raise DataError(f"IDX label payload truncated at offset {8 + len(payload)}")
    return np.frombuffer(payload[:count], dtype=np.uint8).copy()


def parse_idx(image_bytes: bytes, label_bytes: bytes) -> IdxDataset:
    """Decode an IDX image/label byte pair into arrays."""
    return IdxDataset(images=parse_idx_images(image_bytes),
                      labels=parse_idx_labels(label_bytes))


def _read_maybe_gz(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def load_idx(image_path, label_path) -> IdxDataset:
    """Read an IDX pair from disk; transparently gunzips .gz payloads."""
    return parse_idx(_read_maybe_gz(image_path), _read_maybe_gz(label_path))


def write_idx(dataset: IdxDataset, image_path, label_path) -> None:
    """Emit a dataset in the exact IDX container format."""
    images, labels = dataset.images, dataset.labels
    with open(image_path, "wb") as fh:
        fh.write(struct.pack(">IIII", _IDX_IMAGE_MAGIC, len(images), 28, 28))
        fh.write(images.tobytes())
    with open(label_path, "wb") as fh:
        fh.write(struct.pack(">II", _IDX_LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def select_objects(dataset: IdxDataset, count: int, seed: int) -> np.ndarray:
    """Uniform sample of item indices without replacement, seed-deterministic."""
    if count > len(dataset):
        raise DataError(f"cannot select {count} objects from {len(dataset)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.choice(len(dataset), size=count, replace=False)
    return np.sort(idx)


def class_histogram(dataset: IdxDataset, indices: np.ndarray) -> dict[str, int]:
    counts = np.bincount(dataset.labels[indices], minlength=10)
    return {str(i): int(c) for i, c in enumerate(counts)}


# ---------------------------------------------------------------- CINT ---

def write_cint(path, image: IntensityImage) -> None:
    with open(path, "wb") as fh:
        fh.write(_CINT_MAGIC)
        fh.write(struct.pack("<Id", image.grid.n, image.grid.pitch))
        fh.write(image.values.astype("<f4").tobytes())


def read_cint(path) -> tuple[GridSpec, np.ndarray]:
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot read CINT record {path}: {exc}") from exc
    with fh:
        magic = fh.read(4)
        if magic != _CINT_MAGIC:
            raise DataError(f"bad CINT magic {magic!r} in {path}")
        n, pitch = struct.unpack("<Id", fh.read(12))
        payload = fh.read(n * n * 4)
        if len(payload) != n * n * 4:
            raise DataError(f"truncated CINT payload in {path}")
    values = np.frombuffer(payload, dtype="<f4").reshape(n, n).astype(np.float64)
    return GridSpec(n=n, pitch=pitch), values


def quantize_preview(values: np.ndarray, exposure_scale: float) -> np.ndarray:
    """8-bit preview pixels: clamp(round(value * exposure_scale), 0, 255)."""
    q = np.rint(values * exposure_scale)
    return np.clip(q, 0, 255).astype(np.uint8)


def write_pgm(path, pixels: np.ndarray) -> None:
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(pixels.astype(np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise DataError(f"not a P5 PGM: {path}")
    w, h = (int(v) for v in parts[1].split())
    if parts[2] != b"255":
        raise DataError(f"PGM maxval must be 255: {path}")
    return np.frombuffer(parts[3][:w * h], dtype=np.uint8).reshape(h, w)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_intensity_record(image: IntensityImage, record: dict, root,
                           preview_scale: float | None = None) -> dict:
    """Write the raw CINT record (plus optional PGM preview) for one item
    and return the completed manifest record with its content hash.

    On any I/O failure the exception propagates before the record is
    returned, so a caller that only appends returned records keeps the
    manifest consistent.
    """
    root = Path(root)
    path = root / record["path"]
    path.parent.mkdir(parents=True, exist_ok=True)
    write_cint(path, image)
    rec = dict(record)
    rec["record"] = "item"
    rec["sha256"] = file_sha256(path)
    if preview_scale is not None and rec.get("preview"):
        ppath = root / rec["preview"]
        ppath.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(ppath, quantize_preview(image.values, preview_scale))
    return rec


# ------------------------------------------------------------- manifest ---

_HEADER_FIELDS = ("record", "experiment_id", "preset", "label_taxonomy", "grid",
                  "wavelength", "m", "scene_hash", "exposure_scale", "params",
                  "complete")
_ITEM_FIELDS = ("record", "item_id", "source_dataset", "source_index", "label",
                "depth_label", "l_c", "depth", "base_seed", "path", "preview",
                "exposure_scale", "sha256")


def _ordered(d: dict, fields: tuple) -> dict:
    return {k: d.get(k) for k in fields}


@dataclass
class DatasetManifest:
    """Index of one generated dataset: a header plus per-item records.

    The header carries everything global (grid, wavelength, M, creation
    parameters, the experiment-wide exposure scale and the scene hash);
    items bind each written file to its labels, l_c/depth, seed and
    content hash.  Exactly one label taxonomy is allowed per manifest.
    """

    header: dict
    items: list[dict]

    def __post_init__(self):
        tax = self.header.get("label_taxonomy")
        if tax not in ("digit", "depth"):
            raise DataError(f"label taxonomy must be digit or depth, got {tax!r}")

    def write(self, path) -> None:
        lines = [json.dumps(_ordered(self.header, _HEADER_FIELDS), separators=(",", ":"))]
        for item in sorted(self.items, key=lambda r: r["item_id"]):
            lines.append(json.dumps(_ordered(item, _ITEM_FIELDS), separators=(",", ":")))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read manifest {path}: {exc}") from exc
        lines = text.splitlines()
        if not lines:
            raise DataError(f"empty manifest {path}")
        header = json.loads(lines[0])
        if header.get("record") != "header":
            raise DataError(f"manifest {path} does not start with a header record")
        items = []
        for ln in lines[1:]:
            if not ln.strip():
                continue
            rec = json.loads(ln)
            if rec.get("record") != "item":
                raise DataError(f"unexpected record type {rec.get('record')!r} in {path}")
            items.append(rec)
        return cls(header=header, items=items)

    def verify(self, root) -> None:
        """Check completeness and content hashes of every referenced file."""
        root = Path(root)
        seen = set()
        for item in self.items:
            iid = item["item_id"]
            if iid in seen:
                raise DataError(f"duplicate item id {iid}")
            seen.add(iid)
            p = root / item["path"]
            if not p.exists():
                raise DataError(f"missing file for item {iid}: {p}")
            digest = file_sha256(p)
            if digest != item["sha256"]:
                raise DataError(
                    f"hash mismatch for item {iid}: manifest {item['sha256']}, file {digest}")
        if sorted(seen) != list(range(len(self.items))):
            raise DataError("item ids are not the contiguous range 0..N-1")

    def items_at(self, l_c: float | None = None, depth: float | None = None) -> list[dict]:
        out = self.items
        if l_c is not None:
            out = [r for r in out if r["l_c"] is not None and
                   abs(r["l_c"] - l_c) <= 1e-12 * max(1.0, abs(l_c))]
        if depth is not None:
            out = [r for r in out if r["depth"] is not None and
                   abs(r["depth"] - depth) <= 1e-12 * max(1.0, abs(depth))]
        return out

    def l_c_values(self) -> list[float]:
        return sorted({r["l_c"] for r in self.items if r["l_c"] is not None})

    def depth_values(self) -> list[float]:
        return sorted({r["depth"] for r in self.items if r["depth"] is not None})
