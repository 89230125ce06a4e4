"""Deterministic synthetic digit images in the IDX container format.

Offline stand-in for the handwritten-digit sets when those files are not
present: ten distinguishable glyph classes, randomized placement, scale,
stroke weight and gray level, 28 x 28 uint8, background 0.  Useful for
smoke runs and self-contained tests; real IDX files drop in unchanged.

    python3 -m cohsim.synthdigits --count 5000 --seed 7 --out-dir data/
"""

from __future__ import annotations

import argparse

import numpy as np
from scipy import ndimage

from .coherence import mix_seed
from .datasets import IdxDataset, write_idx

_GLYPHS = {
    0: ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    1: ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    2: ("01110", "10001", "00001", "00110", "01000", "10000", "11111"),
    3: ("11110", "00001", "00001", "01110", "00001", "00001", "11110"),
    4: ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    5: ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    6: ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    7: ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    8: ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    9: ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


def _glyph_array(digit: int) -> np.ndarray:
    return np.array([[c == "1" for c in row] for row in _GLYPHS[digit]], dtype=bool)


def render_digit(digit: int, rng: np.random.Generator) -> np.ndarray:
    """One randomized 28 x 28 uint8 rendering of the digit.

    Placement, scale, stroke weight, gray level, rotation and shear all
    vary per image so the ten classes carry handwriting-like intraclass
    variety rather than ten fixed stamps.  A random background gray adds
    garment-like per-object opacity: total transmitted power then varies
    strongly across objects, as it does for the fashion dataset.
    """
    glyph = _glyph_array(digit)
    sy = int(rng.integers(3, 5))   # 21..28 rows
    sx = int(rng.integers(3, 6))   # 15..25 cols
    big = np.kron(glyph, np.ones((sy, sx), dtype=bool))
    big = ndimage.binary_dilation(big, iterations=int(rng.integers(1, 3)))
    # filled silhouettes, garment-like: the class lives in the outline
    big = ndimage.binary_fill_holes(big)
    h, w = big.shape
    img = np.zeros((28, 28), dtype=np.float64)
    oy = int(rng.integers(0, 28 - h + 1)) if h < 28 else 0
    ox = int(rng.integers(0, 28 - w + 1)) if w < 28 else 0
    big = big[:28, :28]
    stroke = float(rng.uniform(170, 255))
    img[oy:oy + big.shape[0], ox:ox + big.shape[1]] = big * stroke

    # mild affine wobble: rotation up to ~18 deg plus shear
    angle = rng.uniform(-0.32, 0.32)
    shear = rng.uniform(-0.25, 0.25)
    ca, sa = np.cos(angle), np.sin(angle)
    mat = np.array([[ca, -sa + shear], [sa, ca]])
    center = np.array([13.5, 13.5])
    offset = center - mat @ center
    img = ndimage.affine_transform(img, mat, offset=offset, order=1, mode="constant")

    background = rng.uniform(0.0, 150.0)
    img = np.maximum(img, background)
    img += rng.normal(0.0, 8.0, size=img.shape) * (img > 20)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def make_dataset(count: int, seed: int) -> IdxDataset:
    """count images with labels cycling through the ten classes."""
    images = np.zeros((count, 28, 28), dtype=np.uint8)
    labels = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        rng = np.random.Generator(np.random.PCG64(mix_seed(seed, i)))
        digit = i % 10
        images[i] = render_digit(digit, rng)
        labels[i] = digit
    return IdxDataset(images=images, labels=labels)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out-images", default="synth-images-idx3-ubyte")
    ap.add_argument("--out-labels", default="synth-labels-idx1-ubyte")
    args = ap.parse_args(argv)
    ds = make_dataset(args.count, args.seed)
    write_idx(ds, args.out_images, args.out_labels)
    print(f"wrote {args.count} images to {args.out_images}, labels to {args.out_labels}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
