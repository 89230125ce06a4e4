"""Quantitative image measurements: 2D entropy, fringe visibility, speckle.

The two-dimensional entropy pairs each pixel's gray value i with the
rounded mean j of its 8-neighborhood (edge rows/columns replicated), then
takes the Shannon entropy of the joint (i, j) histogram over 256 x 256
levels.  The neighborhood mean uses exact integer arithmetic,
j = (sum + 4) // 8, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import ConfigurationError, DataError
from .field import GridSpec, IntensityImage

LOG2_LEVELS = 16.0  # upper entropy bound for a 256 x 256 joint histogram


@dataclass
class EntropyReport:
    h_bits: float
    neighborhood: str
    levels: int
    histogram: np.ndarray
    n_pixels: int


@dataclass
class VisibilityReport:
    visibility: float
    i_max: float
    i_min: float
    window: "FringeWindow"


@dataclass
class SpeckleReport:
    mean_size: float
    contrast: float
    size_x: float
    size_y: float


def quantize_to_u8(values: np.ndarray, exposure_scale: float) -> np.ndarray:
    """Map raw intensity to 0..255 with the experiment exposure scale."""
    q = np.rint(np.asarray(values, dtype=np.float64) * exposure_scale)
    return np.clip(q, 0, 255).astype(np.uint8)


def neighborhood_mean_u8(image: np.ndarray) -> np.ndarray:
    """Rounded 8-neighborhood mean with edge replication, exact integers."""
    img = np.asarray(image)
    p = np.pad(img.astype(np.int64), 1, mode="edge")
    s = (p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
         + p[1:-1, :-2] + p[1:-1, 2:]
         + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:])
    return ((s + 4) // 8).astype(np.uint8)


def entropy_from_histogram(hist: np.ndarray) -> float:
    """Shannon entropy in bits of a joint count histogram."""
    total = float(hist.sum())
    if total <= 0:
        raise DataError("empty histogram")
    p = hist[hist > 0].astype(np.float64) / total
    return float(-np.sum(p * np.log2(p)))


def entropy_2d(image: np.ndarray) -> EntropyReport:
    """Two-dimensional entropy of an 8-bit image."""
    img = np.asarray(image)
    if img.size == 0:
        raise DataError("empty image")
    if img.dtype != np.uint8:
        raise DataError(f"entropy_2d expects uint8 input, got {img.dtype}")
    j = neighborhood_mean_u8(img)
    pairs = img.astype(np.int64) * 256 + j.astype(np.int64)
    hist = np.bincount(pairs.ravel(), minlength=65536).reshape(256, 256)
    h = entropy_from_histogram(hist)
    return EntropyReport(h_bits=h, neighborhood="8-neighbor mean, edge replication",
                         levels=256, histogram=hist, n_pixels=img.size)


def mean_entropy(entropies: list[float]) -> tuple[float, float]:
    """Mean and population std of a batch of entropy values."""
    if not entropies:
        raise DataError("no items to average")
    arr = np.asarray(entropies, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


# ------------------------------------------------------------ visibility ---

@dataclass(frozen=True)
class FringeWindow:
    """Analysis window centered on the optical axis.

    period is the expected fringe period (lambda z / spacing from the
    double-pinhole geometry); width must cover at least 3 periods.
    """

    period: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.period > 0):
            raise ConfigurationError(f"fringe period must be > 0, got {self.period}")
        if self.width < 3.0 * self.period:
            raise ConfigurationError(
                f"window width {self.width} must cover >= 3 fringe periods ({3 * self.period})")
        if not (self.height > 0):
            raise ConfigurationError("window height must be > 0")


def _axis_slice(grid: GridSpec, half_extent: float) -> slice:
    c = grid.coords()
    sel = np.where(np.abs(c) <= half_extent)[0]
    if sel.size == 0:
        raise ConfigurationError("window does not cover any pixels")
    return slice(int(sel[0]), int(sel[-1]) + 1)


def fringe_visibility(image: IntensityImage, window: FringeWindow) -> VisibilityReport:
    """Visibility from the fitted fringe envelope of the averaged profile.

    The profile (window rows averaged along the transverse direction) is
    fit with a quadratic background plus the fringe harmonic at the known
    period, the harmonic amplitude itself quadratic in x so the fit can
    track the single-hole diffraction envelope; a Hann weight concentrates
    the fit on the central fringes.  The envelope extrema at window center
    are background +- fringe amplitude.  Fitting instead of taking raw
    pixel extrema keeps the estimate robust to residual Monte-Carlo noise
    at finite M.
    """
    rows = _axis_slice(image.grid, window.height / 2.0)
    cols = _axis_slice(image.grid, window.width / 2.0)
    block = image.values[rows, cols].astype(np.float64)
    profile = block.mean(axis=0)
    if not (profile.sum() > 0):
        raise DataError("zero total intensity in fringe window")
    x = image.grid.coords()[cols]
    xi = x / (window.width / 2.0)
    arg = 2.0 * np.pi * x / window.period
    cs, sn = np.cos(arg), np.sin(arg)
    design = np.stack([np.ones_like(xi), xi, xi ** 2,
                       cs, xi * cs, xi ** 2 * cs,
                       sn, xi * sn, xi ** 2 * sn], axis=1)
    weight = 0.5 * (1.0 + np.cos(np.pi * np.clip(xi, -1.0, 1.0)))
    coef, *_ = np.linalg.lstsq(design * weight[:, None], profile * weight, rcond=None)
    a0 = coef[0]
    amp = float(np.hypot(coef[3], coef[6]))
    base = float(a0) if a0 > 0 else float(profile.mean())
    v = amp / base if base > 0 else 0.0
    v = float(min(max(v, 0.0), 1.0))
    return VisibilityReport(visibility=v, i_max=base + amp, i_min=max(base - amp, 0.0),
                            window=window)


# --------------------------------------------------------------- speckle ---

@dataclass(frozen=True)
class Window:
    """Axis-aligned physical analysis window (center, width, height)."""

    width: float
    height: float
    center_x: float = 0.0
    center_y: float = 0.0


def _window_block(image: IntensityImage, window: Window) -> np.ndarray:
    c = image.grid.coords()
    lo, hi = c[0], c[-1]
    if (window.center_x - window.width / 2.0 < lo or window.center_x + window.width / 2.0 > hi
            or window.center_y - window.height / 2.0 < lo
            or window.center_y + window.height / 2.0 > hi):
        raise ConfigurationError("window must lie fully inside the image")
    rows = np.where(np.abs(c - window.center_y) <= window.height / 2.0)[0]
    cols = np.where(np.abs(c - window.center_x) <= window.width / 2.0)[0]
    if rows.size == 0 or cols.size == 0:
        raise ConfigurationError("window does not cover any pixels")
    return image.values[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1].astype(np.float64)


def _one_over_e_halfwidth(profile: np.ndarray) -> float:
    """First 1/e crossing of a normalized correlation profile, in lags,
    linearly interpolated between samples."""
    target = 1.0 / np.e
    below = np.where(profile < target)[0]
    if below.size == 0 or below[0] == 0:
        raise DataError("autocovariance does not cross 1/e inside the window")
    k = int(below[0])
    c0, c1 = profile[k - 1], profile[k]
    return (k - 1) + (c0 - target) / (c0 - c1)


def speckle_stats(image: IntensityImage, window: Window) -> SpeckleReport:
    """Mean speckle size (1/e autocovariance half-width, both axes averaged)
    and contrast (std/mean) inside the window."""
    w = _window_block(image, window)
    mean = float(w.mean())
    if not (mean > 0):
        raise DataError("window mean must be > 0")
    std = float(w.std())
    if std == 0.0:
        raise DataError("constant window: speckle size undefined")
    centered = w - mean
    ny, nx = centered.shape
    padded = np.zeros((2 * ny, 2 * nx))
    padded[:ny, :nx] = centered
    spec = np.abs(sfft.fft2(padded)) ** 2
    cov = sfft.ifft2(spec).real
    cov /= cov[0, 0]
    wx = _one_over_e_halfwidth(cov[0, :nx // 2])
    wy = _one_over_e_halfwidth(cov[:ny // 2, 0])
    pitch = image.grid.pitch
    size_x = max(wx * pitch, pitch)
    size_y = max(wy * pitch, pitch)
    return SpeckleReport(mean_size=(size_x + size_y) / 2.0, contrast=std / mean,
                         size_x=size_x, size_y=size_y)


# ------------------------------------------------------------------- CSV ---

def format_csv(header: list[str], rows: list[tuple]) -> str:
    """Fixed column order, 9 significant digits, deterministic bytes."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(f"{float(v):.9g}")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[list[str], list[list[float]]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("empty CSV")
    header = lines[0].split(",")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise DataError(f"CSV line {i}: expected {len(header)} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataError(f"CSV line {i}: {exc}") from exc
    return header, rows
