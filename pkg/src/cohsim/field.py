"""Sampled complex optical fields on square, centered grids.

Coordinate convention: the grid origin sits at the geometric center,
x = (ix - n/2) * pitch along columns and y = (iy - n/2) * pitch along
rows, with samples stored row-major as samples[iy, ix].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError, ContractError, DataError, NumericalAbortError

DEFAULT_WAVELENGTH = 635e-9
DEFAULT_N = 512
DEFAULT_EXTENT = 6e-3

_CFLD_MAGIC = b"CFLD"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Square sampling grid: n pixels per side, pitch meters per pixel."""

    n: int
    pitch: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)):
            raise ConfigurationError(f"grid n must be a positive power of two, got {self.n}")
        if not (self.pitch > 0):
            raise ConfigurationError(f"grid pitch must be > 0, got {self.pitch}")

    @property
    def extent(self) -> float:
        return self.n * self.pitch

    @classmethod
    def from_extent(cls, n: int, extent: float) -> "GridSpec":
        if not (extent > 0):
            raise ConfigurationError(f"grid extent must be > 0, got {extent}")
        return cls(n=n, pitch=extent / n)

    def coords(self) -> np.ndarray:
        """Centered physical coordinates of pixel centers along one axis."""
        return (np.arange(self.n) - self.n // 2) * self.pitch

    def to_dict(self) -> dict:
        return {"n": int(self.n), "pitch": float(self.pitch)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(n=int(d["n"]), pitch=float(d["pitch"]))


def default_grid() -> GridSpec:
    """The 6 mm x 6 mm, 512 px imaging grid used by the stock experiments."""
    return GridSpec.from_extent(DEFAULT_N, DEFAULT_EXTENT)


@dataclass
class ComplexField:
    """Sampled complex amplitude plus the grid and wavelength it lives on.

    Treated as immutable by every operation in the package: operations
    return new fields, which makes sharing across workers safe.
    """

    grid: GridSpec
    wavelength: float
    samples: np.ndarray

    def __post_init__(self):
        if not (self.wavelength > 0):
            raise ConfigurationError(f"wavelength must be > 0, got {self.wavelength}")
        self.samples = np.asarray(self.samples)
        if not np.issubdtype(self.samples.dtype, np.complexfloating):
            self.samples = self.samples.astype(np.complex128)
        if self.samples.shape != (self.grid.n, self.grid.n):
            raise ContractError(
                f"sample array shape {self.samples.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise NumericalAbortError("field contains non-finite samples")

    def amplitude(self) -> np.ndarray:
        return np.abs(self.samples)


@dataclass
class IntensityImage:
    """Detector-plane intensity: nonnegative |amplitude|^2 values.

    exposure_scale maps raw values to the 8-bit preview range; raw values
    themselves are stored unscaled.
    """

    grid: GridSpec
    values: np.ndarray
    exposure_scale: float
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ContractError(
                f"value array shape {self.values.shape} does not match grid n={self.grid.n}"
            )
        if np.any(self.values < 0):
            raise ContractError("intensity values must be nonnegative")
        if not (self.exposure_scale > 0):
            raise ContractError("exposure_scale must be > 0")


def new_plane_wave(grid: GridSpec, wavelength: float = DEFAULT_WAVELENGTH,
                   amplitude: float = 1.0) -> ComplexField:
    """Uniform plane wave: every sample equals amplitude + 0i."""
    if amplitude < 0:
        raise ConfigurationError(f"amplitude must be >= 0, got {amplitude}")
    samples = np.full((grid.n, grid.n), amplitude, dtype=np.complex128)
    return ComplexField(grid=grid, wavelength=wavelength, samples=samples)


def total_power(field: ComplexField) -> float:
    """Sum of |sample|^2 times pixel area."""
    s = field.samples
    return float(np.sum(s.real.astype(np.float64) ** 2 + s.imag.astype(np.float64) ** 2)
                 * field.grid.pitch ** 2)


def to_intensity(field: ComplexField, metadata: dict | None = None) -> IntensityImage:
    """Single-realization detector read: values = |samples|^2.

    exposure_scale is initialized to 255 / max(values); an all-zero field
    gets scale 1 and a ``zero_field`` metadata flag.
    """
    s = field.samples
    values = s.real.astype(np.float64) ** 2 + s.imag.astype(np.float64) ** 2
    md = dict(metadata or {})
    vmax = float(values.max()) if values.size else 0.0
    if vmax > 0:
        scale = 255.0 / vmax
    else:
        scale = 1.0
        md["zero_field"] = True
    return IntensityImage(grid=field.grid, values=values, exposure_scale=scale, metadata=md)


def dump_field(field: ComplexField, path) -> None:
    """Raw debug dump: little-endian {magic "CFLD", u32 n, f64 pitch,
    f64 wavelength} followed by n^2 (re, im) f64 pairs."""
    with open(path, "wb") as fh:
        fh.write(_CFLD_MAGIC)
        fh.write(struct.pack("<Idd", field.grid.n, field.grid.pitch, field.wavelength))
        inter = np.empty((field.grid.n, field.grid.n, 2), dtype="<f8")
        inter[..., 0] = field.samples.real
        inter[..., 1] = field.samples.imag
        fh.write(inter.tobytes())


def load_field(path) -> ComplexField:
    """Read a field written by dump_field."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CFLD_MAGIC:
            raise DataError(f"bad CFLD magic {magic!r} at offset 0")
        n, pitch, wavelength = struct.unpack("<Idd", fh.read(20))
        payload = fh.read(n * n * 16)
        if len(payload) != n * n * 16:
            raise DataError(f"truncated CFLD payload at offset {24 + len(payload)}")
    inter = np.frombuffer(payload, dtype="<f8").reshape(n, n, 2)
    samples = inter[..., 0] + 1j * inter[..., 1]
    return ComplexField(grid=GridSpec(n=n, pitch=pitch), wavelength=wavelength, samples=samples)
