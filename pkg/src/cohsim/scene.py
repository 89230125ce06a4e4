"""Optical elements and the ordered scene graph.

A scene is a list of stages folded left to right over the field:
Object / Diffuser / PinholeMask are pointwise multiplications, FreeSpace
is angular-spectrum propagation, Detector terminates.  Every element is
passive (|multiplier| <= 1), so total power never increases through a
stage.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from . import coherence
from .errors import ConfigurationError, ContractError, DataError
from .field import ComplexField, GridSpec
from .propagation import PropagationPlan, make_plan, propagate_samples

DEFAULT_DIFFUSER_RMS = 3.0 * np.pi


@dataclass(frozen=True)
class SlmObject:
    """Amplitude object: a 28 x 28 8-bit image loaded on the modulator.

    Transmittance is t = 1 - g/255, so gray 0 passes fully and gray 255
    blocks.  The image covers a centered square of side object_extent
    (full grid extent when None) by nearest-neighbor upsampling; pixels
    outside that square transmit fully.
    """

    image: np.ndarray
    object_extent: float | None = None
    source_id: str = ""

    def __post_init__(self):
        img = np.asarray(self.image)
        if img.shape != (28, 28) or img.dtype != np.uint8:
            raise DataError(
                f"object image must be 28x28 uint8, got shape {img.shape} dtype {img.dtype}")
        object.__setattr__(self, "image", img)

    def transmittance(self, grid: GridSpec) -> np.ndarray:
        extent = grid.extent if self.object_extent is None else self.object_extent
        if extent <= 0 or extent > grid.extent:
            raise ConfigurationError(
                f"object extent {extent} must lie in (0, {grid.extent}]")
        c = grid.coords()
        # nearest-neighbor cell i covers [-E/2 + i E/28, -E/2 + (i+1) E/28)
        inside = (c >= -extent / 2) & (c < extent / 2)
        idx = np.floor((c + extent / 2) / extent * 28).astype(np.int64)
        idx = np.clip(idx, 0, 27)
        t = 1.0 - self.image.astype(np.float64) / 255.0
        out = np.ones((grid.n, grid.n))
        sel = np.where(inside)[0]
        rows = idx[sel]
        out[np.ix_(sel, sel)] = t[np.ix_(rows, rows)]
        return out


@dataclass(frozen=True)
class DiffuserSpec:
    """Thin ground-glass model: frozen Gaussian-correlated phase screen.

    r_g is the phase correlation length (defaults to 2 x grid pitch at
    application time); phase_rms of 3 pi gives a strong diffuser.  The
    static screen is identical across all ensemble realizations and all
    dataset items of an experiment.
    """

    r_g: float | None = None
    phase_rms: float = DEFAULT_DIFFUSER_RMS
    seed: int = 0
    static: bool = True

    def __post_init__(self):
        if self.phase_rms < 0:
            raise ConfigurationError(f"phase_rms must be >= 0, got {self.phase_rms}")
        if not self.static:
            raise ConfigurationError("dynamic diffusers are not supported; set static=True")

    def resolve_r_g(self, grid: GridSpec) -> float:
        r_g = 2.0 * grid.pitch if self.r_g is None else self.r_g
        if r_g < grid.pitch:
            raise ConfigurationError(
                f"diffuser correlation length {r_g} must be >= grid pitch {grid.pitch}")
        return r_g

    def phase_map(self, grid: GridSpec) -> np.ndarray:
        """Frozen phase surface psi; same generator as the decoherence screens."""
        if self.phase_rms == 0.0:
            return np.zeros((grid.n, grid.n))
        r_g = self.resolve_r_g(grid)
        spec = coherence.PhaseScreenSpec(
            grid=grid, l_c=r_g / self.phase_rms, sigma_phi=self.phase_rms, seed=self.seed)
        return coherence.ScreenSampler(spec).sample(0)


@dataclass(frozen=True)
class PinholeMaskSpec:
    """Two circular holes: diameter, center spacing, orientation axis."""

    diameter: float = 1e-3
    spacing: float = 5e-3
    orientation: str = "horizontal"

    def __post_init__(self):
        if self.spacing <= self.diameter:
            raise ConfigurationError(
                f"hole spacing {self.spacing} must exceed diameter {self.diameter}")
        if self.orientation not in ("horizontal", "vertical"):
            raise ConfigurationError(f"orientation must be horizontal or vertical")

    def validate_on(self, grid: GridSpec) -> None:
        if self.diameter < 4.0 * grid.pitch:
            raise ConfigurationError(
                f"hole diameter {self.diameter} must be >= 4 x pitch ({4 * grid.pitch})")
        reach = self.spacing / 2.0 + self.diameter / 2.0
        if reach >= grid.extent / 2.0:
            raise ConfigurationError(
                f"pinholes reach {reach} m, clipped by the +-{grid.extent / 2} m aperture")

    def mask(self, grid: GridSpec) -> np.ndarray:
        self.validate_on(grid)
        c = grid.coords()
        x = c[None, :]
        y = c[:, None]
        if self.orientation == "horizontal":
            ax, tv = x, y
        else:
            ax, tv = y, x
        r = self.diameter / 2.0
        half = self.spacing / 2.0
        hole1 = (ax - half) ** 2 + tv ** 2 <= r ** 2
        hole2 = (ax + half) ** 2 + tv ** 2 <= r ** 2
        return (hole1 | hole2).astype(np.float64)


@dataclass(frozen=True)
class ObjectStage:
    obj: SlmObject | None = None
    object_extent: float | None = None


@dataclass(frozen=True)
class FreeSpace:
    z: float


@dataclass(frozen=True)
class DiffuserStage:
    spec: DiffuserSpec


@dataclass(frozen=True)
class PinholeStage:
    spec: PinholeMaskSpec


@dataclass(frozen=True)
class Detector:
    pass


Stage = ObjectStage | FreeSpace | DiffuserStage | PinholeStage | Detector


@dataclass(frozen=True)
class SceneConfig:
    """One experiment geometry: ordered stages plus grid and wavelength."""

    grid: GridSpec
    wavelength: float
    stages: tuple
    pad_factor: int = 2
    band_limited: bool = True

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages or not isinstance(stages[-1], Detector):
            raise ConfigurationError("scene must end with exactly one Detector stage")
        if sum(isinstance(s, Detector) for s in stages) != 1:
            raise ConfigurationError("scene must contain exactly one Detector stage")
        for s in stages:
            if isinstance(s, FreeSpace) and not (s.z > 0):
                raise ConfigurationError(f"FreeSpace distance must be > 0, got {s.z}")

    @property
    def total_path(self) -> float:
        return float(sum(s.z for s in self.stages if isinstance(s, FreeSpace)))

    def bind_object(self, image: np.ndarray, source_id: str = "") -> "SceneConfig":
        """Substitute the dataset image into the first Object stage."""
        stages = list(self.stages)
        for i, s in enumerate(stages):
            if isinstance(s, ObjectStage):
                slm = SlmObject(image=image, object_extent=s.object_extent,
                                source_id=source_id)
                stages[i] = ObjectStage(obj=slm, object_extent=s.object_extent)
                return replace(self, stages=tuple(stages))
        raise ContractError("scene has no Object stage to bind")

    def to_dict(self) -> dict:
        stages = []
        for s in self.stages:
            if isinstance(s, ObjectStage):
                stages.append({"type": "object", "extent": s.object_extent})
            elif isinstance(s, FreeSpace):
                stages.append({"type": "free_space", "z": s.z})
            elif isinstance(s, DiffuserStage):
                stages.append({"type": "diffuser", "r_g": s.spec.r_g,
                               "phase_rms": s.spec.phase_rms, "seed": s.spec.seed,
                               "static": s.spec.static})
            elif isinstance(s, PinholeStage):
                stages.append({"type": "pinhole_mask", "diameter": s.spec.diameter,
                               "spacing": s.spec.spacing,
                               "orientation": s.spec.orientation})
            elif isinstance(s, Detector):
                stages.append({"type": "detector"})
        return {"grid": self.grid.to_dict(), "wavelength": self.wavelength,
                "pad_factor": self.pad_factor, "band_limited": self.band_limited,
                "stages": stages}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        stages: list[Stage] = []
        for s in d["stages"]:
            kind = s.get("type")
            if kind == "object":
                stages.append(ObjectStage(object_extent=s.get("extent")))
            elif kind == "free_space":
                stages.append(FreeSpace(z=float(s["z"])))
            elif kind == "diffuser":
                stages.append(DiffuserStage(DiffuserSpec(
                    r_g=s.get("r_g"), phase_rms=float(s.get("phase_rms", DEFAULT_DIFFUSER_RMS)),
                    seed=int(s.get("seed", 0)), static=bool(s.get("static", True)))))
            elif kind == "pinhole_mask":
                stages.append(PinholeStage(PinholeMaskSpec(
                    diameter=float(s.get("diameter", 1e-3)),
                    spacing=float(s.get("spacing", 5e-3)),
                    orientation=s.get("orientation", "horizontal"))))
            elif kind == "detector":
                stages.append(Detector())
            else:
                raise ConfigurationError(f"unknown stage type {kind!r}")
        return cls(grid=GridSpec.from_dict(d["grid"]), wavelength=float(d["wavelength"]),
                   stages=tuple(stages), pad_factor=int(d.get("pad_factor", 2)),
                   band_limited=bool(d.get("band_limited", True)))

    def structural_hash(self) -> str:
        """Hash of the geometry (stage list, grid, wavelength), not of any
        bound object pixels; identifies the experiment template."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def apply_slm(field: ComplexField, obj: SlmObject) -> ComplexField:
    """Multiply by the object transmittance; power never increases."""
    t = obj.transmittance(field.grid)
    return ComplexField(grid=field.grid, wavelength=field.wavelength,
                        samples=field.samples * t)


def apply_diffuser(field: ComplexField, spec: DiffuserSpec) -> ComplexField:
    """Multiply by exp(i psi) with psi the frozen diffuser phase."""
    psi = spec.phase_map(field.grid)
    out = field.samples * (np.cos(psi) + 1j * np.sin(psi))
    return ComplexField(grid=field.grid, wavelength=field.wavelength, samples=out)


def apply_pinholes(field: ComplexField, spec: PinholeMaskSpec) -> ComplexField:
    """Zero all samples outside the two circular holes."""
    m = spec.mask(field.grid)
    return ComplexField(grid=field.grid, wavelength=field.wavelength,
                        samples=field.samples * m)


# plan cache shared by all runners in this process; keyed on everything
# that determines the transfer function
_PLAN_CACHE: dict[tuple, PropagationPlan] = {}


def _cached_plan(grid: GridSpec, wavelength: float, z: float, pad_factor: int,
                 band_limited: bool, single: bool) -> PropagationPlan:
    key = (grid.n, grid.pitch, wavelength, z, pad_factor, band_limited, single)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = make_plan(grid, wavelength, z, pad_factor, band_limited,
                         single_precision=single)
        _PLAN_CACHE[key] = plan
    return plan


class SceneRunner:
    """Stage interpreter with precomputed multipliers and cached plans.

    Immutable after construction; run_samples is pure, so one runner can
    serve a whole Monte-Carlo ensemble.
    """

    def __init__(self, scene: SceneConfig, precision: str = "double"):
        if precision not in ("single", "double"):
            raise ConfigurationError(f"precision must be single or double, got {precision}")
        self.scene = scene
        self.precision = precision
        cdtype = np.complex64 if precision == "single" else np.complex128
        ftype = np.float32 if precision == "single" else np.float64
        self._ops: list[tuple[str, object]] = []
        single = precision == "single"
        for i, s in enumerate(scene.stages):
            try:
                if isinstance(s, ObjectStage):
                    if s.obj is None:
                        raise ContractError("object stage not bound to an image")
                    self._ops.append(("mul", s.obj.transmittance(scene.grid).astype(ftype)))
                elif isinstance(s, FreeSpace):
                    plan = _cached_plan(scene.grid, scene.wavelength, s.z,
                                        scene.pad_factor, scene.band_limited, single)
                    self._ops.append(("prop", plan))
                elif isinstance(s, DiffuserStage):
                    psi = s.spec.phase_map(scene.grid)
                    screen = (np.cos(psi) + 1j * np.sin(psi)).astype(cdtype)
                    self._ops.append(("mul", screen))
                elif isinstance(s, PinholeStage):
                    self._ops.append(("mul", s.spec.mask(scene.grid).astype(ftype)))
                elif isinstance(s, Detector):
                    break
            except (ConfigurationError, ContractError) as exc:
                raise type(exc)(f"stage {i}: {exc}") from exc

    def leading_mask_rows(self) -> tuple[int, int] | None:
        """Row band of a leading pinhole mask, if the scene starts with one.

        Lets the ensemble loop evaluate decoherence screens only on rows
        that survive the mask; pointwise masking commutes with pointwise
        screen application, so results are unchanged.
        """
        if self._ops and self._ops[0][0] == "mul":
            stage0 = self.scene.stages[0]
            if isinstance(stage0, PinholeStage):
                m = self._ops[0][1]
                rows = np.where(m.any(axis=1))[0]
                if rows.size:
                    return int(rows[0]), int(rows[-1]) + 1
        return None

    def apply_leading_mask(self, samples: np.ndarray) -> np.ndarray:
        return samples * self._ops[0][1]

    def run_samples(self, samples: np.ndarray, skip_leading_mask: bool = False) -> np.ndarray:
        u = samples
        for i, (kind, arg) in enumerate(self._ops):
            if i == 0 and skip_leading_mask:
                continue
            if kind == "mul":
                u = u * arg
            else:
                u = propagate_samples(u, arg)
        return u


def run_scene(source: ComplexField, scene: SceneConfig) -> ComplexField:
    """Fold the stages over the source; returns the field at the detector."""
    if source.grid != scene.grid:
        raise ContractError(
            f"source grid {source.grid} does not match scene grid {scene.grid}")
    if source.wavelength != scene.wavelength:
        raise ContractError("source wavelength does not match scene wavelength")
    runner = SceneRunner(scene, precision="double")
    out = runner.run_samples(source.samples.astype(np.complex128, copy=False))
    return ComplexField(grid=scene.grid, wavelength=scene.wavelength, samples=out)
