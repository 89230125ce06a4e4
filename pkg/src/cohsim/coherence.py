"""Decoherence filter: Gaussian-correlated dynamic random phase screens.

A screen multiplies the field by exp(i phi) where phi is a zero-mean
Gaussian random field with RMS sigma_phi and Gaussian correlation
coefficient rho(dr) = exp(-dr^2 / ell_phi^2).  For Gaussian phi the
transmission correlation is

    <t(r1) t*(r2)> = exp(-sigma_phi^2 (1 - rho(dr)))
                   ~ exp(-dr^2 / l_c^2)   for dr up to a few l_c,

with the calibration ell_phi = sigma_phi * l_c.  sigma_phi defaults to
2 pi so the residual correlation floor exp(-sigma_phi^2) is below 1e-17.

Screens are synthesized by spectral filtering of white Gaussian noise
with sqrt of the Gaussian power spectrum, then scaled by a deterministic
factor so the population variance equals sigma_phi^2 exactly (this
removes the variance deficit caused by spectral truncation without
disturbing Gaussianity or the correlation shape).  When ell_phi is too
large for the target window to hold the spectrum, the screen is
synthesized on a coarser, wider virtual grid and evaluated on the target
grid by bicubic spline; the screen is smooth at the ell_phi scale, so
the interpolation is exact for practical purposes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import RectBivariateSpline

from .errors import ConfigurationError, NumericalAbortError
from .field import ComplexField, GridSpec, IntensityImage

log = logging.getLogger(__name__)

DEFAULT_SIGMA_PHI = 2.0 * np.pi
DEFAULT_REALIZATIONS = 100

_MASK64 = (1 << 64) - 1
# Synthesis grid sizing: resolve the correlation at ell/8 and the spectrum
# with a window of 24 ell; beyond 8 target pitches the virtual grid wins.
_PITCH_PER_ELL = 8.0
_EXTENT_PER_ELL = 24.0
_DIRECT_PITCH_FACTOR = 8.0


def mix_seed(base_seed: int, k: int) -> int:
    """SplitMix64-style mixing of (base_seed, realization index).

    Gives every realization an independent stream, so results do not
    depend on execution order or worker count.
    """
    z = (int(base_seed) + (int(k) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class PhaseScreenSpec:
    """Parameters of the decoherence screen for one coherence length."""

    grid: GridSpec
    l_c: float
    sigma_phi: float = DEFAULT_SIGMA_PHI
    seed: int = 0

    def __post_init__(self):
        if not (self.l_c > 0):
            raise ConfigurationError(f"l_c must be > 0, got {self.l_c}")
        # sigma_phi = 0 is the explicit degenerate (fully coherent) screen;
        # intermediate values would leave a residual coherence floor.
        if self.sigma_phi != 0.0 and self.sigma_phi < DEFAULT_SIGMA_PHI - 1e-12:
            raise ConfigurationError(
                f"sigma_phi must be 0 or >= 2*pi, got {self.sigma_phi}")

    @property
    def ell_phi(self) -> float:
        """Phase correlation length, sigma_phi * l_c exactly."""
        return self.sigma_phi * self.l_c

    def flags(self) -> list[str]:
        """Resolution warnings for this screen/grid pairing."""
        out = []
        if self.sigma_phi == 0.0:
            return out
        if self.ell_phi < 2.0 * self.grid.pitch:
            out.append("under_resolved")
        if self.ell_phi > self.grid.extent / 2.0:
            out.append("coherent_limit")
        return out


@dataclass(frozen=True)
class EnsembleSpec:
    """Realization count and seed policy of the dynamic-screen ensemble."""

    screen: PhaseScreenSpec
    m: int = DEFAULT_REALIZATIONS
    base_seed: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"realization count must be >= 1, got {self.m}")

    @property
    def effective_seed(self) -> int:
        return self.screen.seed if self.base_seed is None else self.base_seed


class ScreenSampler:
    """Precomputed spectral synthesis machinery for one PhaseScreenSpec.

    Construction picks the synthesis grid, builds the sqrt-spectrum filter
    and the deterministic variance normalization; sample(k) then only costs
    one white-noise draw, one FFT and (for the virtual-grid regime) a
    spline evaluation.
    """

    def __init__(self, spec: PhaseScreenSpec, seed: int | None = None):
        self.spec = spec
        self.seed = spec.seed if seed is None else seed
        self.flags = spec.flags()
        for flag in self.flags:
            log.warning("phase screen %s: l_c=%g m, ell_phi=%g m on extent %g m",
                        flag, spec.l_c, spec.ell_phi, spec.grid.extent)
        if spec.sigma_phi == 0.0:
            self._degenerate = True
            return
        self._degenerate = False

        grid = spec.grid
        ell = spec.ell_phi
        if ell <= _DIRECT_PITCH_FACTOR * grid.pitch:
            self._n_s = grid.n
            self._pitch_s = grid.pitch
            self._interp = False
        else:
            pitch_s = ell / _PITCH_PER_ELL
            extent_s = max(grid.extent + 8.0 * pitch_s, _EXTENT_PER_ELL * ell)
            n_s = int(np.ceil(extent_s / pitch_s / 16.0)) * 16
            self._n_s = max(n_s, 64)
            self._pitch_s = pitch_s
            self._interp = True

        f = sfft.fftfreq(self._n_s, self._pitch_s)
        s = np.exp(-(np.pi * ell) ** 2 * (f[:, None] ** 2 + f[None, :] ** 2))
        s[0, 0] = 0.0  # no DC: a global phase offset carries no physics
        total = float(s.sum())
        if total <= 0.0:
            raise ConfigurationError(
                f"screen spectrum vanished on the synthesis grid (ell_phi={ell} m)")
        self._sqrt_s = np.sqrt(s)
        # Var(Re ifft2(w sqrt(s))) = sum(s) / n^4 for unit white noise.
        self._scale = spec.sigma_phi * self._n_s ** 2 / np.sqrt(total)

    def _synthesize(self, k: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(mix_seed(self.seed, k)))
        w = rng.standard_normal((self._n_s, self._n_s))
        w = w + 1j * rng.standard_normal((self._n_s, self._n_s))
        w *= self._sqrt_s
        phi = sfft.ifft2(w, overwrite_x=True).real
        phi *= self._scale
        return phi

    def _spline(self, k: int) -> RectBivariateSpline:
        phi_s = self._synthesize(k)
        c = (np.arange(self._n_s) - self._n_s // 2) * self._pitch_s
        return RectBivariateSpline(c, c, phi_s, kx=3, ky=3)

    def sample(self, k: int) -> np.ndarray:
        """Full n x n phase map for realization k (float64 radians)."""
        n = self.spec.grid.n
        if self._degenerate:
            return np.zeros((n, n))
        if not self._interp:
            return self._synthesize(k)
        t = self.spec.grid.coords()
        return self._spline(k)(t, t)

    def sample_rows(self, k: int, row_lo: int, row_hi: int) -> np.ndarray:
        """Phase map restricted to rows [row_lo, row_hi); values agree with
        the corresponding rows of sample(k)."""
        n = self.spec.grid.n
        if self._degenerate:
            return np.zeros((row_hi - row_lo, n))
        t = self.spec.grid.coords()
        if not self._interp:
            return self._synthesize(k)[row_lo:row_hi]
        return self._spline(k)(t[row_lo:row_hi], t)


def sample_phase_screen(spec: PhaseScreenSpec, k: int) -> np.ndarray:
    """One realization of the decoherence screen phase (radians).

    Deterministic in (spec, k); realization seeds come from
    mix_seed(spec.seed, k).
    """
    return ScreenSampler(spec).sample(k)


def apply_screen(field: ComplexField, phase_map: np.ndarray) -> ComplexField:
    """Multiply samples by exp(i phi) pointwise; |output| = |input|."""
    phase_map = np.asarray(phase_map)
    if phase_map.shape != field.samples.shape:
        raise ConfigurationError(
            f"phase map shape {phase_map.shape} does not match field {field.samples.shape}")
    out = field.samples * (np.cos(phase_map) + 1j * np.sin(phase_map))
    return ComplexField(grid=field.grid, wavelength=field.wavelength, samples=out)


class PairwiseAccumulator:
    """Pairwise summation over a fixed index-ordered binary tree.

    The tree shape depends only on how many arrays were added, so the sum
    is bit-reproducible for a fixed realization order regardless of how
    work was scheduled.
    """

    def __init__(self):
        self._stack: list[tuple[int, np.ndarray]] = []

    def add(self, arr: np.ndarray) -> None:
        level = 0
        while self._stack and self._stack[-1][0] == level:
            _, prev = self._stack.pop()
            arr = prev + arr
            level += 1
        self._stack.append((level, arr))

    def total(self) -> np.ndarray:
        if not self._stack:
            raise ValueError("nothing accumulated")
        acc = self._stack[-1][1]
        for _, part in reversed(self._stack[:-1]):
            acc = part + acc
        return acc


def _intensity_f64(samples: np.ndarray) -> np.ndarray:
    return samples.real.astype(np.float64) ** 2 + samples.imag.astype(np.float64) ** 2


def ensemble_intensity(source: ComplexField, ensemble: EnsembleSpec, scene,
                       precision: str = "double") -> IntensityImage:
    """Mean detector intensity over the dynamic-screen ensemble.

    Per realization k the screen exp(i phi_k) multiplies the source, the
    scene stages run, and |detector field|^2 enters a pairwise sum in
    fixed k order.  Metadata records l_c, M, the base seed, screen flags
    and a convergence diagnostic (relative L2 change of the mean between
    M/2 and M below 2 percent).
    """
    from .scene import SceneRunner

    runner = SceneRunner(scene, precision=precision)
    if source.grid != scene.grid:
        raise ConfigurationError(
            f"source grid {source.grid} does not match scene grid {scene.grid}")
    spec = ensemble.screen
    if spec.grid != source.grid:
        raise ConfigurationError("screen grid does not match source grid")
    sampler = ScreenSampler(spec, seed=ensemble.effective_seed)

    dtype = np.complex64 if precision == "single" else np.complex128
    ftype = np.float32 if precision == "single" else np.float64
    src = source.samples.astype(dtype, copy=False)
    band = runner.leading_mask_rows()
    if band is not None:
        src = runner.apply_leading_mask(src)

    acc = PairwiseAccumulator()
    running = None
    half = ensemble.m // 2
    half_mean = None
    m = ensemble.m
    for k in range(m):
        if spec.sigma_phi == 0.0:
            u = src
        elif band is not None:
            row_lo, row_hi = band
            phi = sampler.sample_rows(k, row_lo, row_hi).astype(ftype, copy=False)
            u = src.copy()
            u[row_lo:row_hi] *= np.cos(phi) + 1j * np.sin(phi)
        else:
            phi = sampler.sample(k).astype(ftype, copy=False)
            u = src * (np.cos(phi) + 1j * np.sin(phi))
        det = runner.run_samples(u, skip_leading_mask=band is not None)
        ik = _intensity_f64(det)
        s = float(ik.sum())
        if not np.isfinite(s):
            raise NumericalAbortError(
                f"non-finite detector intensity in realization {k}")
        acc.add(ik)
        running = ik.copy() if running is None else running + ik
        if half >= 1 and k == half - 1:
            half_mean = running / half
    mean = acc.total() / m

    converged = None
    if half_mean is not None and m > 1:
        denom = float(np.linalg.norm(mean))
        if denom > 0:
            converged = bool(np.linalg.norm(mean - half_mean) / denom < 0.02)
    metadata = {
        "l_c": spec.l_c,
        "sigma_phi": spec.sigma_phi,
        "m": m,
        "base_seed": ensemble.effective_seed,
        "screen_flags": sampler.flags,
        "converged": converged,
    }
    vmax = float(mean.max())
    scale = 255.0 / vmax if vmax > 0 else 1.0
    if vmax <= 0:
        metadata["zero_field"] = True
    return IntensityImage(grid=source.grid, values=mean, exposure_scale=scale,
                          metadata=metadata)


def coherent_limit_intensity(source: ComplexField, scene,
                             precision: str = "double") -> IntensityImage:
    """Single no-screen propagation: the l_c -> infinity reference."""
    from .scene import SceneRunner

    runner = SceneRunner(scene, precision=precision)
    if source.grid != scene.grid:
        raise ConfigurationError(
            f"source grid {source.grid} does not match scene grid {scene.grid}")
    dtype = np.complex64 if precision == "single" else np.complex128
    det = runner.run_samples(source.samples.astype(dtype, copy=False))
    values = _intensity_f64(det)
    if not np.isfinite(values.sum()):
        raise NumericalAbortError("non-finite detector intensity in coherent run")
    vmax = float(values.max())
    metadata: dict = {"l_c": None, "m": 1, "coherent_limit": True}
    scale = 255.0 / vmax if vmax > 0 else 1.0
    if vmax <= 0:
        metadata["zero_field"] = True
    return IntensityImage(grid=source.grid, values=values, exposure_scale=scale,
                          metadata=metadata)
