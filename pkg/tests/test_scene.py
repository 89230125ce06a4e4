import numpy as np
import pytest

from cohsim import (ComplexField, ConfigurationError, ContractError, DataError,
                    DiffuserSpec, GridSpec, PinholeMaskSpec, SceneConfig, SlmObject,
                    apply_diffuser, apply_pinholes, apply_slm, make_plan,
                    new_plane_wave, propagate, run_scene, total_power)
from cohsim.scene import Detector, DiffuserStage, FreeSpace, ObjectStage, PinholeStage

LAM = 635e-9


def blank_image():
    return np.zeros((28, 28), dtype=np.uint8)


def test_slm_blank_is_identity(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    out = apply_slm(f, SlmObject(image=blank_image()))
    assert np.array_equal(out.samples, f.samples)


def test_slm_opaque_blocks_everything(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    out = apply_slm(f, SlmObject(image=np.full((28, 28), 255, dtype=np.uint8)))
    assert np.all(out.samples == 0.0)


def test_slm_uniform_gray_scales_amplitude(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    out = apply_slm(f, SlmObject(image=np.full((28, 28), 128, dtype=np.uint8)))
    assert np.allclose(out.samples, 127.0 / 255.0)


def test_slm_power_never_increases(grid128, rng):
    img = rng.integers(0, 256, size=(28, 28), dtype=np.uint8)
    f = new_plane_wave(grid128, LAM, 1.0)
    out = apply_slm(f, SlmObject(image=img))
    assert total_power(out) <= total_power(f) * (1 + 1e-12)


def test_slm_rejects_wrong_shape():
    with pytest.raises(DataError):
        SlmObject(image=np.zeros((27, 28), dtype=np.uint8))
    with pytest.raises(DataError):
        SlmObject(image=np.zeros((28, 28), dtype=np.float64))


def test_slm_partial_extent_outside_transmits(grid128):
    img = np.full((28, 28), 255, dtype=np.uint8)
    obj = SlmObject(image=img, object_extent=2e-3)
    t = obj.transmittance(grid128)
    c = grid128.coords()
    outside = np.abs(c) > 1.05e-3
    assert np.all(t[np.ix_(outside, outside)] == 1.0)
    inside = np.abs(c) < 0.9e-3
    assert np.all(t[np.ix_(inside, inside)] == 0.0)


def test_diffuser_zero_rms_is_identity(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    out = apply_diffuser(f, DiffuserSpec(phase_rms=0.0))
    assert np.array_equal(out.samples, f.samples)


def test_diffuser_static_and_power_preserving(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    spec = DiffuserSpec(seed=9)
    a = apply_diffuser(f, spec)
    b = apply_diffuser(f, spec)
    assert np.array_equal(a.samples, b.samples)
    assert abs(total_power(a) - total_power(f)) / total_power(f) <= 1e-12


def test_diffuser_requires_resolvable_correlation(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    with pytest.raises(ConfigurationError):
        apply_diffuser(f, DiffuserSpec(r_g=grid128.pitch / 2))


def test_diffuser_rejects_dynamic():
    with pytest.raises(ConfigurationError):
        DiffuserSpec(static=False)


def test_pinholes_clipped_on_default_grid(grid512):
    # 5 mm spacing + 1 mm holes touch the 6 mm aperture edge exactly
    f = new_plane_wave(grid512, LAM, 1.0)
    with pytest.raises(ConfigurationError):
        apply_pinholes(f, PinholeMaskSpec())


def test_pinholes_transmitted_power_matches_hole_area():
    grid = GridSpec.from_extent(2048, 12e-3)
    f = new_plane_wave(grid, LAM, 1.0)
    spec = PinholeMaskSpec()
    out = apply_pinholes(f, spec)
    transmitted = np.count_nonzero(out.samples)
    hole_area_px = 2 * np.pi * (spec.diameter / 2) ** 2 / grid.pitch ** 2
    # one-pixel quantization tolerance along the two perimeters
    perimeter_px = 2 * np.pi * spec.diameter / grid.pitch
    assert abs(transmitted - hole_area_px) <= perimeter_px


def test_pinholes_reject_tiny_diameter():
    grid = GridSpec.from_extent(512, 12e-3)
    with pytest.raises(ConfigurationError):
        PinholeMaskSpec(diameter=3 * grid.pitch, spacing=5e-3).mask(grid)


def test_pinholes_reject_spacing_not_exceeding_diameter():
    with pytest.raises(ConfigurationError):
        PinholeMaskSpec(diameter=1e-3, spacing=1e-3)


def test_scene_detector_only_identity(grid128, rng):
    samples = rng.standard_normal((128, 128)) + 0j
    f = ComplexField(grid=grid128, wavelength=LAM, samples=samples)
    scene = SceneConfig(grid=grid128, wavelength=LAM, stages=(Detector(),))
    out = run_scene(f, scene)
    assert np.array_equal(out.samples, f.samples)


def test_scene_blank_object_equals_bare_propagation(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    scene = SceneConfig(grid=grid128, wavelength=LAM,
                        stages=(ObjectStage(), FreeSpace(2.5), Detector()))
    scene = scene.bind_object(blank_image())
    via_scene = run_scene(f, scene)
    direct = propagate(f, make_plan(grid128, LAM, 2.5, pad_factor=2))
    assert np.array_equal(via_scene.samples, direct.samples)


def test_scene_validation():
    grid = GridSpec.from_extent(128, 6e-3)
    with pytest.raises(ConfigurationError):
        SceneConfig(grid=grid, wavelength=LAM, stages=())
    with pytest.raises(ConfigurationError):
        SceneConfig(grid=grid, wavelength=LAM, stages=(FreeSpace(1.0),))
    with pytest.raises(ConfigurationError):
        SceneConfig(grid=grid, wavelength=LAM,
                    stages=(Detector(), FreeSpace(1.0), Detector()))
    with pytest.raises(ConfigurationError):
        SceneConfig(grid=grid, wavelength=LAM,
                    stages=(FreeSpace(-1.0), Detector()))


def test_scene_unbound_object_raises(grid128):
    f = new_plane_wave(grid128, LAM, 1.0)
    scene = SceneConfig(grid=grid128, wavelength=LAM,
                        stages=(ObjectStage(), FreeSpace(1.0), Detector()))
    with pytest.raises(ContractError, match="stage 0"):
        run_scene(f, scene)


def test_scene_grid_mismatch(grid128, grid512):
    f = new_plane_wave(grid512, LAM, 1.0)
    scene = SceneConfig(grid=grid128, wavelength=LAM, stages=(Detector(),))
    with pytest.raises(ContractError):
        run_scene(f, scene)


def test_scene_passivity(grid128, rng):
    img = rng.integers(0, 256, size=(28, 28), dtype=np.uint8)
    scene = SceneConfig(grid=grid128, wavelength=LAM,
                        stages=(ObjectStage(), FreeSpace(1.25),
                                DiffuserStage(DiffuserSpec(seed=4)),
                                FreeSpace(1.25), Detector()))
    scene = scene.bind_object(img)
    f = new_plane_wave(grid128, LAM, 1.0)
    out = run_scene(f, scene)
    assert total_power(out) <= total_power(f) * (1 + 1e-12)


def test_scene_determinism_and_total_path(grid128):
    img = np.zeros((28, 28), dtype=np.uint8)
    img[10:18, 10:18] = 200
    scene = SceneConfig(grid=grid128, wavelength=LAM,
                        stages=(ObjectStage(), FreeSpace(1.0),
                                DiffuserStage(DiffuserSpec(seed=7)),
                                FreeSpace(1.5), Detector())).bind_object(img)
    assert scene.total_path == pytest.approx(2.5)
    f = new_plane_wave(grid128, LAM, 1.0)
    a = run_scene(f, scene)
    b = run_scene(f, scene)
    assert a.samples.tobytes() == b.samples.tobytes()


def test_scene_serialization_round_trip(grid128):
    scene = SceneConfig(grid=grid128, wavelength=LAM,
                        stages=(ObjectStage(), FreeSpace(1.25),
                                DiffuserStage(DiffuserSpec(seed=3)),
                                FreeSpace(1.25), Detector()))
    d = scene.to_dict()
    back = SceneConfig.from_dict(d)
    assert back.to_dict() == d
    assert back.structural_hash() == scene.structural_hash()
    # binding an object must not change the structural hash
    assert scene.bind_object(blank_image()).structural_hash() == scene.structural_hash()
