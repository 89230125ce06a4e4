import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import j1

from cohsim import (ConfigurationError, DataError, FringeWindow, GridSpec,
                    IntensityImage, Window, entropy_2d, fringe_visibility,
                    mean_entropy, quantize_to_u8, speckle_stats)
from cohsim.metrology import (entropy_from_histogram, format_csv,
                              neighborhood_mean_u8, parse_csv)


def brute_entropy(img):
    """Independent oracle: per-pixel python loops, same j convention."""
    from math import log2

    n_rows, n_cols = img.shape
    hist = {}
    for y in range(n_rows):
        for x in range(n_cols):
            s = 0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dy == 0 and dx == 0:
                        continue
                    yy = min(max(y + dy, 0), n_rows - 1)
                    xx = min(max(x + dx, 0), n_cols - 1)
                    s += int(img[yy, xx])
            j = (s + 4) // 8
            hist[(int(img[y, x]), j)] = hist.get((int(img[y, x]), j), 0) + 1
    n2 = n_rows * n_cols
    return -sum(c / n2 * log2(c / n2) for c in hist.values())


def test_entropy_constant_image_is_zero():
    img = np.full((32, 32), 77, dtype=np.uint8)
    rep = entropy_2d(img)
    assert rep.h_bits == 0.0
    assert np.count_nonzero(rep.histogram) == 1


def test_entropy_uniform_histogram_is_16_bits():
    hist = np.ones((256, 256), dtype=np.int64)
    assert entropy_from_histogram(hist) == pytest.approx(16.0, abs=1e-12)


def test_entropy_bounds_random_images(rng):
    for _ in range(5):
        img = rng.integers(0, 256, size=(24, 24), dtype=np.uint8)
        h = entropy_2d(img).h_bits
        assert 0.0 <= h <= 16.0


def test_entropy_stripe_frozen_oracle_value():
    # 6x6, columns alternating 0/255; value computed once with the
    # brute-force reference and frozen
    img = np.zeros((6, 6), dtype=np.uint8)
    img[:, 1::2] = 255
    assert entropy_2d(img).h_bits == pytest.approx(1.9182958340544893, abs=1e-12)


def test_entropy_matches_brute_force(rng):
    for _ in range(5):
        img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        assert entropy_2d(img).h_bits == pytest.approx(brute_entropy(img), abs=1e-12)


def test_entropy_permutation_sensitivity():
    # same gray histogram, different spatial structure, different H
    half = np.zeros((16, 16), dtype=np.uint8)
    half[:, 8:] = 255
    checker = (np.indices((16, 16)).sum(axis=0) % 2 * 255).astype(np.uint8)
    h_half = entropy_2d(half).h_bits
    h_checker = entropy_2d(checker).h_bits
    assert h_half == pytest.approx(1.543564443199596, abs=1e-12)
    assert h_checker == pytest.approx(1.7578784625383954, abs=1e-12)
    assert h_half != h_checker


def test_entropy_rejects_empty_and_float():
    with pytest.raises(DataError):
        entropy_2d(np.zeros((0, 0), dtype=np.uint8))
    with pytest.raises(DataError):
        entropy_2d(np.zeros((4, 4)))


def test_neighborhood_mean_exact_rounding():
    img = np.array([[0, 1], [2, 3]], dtype=np.uint8)
    j = neighborhood_mean_u8(img)
    # replicated borders: each pixel's 8 neighbors drawn from the 2x2 block
    # pixel (0,0): neighbors 0,1,1 / 0,1 / 2,3,3 -> sum 11 -> (11+4)//8 = 1
    assert j[0, 0] == 1


def test_quantize_uses_exposure_scale():
    values = np.array([[0.0, 0.004], [0.008, 1.0]])
    q = quantize_to_u8(values, 255.0 / 0.008)
    assert q.tolist() == [[0, 128], [255, 255]]


def test_mean_entropy():
    assert mean_entropy([2.0]) == (2.0, 0.0)
    assert mean_entropy([2.0, 2.0]) == (2.0, 0.0)
    with pytest.raises(DataError):
        mean_entropy([])


def _fringe_image(grid, v=1.0, period=40e-6):
    c = grid.coords()
    X, _ = np.meshgrid(c, c)
    values = 1.0 + v * np.cos(2 * np.pi * X / period)
    return IntensityImage(grid=grid, values=values, exposure_scale=1.0)


def test_visibility_analytic_fringe():
    grid = GridSpec.from_extent(512, 6e-3)
    img = _fringe_image(grid, v=1.0)
    rep = fringe_visibility(img, FringeWindow(period=40e-6, width=4 * 40e-6, height=1e-3))
    assert rep.visibility == pytest.approx(1.0, abs=1e-6)
    partial = _fringe_image(grid, v=0.37)
    rep2 = fringe_visibility(partial, FringeWindow(period=40e-6, width=4 * 40e-6, height=1e-3))
    assert rep2.visibility == pytest.approx(0.37, abs=1e-6)


def test_visibility_constant_image_is_zero():
    grid = GridSpec.from_extent(256, 6e-3)
    img = IntensityImage(grid=grid, values=np.ones((256, 256)), exposure_scale=1.0)
    rep = fringe_visibility(img, FringeWindow(period=40e-6, width=200e-6, height=1e-3))
    assert rep.visibility == pytest.approx(0.0, abs=1e-9)


def test_visibility_zero_window_errors():
    grid = GridSpec.from_extent(256, 6e-3)
    img = IntensityImage(grid=grid, values=np.zeros((256, 256)), exposure_scale=1.0)
    with pytest.raises(DataError):
        fringe_visibility(img, FringeWindow(period=40e-6, width=200e-6, height=1e-3))


def test_fringe_window_validation():
    with pytest.raises(ConfigurationError):
        FringeWindow(period=40e-6, width=100e-6, height=1e-3)  # < 3 periods


def _synthetic_speckle(grid, f_cut, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    f = np.fft.fftfreq(grid.n, grid.pitch)
    mask = (f[None, :] ** 2 + f[:, None] ** 2) <= f_cut ** 2
    field = np.fft.ifft2(np.fft.fft2(w) * mask)
    return IntensityImage(grid=grid, values=np.abs(field) ** 2, exposure_scale=1.0)


def _analytic_speckle_size(f_cut):
    # field correlation of a circular spectrum is a jinc; intensity
    # correlation is its square; solve |2 J1(u)/u|^2 = 1/e
    g = lambda u: (2 * j1(u) / u) ** 2 - 1 / np.e
    u_star = brentq(g, 1e-6, 3.8)
    return u_star / (2 * np.pi * f_cut)


def test_speckle_size_matches_analytic_oracle():
    grid = GridSpec.from_extent(512, 6e-3)
    f_cut = 1 / (12 * grid.pitch)
    img = _synthetic_speckle(grid, f_cut, seed=2)
    rep = speckle_stats(img, Window(width=4e-3, height=4e-3))
    expected = _analytic_speckle_size(f_cut)
    assert rep.mean_size == pytest.approx(expected, rel=0.10)


def test_speckle_contrast_fully_developed():
    grid = GridSpec.from_extent(512, 6e-3)
    img = _synthetic_speckle(grid, 1 / (10 * grid.pitch), seed=3)
    rep = speckle_stats(img, Window(width=4e-3, height=4e-3))
    assert rep.contrast == pytest.approx(1.0, abs=0.15)


def test_speckle_stationarity_under_window_shift():
    grid = GridSpec.from_extent(512, 6e-3)
    img = _synthetic_speckle(grid, 1 / (10 * grid.pitch), seed=4)
    a = speckle_stats(img, Window(width=3e-3, height=3e-3))
    shift = 10 * grid.pitch
    b = speckle_stats(img, Window(width=3e-3, height=3e-3, center_x=shift, center_y=shift))
    assert abs(a.mean_size - b.mean_size) / a.mean_size < 0.05


def test_speckle_constant_window_errors():
    grid = GridSpec.from_extent(128, 6e-3)
    img = IntensityImage(grid=grid, values=np.ones((128, 128)), exposure_scale=1.0)
    with pytest.raises(DataError):
        speckle_stats(img, Window(width=2e-3, height=2e-3))


def test_speckle_window_must_fit():
    grid = GridSpec.from_extent(128, 6e-3)
    img = IntensityImage(grid=grid, values=np.ones((128, 128)), exposure_scale=1.0)
    with pytest.raises(ConfigurationError):
        speckle_stats(img, Window(width=8e-3, height=2e-3))


def test_csv_format_and_parse_round_trip():
    text = format_csv(["a_m", "b"], [(1e-3, 0.123456789123), (2e-3, 7)])
    assert text.splitlines()[0] == "a_m,b"
    assert text == format_csv(["a_m", "b"], [(1e-3, 0.123456789123), (2e-3, 7)])
    header, rows = parse_csv(text)
    assert header == ["a_m", "b"]
    assert rows[0][0] == pytest.approx(1e-3)
    # 9 significant digits survive the round trip
    assert rows[0][1] == pytest.approx(0.123456789, abs=1e-9)


def test_csv_parse_errors_name_line():
    with pytest.raises(DataError, match="line 3"):
        parse_csv("a,b\n1,2\n3\n")
    with pytest.raises(DataError, match="line 2"):
        parse_csv("a,b\nx,y\n")
    with pytest.raises(DataError):
        parse_csv("")
