import math

import numpy as np
import pytest

from crowtune.errors import DegenerateImageError
from crowtune.fitness import (FitnessConfig, evaluate, hfer, laplacian_variance,
                              power_spectrum, snr)


def dft_matrix(n):
    """Direct DFT summation weights, kept independent of numpy.fft."""
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * j * k / n)


def brute_power_spectrum(slice2d):
    """O(n^4) direct DFT summation, then manual center shift."""
    n, m = slice2d.shape
    f = dft_matrix(n) @ slice2d @ dft_matrix(m).T
    p = np.abs(f) ** 2
    return np.roll(np.roll(p, n // 2, axis=0), m // 2, axis=1)


def brute_hfer(slice2d, gamma):
    p = brute_power_spectrum(slice2d)
    n, m = slice2d.shape
    q_max = math.sqrt((n // 2) ** 2 + (m // 2) ** 2)
    high = total = 0.0
    for i in range(n):
        for j in range(m):
            q = math.hypot(i - n // 2, j - m // 2)
            total += p[i, j]
            if q > gamma * q_max:
                high += p[i, j]
    return high / total


def test_snr_hand_example():
    slice2d = np.array([[1.0, 1.0], [3.0, 3.0]])
    assert snr(slice2d) == pytest.approx(2.0)  # mean 2, population sigma 1
    assert snr(np.stack([slice2d, slice2d])) == pytest.approx(2.0)


def test_snr_constant_slice_is_degenerate():
    with pytest.raises(DegenerateImageError):
        snr(np.full((4, 4), 3.0))


def test_power_spectrum_constant_slice_is_dc_only():
    n, c = 8, 2.5
    p = power_spectrum(np.full((n, n), c))
    expected = np.zeros((n, n))
    expected[n // 2, n // 2] = (n * n * c) ** 2
    assert np.allclose(p, expected)


def test_power_spectrum_parseval():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((12, 12))
    assert power_spectrum(x).sum() == pytest.approx(12 * 12 * np.sum(x * x))


def test_power_spectrum_matches_brute_force():
    rng = np.random.default_rng(1)
    for n, m in [(4, 4), (8, 8), (16, 16), (8, 16), (7, 9)]:
        x = rng.standard_normal((n, m))
        p = power_spectrum(x)
        ref = brute_power_spectrum(x)
        assert np.max(np.abs(p - ref)) <= 1e-9 * np.max(ref)


def test_hfer_constant_slice_is_zero():
    for gamma in (0.1, 0.25, 0.9):
        assert hfer(np.full((8, 8), 4.0), gamma) == 0.0


def test_hfer_impulse_counts_high_frequency_bins():
    # single-pixel impulse has a flat spectrum: HFER = high-bin count / total bins
    n = 8
    x = np.zeros((n, n))
    x[3, 5] = 1.0
    gamma = 0.25
    q_max = math.sqrt(2) * (n // 2)
    high = sum(
        1 for i in range(n) for j in range(n)
        if math.hypot(i - n // 2, j - n // 2) > gamma * q_max
    )
    assert hfer(x, gamma) == pytest.approx(high / n**2)


def test_hfer_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.random((16, 16))
        assert hfer(x, 0.25) == pytest.approx(brute_hfer(x, 0.25), rel=1e-9)


def test_hfer_bounded_and_monotone_in_gamma():
    rng = np.random.default_rng(3)
    x = rng.random((16, 16))
    gammas = np.linspace(0.05, 0.95, 10)
    values = [hfer(x, g) for g in gammas]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(values[i + 1] <= values[i] + 1e-12 for i in range(len(values) - 1))


def test_hfer_zero_slice_is_degenerate():
    with pytest.raises(DegenerateImageError):
        hfer(np.zeros((8, 8)), 0.25)


def test_laplacian_variance_flat_and_ramp_are_zero():
    assert laplacian_variance(np.full((8, 8), 3.0)) == 0.0
    ramp = np.tile(np.arange(8.0), (8, 1))
    assert laplacian_variance(ramp) == pytest.approx(0.0, abs=1e-12)


def test_laplacian_variance_checkerboards():
    # even interior gives equal counts of the two alternating responses
    idx = np.indices((6, 6)).sum(axis=0) % 2
    assert laplacian_variance(idx.astype(float)) == pytest.approx(16.0)  # responses +-4
    signed = 2.0 * idx - 1.0
    assert laplacian_variance(signed) == pytest.approx(64.0)  # responses +-8


def test_laplacian_variance_matches_direct_convolution():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((10, 10))
    kernel = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=float)
    responses = [
        float(np.sum(kernel * x[i - 1:i + 2, j - 1:j + 2]))
        for i in range(1, 9) for j in range(1, 9)
    ]
    assert laplacian_variance(x) == pytest.approx(np.var(responses))


def test_evaluate_single_term_reductions():
    rng = np.random.default_rng(11)
    x = rng.random((4, 4))
    slice2d = (x - x.mean()) / x.std() + 2.0  # mean 2, population sigma 1: SNR exactly 2
    assert snr(slice2d) == pytest.approx(2.0)
    only_snr = evaluate(slice2d, FitnessConfig(eta=1.0, xi=0.0, gamma=0.25))
    assert only_snr.fitness == pytest.approx(0.5)
    only_hfer = evaluate(slice2d, FitnessConfig(eta=0.0, xi=1.0, gamma=0.25))
    assert only_hfer.fitness == pytest.approx(1.0 - only_hfer.hfer)


def test_evaluate_weighted_sum():
    rng = np.random.default_rng(5)
    vol = rng.random((2, 12, 12))
    rep = evaluate(vol, FitnessConfig(eta=3.0, xi=5.0, gamma=0.25))
    assert rep.fitness == pytest.approx(3.0 / rep.snr + 5.0 * (1.0 - rep.hfer))
    assert rep.objective_vector == pytest.approx((1.0 / rep.snr, 1.0 - rep.hfer))
    # eta=3, xi=5, SNR=2, HFER=0.4 would give 3*0.5 + 5*0.6 = 4.5
    assert 3.0 * (1 / 2) + 5.0 * (1 - 0.4) == pytest.approx(4.5)


def test_evaluate_linear_in_weights():
    rng = np.random.default_rng(6)
    vol = rng.random((10, 10))
    one = evaluate(vol, FitnessConfig(eta=1.0, xi=4.0))
    two = evaluate(vol, FitnessConfig(eta=2.0, xi=8.0))
    assert two.fitness == pytest.approx(2.0 * one.fitness, rel=1e-12)


def test_metrics_invariant_under_transpose_rot180_and_scale():
    rng = np.random.default_rng(7)
    x = rng.random((12, 12)) + 0.1
    base = (snr(x), hfer(x, 0.25), laplacian_variance(x))
    for y in (x.T, np.rot90(x, 2)):
        assert snr(y) == pytest.approx(base[0], rel=1e-9)
        assert hfer(y, 0.25) == pytest.approx(base[1], rel=1e-9)
        assert laplacian_variance(y) == pytest.approx(base[2], rel=1e-9)
    assert snr(3.7 * x) == pytest.approx(base[0], rel=1e-9)
    assert hfer(3.7 * x, 0.25) == pytest.approx(base[1], rel=1e-9)


def test_fitness_config_validation():
    with pytest.raises(ValueError):
        FitnessConfig(eta=0.0, xi=0.0)
    with pytest.raises(ValueError):
        FitnessConfig(eta=-1.0, xi=1.0)
    with pytest.raises(ValueError):
        FitnessConfig(gamma=1.0)
    with pytest.raises(ValueError):
        hfer(np.ones((4, 4)), 0.0)
