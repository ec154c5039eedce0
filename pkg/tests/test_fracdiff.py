import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import binom

from lwhittle.fracdiff import (coeff_array, coeff_matrix, coeffs, fft_length, fracdiff, fracdiff_fast,
                               fracdiff_naive, fracint)
from lwhittle.series import TimeSeries

ds = st.floats(-3, 3, allow_nan=False, allow_subnormal=False)


def binomial_coeffs(d, n):
    # pi_k(d) = (-1)^k C(d, k), an independent closed form
    k = np.arange(n)
    return (-1.0) ** k * binom(d, k)


def test_coeff_examples():
    np.testing.assert_array_equal(coeffs(0, 3).pi, [1, 0, 0])
    np.testing.assert_array_equal(coeffs(1, 4).pi, [1, -1, 0, 0])
    np.testing.assert_allclose(coeffs(0.5, 3).pi, [1, -0.5, -0.125], rtol=0, atol=1e-15)


@pytest.mark.parametrize("d", [-2.3, -0.7, 0.0, 0.3, 1.0, 2.0, 2.6])
def test_coeffs_match_binomial(d):
    np.testing.assert_allclose(coeff_array(d, 40), binomial_coeffs(d, 40), rtol=1e-12, atol=1e-14)


@given(ds, st.integers(1, 300))
def test_recurrence_invariants(d, n):
    pi = coeff_array(d, n)
    assert pi[0] == 1.0
    k = np.arange(1, n)
    np.testing.assert_allclose(pi[1:], pi[:-1] * (k - 1 - d) / k, rtol=1e-13, atol=1e-300)


@given(st.integers(1, 4), st.integers(6, 50))
def test_integer_d_terminates(d, n):
    pi = coeff_array(float(d), n)
    assert np.all(pi[d + 1:] == 0)


def test_coeff_matrix_rows():
    grid = np.array([-1.0, 0.25, 1.7])
    P = coeff_matrix(grid, 30)
    for row, d in zip(P, grid):
        np.testing.assert_array_equal(row, coeff_array(d, 30))


def test_naive_examples():
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(fracdiff_naive(x, 0), x)
    np.testing.assert_array_equal(fracdiff_naive(x, 1), [1, 1, 1])
    np.testing.assert_allclose(fracdiff_naive(x, 0.5), [1, 1.5, 1.875], atol=1e-15)
    np.testing.assert_allclose(fracdiff_fast(x, 0.5), [1, 1.5, 1.875], atol=1e-10)


def test_fast_long_series_matches_naive(rng):
    x = rng.standard_normal(5000)
    np.testing.assert_allclose(fracdiff_fast(x, -0.7), fracdiff_naive(x, -0.7), rtol=0, atol=1e-8)


def test_fast_identity_at_zero(rng):
    x = rng.standard_normal(100)
    y = fracdiff_fast(x, 0.0)
    np.testing.assert_array_equal(y, x)
    assert y is not x


def test_fast_rows(rng):
    X = rng.standard_normal((3, 70))
    Y = fracdiff_fast(X, 0.4)
    for row, y in zip(X, Y):
        np.testing.assert_allclose(y, fracdiff_naive(row, 0.4), atol=1e-12)


def test_timeseries_in_timeseries_out():
    x = TimeSeries(np.arange(1.0, 6.0), name="x")
    y = fracdiff(x, 1.0)
    assert isinstance(y, TimeSeries)
    assert "fracdiff" in y.origin
    np.testing.assert_allclose(y.values, [1, 1, 1, 1, 1], atol=1e-12)


def test_fft_length():
    assert fft_length(1) == 1
    assert fft_length(3) == 8
    assert fft_length(512) == 1024
    assert fft_length(513) == 2048


@given(st.integers(1, 600), ds, st.integers(0, 2**32 - 1))
def test_fast_vs_naive(n, d, seed):
    x = np.random.default_rng(seed).standard_normal(n) * 10
    err = np.max(np.abs(fracdiff_fast(x, d) - fracdiff_naive(x, d)))
    assert err <= 1e-8 * (1 + np.max(np.abs(x)))


@given(st.integers(2, 512), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.integers(0, 2**32 - 1))
def test_composition(n, a, b, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    np.testing.assert_allclose(fracdiff(fracdiff(x, a), b), fracdiff(x, a + b), rtol=0, atol=1e-8)


@given(st.integers(2, 512), st.floats(-2, 2), st.integers(0, 2**32 - 1))
def test_inversion(n, d, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    np.testing.assert_allclose(fracint(fracdiff(x, d), d), x, rtol=0, atol=1e-7)


@given(ds, ds)
def test_coefficient_convolution(a, b):
    n = 257
    conv = np.convolve(coeff_array(a, n), coeff_array(b, n))[:n]
    np.testing.assert_allclose(conv, coeff_array(a + b, n), rtol=0, atol=1e-10 * (1 + np.max(np.abs(conv))))
