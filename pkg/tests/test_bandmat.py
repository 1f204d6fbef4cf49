import numpy as np
import pytest

from combust.bandmat import BandedMatrix


def random_banded(n, lower, upper, seed=0):
    rng = np.random.default_rng(seed)
    dense = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            dense[i, j] = rng.normal()
    dense[np.arange(n), np.arange(n)] += 3.0  # keep it comfortably nonsingular
    ab = np.zeros((lower + upper + 1, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            ab[upper + i - j, j] = dense[i, j]
    return BandedMatrix(ab, lower, upper), dense


@pytest.mark.parametrize("n,lower,upper", [(5, 1, 1), (8, 2, 2), (6, 0, 2), (7, 2, 0)])
def test_dense_roundtrip(n, lower, upper):
    banded, dense = random_banded(n, lower, upper)
    np.testing.assert_array_equal(banded.to_dense(), dense)


@pytest.mark.parametrize("n,lower,upper", [(5, 1, 1), (8, 2, 2), (6, 0, 2)])
def test_matvec(n, lower, upper):
    banded, dense = random_banded(n, lower, upper, seed=1)
    x = np.random.default_rng(2).normal(size=n)
    np.testing.assert_allclose(banded.matvec(x), dense @ x, rtol=1e-14, atol=1e-14)


def test_scale_rows_add_diagonal():
    banded, dense = random_banded(8, 2, 2, seed=3)
    s = np.random.default_rng(4).uniform(0.5, 2.0, 8)
    vals = np.random.default_rng(5).normal(size=8)
    banded.scale_rows(s)
    banded.add_diagonal(vals)
    expected = dense * s[:, None]
    expected[np.arange(8), np.arange(8)] += vals
    np.testing.assert_allclose(banded.to_dense(), expected, rtol=1e-14)


def test_solve_matches_dense():
    banded, dense = random_banded(10, 2, 2, seed=6)
    b = np.random.default_rng(7).normal(size=10)
    np.testing.assert_allclose(banded.solve(b), np.linalg.solve(dense, b), rtol=1e-10)
