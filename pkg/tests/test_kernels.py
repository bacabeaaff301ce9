import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from lzms import _kernels


def _random(rng, n, scale):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


@pytest.mark.parametrize("n", [2, 3, 4, 16])
@pytest.mark.parametrize("scale", [1e-8, 1e-3, 0.1, 1.0, 10.0])
def test_expm_matches_scipy(n, scale):
    rng = np.random.default_rng(n * 1000 + int(scale * 7))
    for _ in range(5):
        A = _random(rng, n, scale)
        ref = scipy.linalg.expm(A)
        got = _kernels.expm(A)
        assert np.abs(got - ref).max() <= 1e-11 * max(1.0, np.abs(ref).max())


@pytest.mark.parametrize("scale", [50.0, 1e3, 1e5])
def test_expm_large_propagator_generators(scale):
    # -i(H - i diag(Gamma)) with large Hermitian part and strong loss
    rng = np.random.default_rng(int(scale))
    for _ in range(5):
        X = _random(rng, 3, scale)
        A = -1j * (X + X.conj().T) / 2 - np.diag(rng.uniform(0, scale, 3))
        ref = scipy.linalg.expm(A)
        got = _kernels.expm(A)
        assert np.abs(got - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 50.0))
def test_expm_of_antihermitian_is_unitary(seed, scale):
    rng = np.random.default_rng(seed)
    X = _random(rng, 3, scale)
    A = X - X.conj().T
    U = _kernels.expm(A)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(3), atol=1e-11)


def test_expm_zero_and_diagonal():
    np.testing.assert_array_equal(_kernels.expm(np.zeros((3, 3), complex)), np.eye(3))
    d = np.array([1j, -2.0, 0.5 - 3j])
    np.testing.assert_allclose(_kernels.expm(np.diag(d)), np.diag(np.exp(d)), rtol=1e-13)
