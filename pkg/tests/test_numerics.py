import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from orbitqsl.config import override_tolerances
from orbitqsl.errors import DimensionMismatch, NotHermitian, NotPSD, ParseError
from orbitqsl.numerics import (
    SIGMA_X,
    SIGMA_Z,
    hermitian_eig,
    kron,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    pauli_dot,
    propagator,
    sqrt_psd,
)
from orbitqsl.states import random_density, random_hermitian, random_psd_hamiltonian


def test_eig_diagonal():
    es = hermitian_eig(np.diag([3.0, 1.0]))
    assert np.allclose(es.values, [1, 3])
    assert np.allclose(np.abs(es.vectors), [[0, 1], [1, 0]])


def test_eig_sigma_x():
    es = hermitian_eig(SIGMA_X)
    assert np.allclose(es.values, [-1, 1])
    # columns proportional to (1, -1)/sqrt2 and (1, 1)/sqrt2 up to phase
    assert abs(abs(np.vdot(es.vectors[:, 0], np.array([1, -1]) / math.sqrt(2))) - 1) < 1e-12
    assert abs(abs(np.vdot(es.vectors[:, 1], np.array([1, 1]) / math.sqrt(2))) - 1) < 1e-12


def test_eig_reconstruction(rng):
    H = random_hermitian(6, rng)
    es = hermitian_eig(H)
    assert np.all(np.diff(es.values) >= 0)
    assert np.abs(es.reconstruct() - H).max() < 1e-12
    assert np.abs(es.vectors.conj().T @ es.vectors - np.eye(6)).max() < 1e-12


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermiticity_tolerance_override():
    M = np.array([[1, 1e-8], [0, 1]])
    with pytest.raises(NotHermitian):
        hermitian_eig(M)
    with override_tolerances(herm=1e-6):
        hermitian_eig(M)


def test_propagator_zero_hamiltonian():
    assert np.abs(propagator(np.zeros((3, 3)), 2.7) - np.eye(3)).max() == 0


def test_propagator_sigma_z():
    assert np.abs(propagator(SIGMA_Z, math.pi / 2) - np.diag([-1j, 1j])).max() < 1e-15


def test_propagator_pauli_identity():
    n = np.array([1 / math.sqrt(2), 1 / math.sqrt(3), -1 / math.sqrt(6)])
    a = 0.83
    nsig = pauli_dot(n)
    expected = np.exp(-1j * a) * (math.cos(a) * np.eye(2) - 1j * math.sin(a) * nsig)
    assert np.abs(propagator(nsig + np.eye(2), a) - expected).max() < 1e-14


def test_propagator_matches_expm(rng):
    H = random_hermitian(5, rng, norm=3.0)
    assert np.abs(propagator(H, 1.3, hbar=0.7) - scipy.linalg.expm(-1j * H * 1.3 / 0.7)).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 6), t1=st.floats(-5, 5), t2=st.floats(-5, 5))
def test_propagator_unitary_and_group(seed, dim, t1, t2):
    H = random_hermitian(dim, np.random.default_rng(seed), norm=2.0)
    U1, U2 = propagator(H, t1), propagator(H, t2)
    assert np.abs(U1.conj().T @ U1 - np.eye(dim)).max() < 1e-10
    assert np.abs(propagator(H, t1 + t2) - U1 @ U2).max() < 1e-10


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(kron(SIGMA_X, SIGMA_X) @ ket00, [0, 0, 0, 1])
    a, b, c, d = 2.0, 3.0, 5.0, 7.0
    assert np.array_equal(kron(np.diag([a, b]), np.diag([c, d])), np.diag([a * c, a * d, b * c, b * d]))


def test_kron_mixed_product(rng):
    A, B, C, D = (rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)) for k in (2, 3, 2, 3))
    assert np.abs(kron(A, B) @ kron(C, D) - kron(A @ C, B @ D)).max() < 1e-12


def test_partial_trace_product(rng):
    rho = random_density(3, rng).mat
    sigma = random_density(2, rng).mat
    assert np.abs(partial_trace(kron(rho, sigma), (3, 2), keep="A") - rho).max() < 1e-14
    assert np.abs(partial_trace(kron(rho, sigma), (3, 2), keep="B") - sigma).max() < 1e-14
    assert np.abs(partial_trace(kron(rho, 2 * sigma), (3, 2)) - 2 * rho).max() < 1e-14


def test_partial_trace_bell():
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.abs(partial_trace(np.outer(phi, phi), (2, 2)) - np.eye(2) / 2).max() < 1e-15


def test_partial_trace_preserves_trace_and_hermiticity(rng):
    M = random_density(6, rng).mat
    red = partial_trace(M, (2, 3), keep="B")
    assert abs(np.trace(red) - 1) < 1e-14
    assert np.abs(red - red.conj().T).max() < 1e-15


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(5), (2, 2))


def test_sqrt_psd_examples():
    assert np.abs(sqrt_psd(np.eye(3)) - np.eye(3)).max() < 1e-15
    assert np.abs(sqrt_psd(np.diag([4.0, 9.0])) - np.diag([2.0, 3.0])).max() < 1e-15


def test_sqrt_psd_reconstruction(rng):
    M = random_psd_hamiltonian(4, rng, norm=2.0)
    R = sqrt_psd(M)
    assert np.abs(R @ R - M).max() < 1e-10
    assert np.linalg.eigvalsh(R).min() >= 0


def test_sqrt_psd_clamps_and_rejects():
    R = sqrt_psd(np.diag([1.0, -5e-11]))
    assert np.abs(R - np.diag([1.0, 0.0])).max() == 0
    with pytest.raises(NotPSD):
        sqrt_psd(np.diag([1.0, -1e-6]))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 5))
def test_sqrt_psd_idempotence(seed, dim):
    X = random_psd_hamiltonian(dim, np.random.default_rng(seed))
    assert np.abs(sqrt_psd(X @ X) - X).max() < 1e-9


def test_matrix_json_round_trip(rng):
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = matrix_to_json(M)
    assert obj["dim"] == 3
    assert np.array_equal(matrix_from_json(obj), M)
    assert np.array_equal(matrix_from_json({"dim": 2, "re": [[1, 0], [0, 1]]}), np.eye(2))


@pytest.mark.parametrize(
    "obj",
    [
        {"dim": 1, "re": [["x"]]},
        {"dim": 2, "re": [[1, 0]]},
        {"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0]]},
        {"dim": 0, "re": []},
        [[1, 0], [0, 1]],
    ],
)
def test_matrix_json_malformed(obj):
    with pytest.raises(ParseError):
        matrix_from_json(obj)
