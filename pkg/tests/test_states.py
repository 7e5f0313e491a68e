import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitqsl.errors import BlochOutOfBall, EmptySchedule, NotHermitian, NotPSD, ParseError, TraceNotOne, ValidationError
from orbitqsl.numerics import SIGMA_X, SIGMA_Z, partial_trace
from orbitqsl.states import (
    DensityMatrix,
    HamiltonianSchedule,
    bloch_vector,
    density_from_bloch,
    pure_state,
    purify,
    random_bloch,
    random_density,
    random_hermitian,
    random_pure,
    random_unitary,
    schedule_from_json,
    spectral_decompose,
    state_from_json,
    state_to_json,
    validate_density,
)


def test_bloch_examples():
    assert np.abs(density_from_bloch([0, 0, 0]).mat - np.eye(2) / 2).max() == 0
    assert np.abs(density_from_bloch([0, 0, 1]).mat - np.diag([1, 0])).max() == 0
    assert np.abs(density_from_bloch([0, 0, 0.5]).mat - np.diag([0.75, 0.25])).max() < 1e-16


def test_bloch_eigenvalues(rng):
    r = random_bloch(rng)
    vals = np.linalg.eigvalsh(density_from_bloch(r).mat)
    norm = np.linalg.norm(r)
    assert np.allclose(vals, [(1 - norm) / 2, (1 + norm) / 2], atol=1e-14)


def test_bloch_out_of_ball():
    density_from_bloch([0, 0, 1 + 1e-13])
    with pytest.raises(BlochOutOfBall):
        density_from_bloch([0.8, 0.8, 0])


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_bloch_round_trip(seed):
    r = random_bloch(np.random.default_rng(seed))
    assert np.abs(bloch_vector(density_from_bloch(r)) - r).max() < 1e-12


def test_validate_density_examples():
    validate_density(np.eye(2) / 2)
    with pytest.raises(NotPSD):
        validate_density(np.diag([1.2, -0.2]))
    with pytest.raises(TraceNotOne):
        validate_density(np.diag([0.6, 0.6]))
    with pytest.raises(NotHermitian):
        validate_density(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_errors_name_the_axiom():
    with pytest.raises(ValidationError) as info:
        validate_density(np.diag([1.2, -0.2]))
    assert info.value.code == "not_psd"


def test_pure_detection(rng):
    assert random_pure(3, rng).is_pure
    assert not DensityMatrix(np.eye(3) / 3).is_pure


def test_degenerate_states_accepted():
    rho = validate_density(np.diag([0.25, 0.25, 0.5]))
    assert rho.dim == 3


def test_purify_examples():
    assert np.abs(purify(density_from_bloch([0, 0, 1])).vec - [1, 0, 0, 0]).max() < 1e-15
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.abs(purify(np.eye(2) / 2).vec - bell).max() < 1e-15


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_purify_partial_trace(dim, rng):
    for _ in range(50):
        rho = random_density(dim, rng, rank=int(rng.integers(1, dim + 1)))
        psi = purify(rho)
        assert abs(np.linalg.norm(psi.vec) - 1) < 1e-10
        reduced = partial_trace(np.outer(psi.vec, psi.vec.conj()), (dim, dim), keep="A")
        assert np.abs(reduced - rho.mat).max() < 1e-9
        assert np.abs(psi.reduced() - rho.mat).max() < 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 4))
def test_purification_overlaps_independent_of_local_unitaries(seed, dim):
    # |<Psi| U (x) I |Psi>| must not depend on V_A, V_B; it always equals |Tr(rho U)|
    rng = np.random.default_rng(seed)
    rho = random_density(dim, rng)
    U = random_unitary(dim, rng)
    VA, VB = random_unitary(dim, rng), random_unitary(dim, rng)
    plain = purify(rho)
    dressed = purify(rho, VA, VB)
    a = abs(plain.overlap(plain.apply_local(U)))
    b = abs(dressed.overlap(dressed.apply_local(U)))
    assert abs(a - b) < 1e-12
    assert abs(a - abs(np.trace(rho.mat @ U))) < 1e-12
    assert np.abs(dressed.reduced() - rho.mat).max() < 1e-9


def test_spectral_decompose_examples(rng):
    assert np.allclose(spectral_decompose(np.eye(2) / 2).values, [0.5, 0.5])
    assert np.allclose(spectral_decompose(density_from_bloch([0, 0, 0.5])).values, [0.25, 0.75])
    vals = spectral_decompose(random_pure(4, rng)).values
    assert np.abs(vals - [0, 0, 0, 1]).max() < 1e-12


def test_spectral_decompose_reconstruction(rng):
    for dim in (2, 3, 5):
        rho = random_density(dim, rng)
        es = spectral_decompose(rho)
        assert abs(es.values.sum() - 1) < 1e-9
        assert np.all((es.values >= 0) & (es.values <= 1))
        assert np.abs(es.reconstruct() - rho.mat).max() < 1e-10


def test_pure_state_normalises():
    rho = pure_state([1, 1j])
    assert np.abs(rho.mat - np.array([[1, -1j], [1j, 1]]) / 2).max() < 1e-15


def test_evolve_keeps_state_valid(rng):
    rho = random_density(3, rng)
    out = rho.evolve(random_unitary(3, rng))
    validate_density(out.mat)


def test_random_hermitian_norm(rng):
    H = random_hermitian(4, rng)
    assert abs(np.linalg.norm(H, 2) - 1) < 1e-12
    assert np.abs(H - H.conj().T).max() == 0


def test_schedule_constant_and_sampled():
    sched = HamiltonianSchedule.sampled([0.0, 1.0], [SIGMA_Z, SIGMA_X])
    assert np.abs(sched.at(0.5) - 0.5 * (SIGMA_Z + SIGMA_X)).max() < 1e-15
    assert np.abs(sched.at(-1) - SIGMA_Z).max() == 0
    assert np.abs(sched.at(3) - SIGMA_X).max() == 0
    U = sched.propagator(0.0, 1.0)
    assert np.abs(U.conj().T @ U - np.eye(2)).max() < 1e-12


def test_schedule_validation():
    with pytest.raises(EmptySchedule):
        HamiltonianSchedule.sampled([], [])
    with pytest.raises(ValidationError):
        HamiltonianSchedule.sampled([1.0, 0.0], [SIGMA_Z, SIGMA_X])
    with pytest.raises(NotHermitian):
        HamiltonianSchedule.constant(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        HamiltonianSchedule.constant(SIGMA_Z, hbar=0)


def test_json_round_trips(rng):
    rho = random_density(3, rng)
    assert np.array_equal(state_from_json(state_to_json(rho)).mat, rho.mat)
    assert np.allclose(state_from_json({"bloch": [0, 0, 0.5]}).mat, np.diag([0.75, 0.25]))
    sched = schedule_from_json({"samples": [{"t": 0, "H": {"dim": 2, "re": [[1, 0], [0, -1]]}}]})
    assert sched.kind == "sampled"
    with pytest.raises(ParseError):
        schedule_from_json({"samples": [{"H": {"dim": 1, "re": [[1]]}}]})
    with pytest.raises(EmptySchedule):
        schedule_from_json({"samples": []})
