import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, random_state, random_unitary, seeds
from nsbox.errors import ArgumentError, CapacityError
from nsbox.linalg import (
    CNOT,
    H,
    TOFFOLI,
    X,
    DensityMatrix,
    StateVector,
    Unitary,
    apply_local,
    apply_unitary,
    bloch_vector,
    index_to_bits,
    partial_trace,
    permute_qubits,
    projector_from_bloch,
    projector_matrix,
    tensor_all,
    tensor_product,
)


def test_basis_state_is_big_endian():
    psi = StateVector.basis([1, 0, 1])
    assert np.argmax(np.abs(psi.amplitudes)) == 0b101
    assert index_to_bits(0b101, 3) == (1, 0, 1)


def test_value_types_are_immutable():
    psi = StateVector.basis([0])
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0
    with pytest.raises(AttributeError):
        psi.amplitudes = np.array([0, 1])


@pytest.mark.parametrize(
    "make",
    [
        lambda: StateVector([1, 1]),
        lambda: StateVector([1, 0, 0]),
        lambda: StateVector([np.nan, 1]),
        lambda: DensityMatrix([[1, 1], [0, 0]]),
        lambda: DensityMatrix([[0.5, 0], [0, 0.4]]),
        lambda: DensityMatrix([[1.5, 0], [0, -0.5]]),
        lambda: Unitary([[1, 1], [0, 1]]),
    ],
)
def test_invalid_values_rejected(make):
    with pytest.raises(ArgumentError):
        make()


def test_gate_matrices():
    assert np.allclose(H.matrix @ H.matrix, np.eye(2))
    assert np.allclose(CNOT.matrix @ StateVector.basis([1, 0]).amplitudes, StateVector.basis([1, 1]).amplitudes)
    for a in (0, 1):
        for b in (0, 1):
            out = TOFFOLI.matrix @ StateVector.basis([a, b, 0]).amplitudes
            assert np.allclose(out, StateVector.basis([a, b, a & b]).amplitudes)


@given(seeds)
def test_tensor_product_mixed_product_property(seed):
    rng = np.random.default_rng(seed)
    a, b = random_unitary(rng, 1), random_unitary(rng, 2)
    c, d = random_unitary(rng, 1), random_unitary(rng, 2)
    lhs = tensor_product(a, b) @ tensor_product(c, d)
    assert np.allclose(lhs, tensor_product(a @ c, b @ d), atol=1e-12)


@given(seeds)
def test_tensor_of_density_matrices_is_density_matrix(seed):
    rng = np.random.default_rng(seed)
    r = tensor_product(DensityMatrix(random_density(rng, 1)), DensityMatrix(random_density(rng, 2)))
    assert isinstance(r, DensityMatrix)
    assert r.num_qubits == 3


def test_tensor_keeps_wrapper_types():
    assert isinstance(tensor_product(StateVector.basis([0]), StateVector.basis([1])), StateVector)
    assert isinstance(tensor_product(X, H), Unitary)
    assert isinstance(tensor_product(X.matrix, H.matrix), np.ndarray)


def test_tensor_capacity(monkeypatch):
    monkeypatch.setenv("NSBOX_MAX_QUBITS", "3")
    with pytest.raises(CapacityError):
        tensor_all(X, X, X, X)
    monkeypatch.setenv("NSBOX_MAX_QUBITS", "4")
    assert tensor_all(X, X, X, X).num_qubits == 4


@given(seeds, st.permutations([0, 1, 2]))
def test_apply_local_matches_full_kron(seed, order):
    rng = np.random.default_rng(seed)
    psi = StateVector(random_state(rng, 3))
    u = Unitary(random_unitary(rng, 1))
    target = order[0]
    full = tensor_all(*[u.matrix if q == target else np.eye(2) for q in range(3)])
    assert np.allclose(apply_unitary(psi, u, [target]).amplitudes, full @ psi.amplitudes, atol=1e-12)


def test_apply_local_two_qubit_target_order():
    # CNOT with control on qubit 2 and target on qubit 0
    out = apply_local(StateVector.basis([0, 0, 1]).amplitudes, CNOT.matrix, [2, 0])
    assert np.allclose(out, StateVector.basis([1, 0, 1]).amplitudes)


def test_apply_local_rejects_bad_targets():
    psi = StateVector.basis([0, 0])
    with pytest.raises(ArgumentError):
        apply_unitary(psi, CNOT, [0, 0])
    with pytest.raises(ArgumentError):
        apply_unitary(psi, X, [2])
    with pytest.raises(ArgumentError):
        apply_unitary(psi, CNOT, [0])


def test_permute_qubits():
    psi = StateVector.basis([1, 0, 0])
    assert np.allclose(permute_qubits(psi, [1, 2, 0]).amplitudes, StateVector.basis([0, 0, 1]).amplitudes)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    bell = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    for q in (0, 1):
        assert np.allclose(partial_trace(bell, [q]).matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_keeps_requested_order():
    psi = StateVector.basis([1, 0, 0])
    kept = partial_trace(psi, [2, 0])
    assert np.allclose(kept.matrix, StateVector.basis([0, 1]).to_density_matrix().matrix)


@given(seeds)
def test_partial_trace_of_product_recovers_factor(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 1), random_density(rng, 2)
    rho = DensityMatrix(np.kron(a, b))
    assert np.allclose(partial_trace(rho, [0]).matrix, a, atol=1e-12)
    assert np.allclose(partial_trace(rho, [1, 2]).matrix, b, atol=1e-12)


@given(seeds)
def test_partial_trace_preserves_trace_and_positivity(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, 3))
    red = partial_trace(rho, [1])
    assert abs(np.trace(red.matrix) - 1) < 1e-12
    assert np.linalg.eigvalsh(red.matrix).min() > -1e-10


def test_partial_trace_requires_a_kept_qubit():
    with pytest.raises(ArgumentError):
        partial_trace(StateVector.basis([0, 1]), [])


def test_projectors_resolve_identity():
    n = bloch_vector(0.7, 2.1)
    p, m = projector_matrix(n, 1), projector_matrix(n, -1)
    assert np.allclose(p + m, np.eye(2))
    assert np.allclose(p @ p, p)
    assert np.allclose(p @ m, 0)
    assert isinstance(projector_from_bloch(n, 1), DensityMatrix)
