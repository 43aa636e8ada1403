"""Dense complex linear algebra for small qubit registers.

Conventions used throughout the package:

* qubit 0 is the most significant bit of a basis index (big-endian), so
  ``|q0 q1 ... q_{n-1}>`` has index ``sum(q_k << (n - 1 - k))``;
* ``tensor_product(a, b)`` puts ``a`` on the high-order qubits;
* all value types are immutable: their arrays are copied on construction and
  marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from nsbox import config
from nsbox.errors import ArgumentError, CapacityError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


def _num_qubits_for(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise ArgumentError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def _check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise ArgumentError(f"{what} contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        _num_qubits_for(amps.size)
        _check_finite(amps, "state vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > config.ALGEBRAIC_TOL:
            raise ArgumentError(f"state vector norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, bits: Sequence[int]) -> "StateVector":
        """Computational basis state ``|b0 b1 ...>``."""
        bits = [int(b) for b in bits]
        if not bits or any(b not in (0, 1) for b in bits):
            raise ArgumentError(f"basis label must be a non-empty bit sequence, got {bits}")
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[_bits_to_index(bits)] = 1.0
        return cls(amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix on ``num_qubits`` qubits."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ArgumentError(f"density matrix must be square, got shape {m.shape}")
        _num_qubits_for(m.shape[0])
        _check_finite(m, "density matrix")
        if np.max(np.abs(m - m.conj().T)) > config.ALGEBRAIC_TOL:
            raise ArgumentError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > config.ALGEBRAIC_TOL:
            raise ArgumentError(f"density matrix trace is {tr!r}, expected 1")
        if np.min(np.linalg.eigvalsh(m)) < -config.PSD_TOL:
            raise ArgumentError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def num_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def is_diagonal(self, tol: float = config.ALGEBRAIC_TOL) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class Unitary:
    """Unitary gate acting on ``num_qubits`` qubits."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ArgumentError(f"gate matrix must be square, got shape {m.shape}")
        _num_qubits_for(m.shape[0])
        _check_finite(m, "gate")
        if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > config.ALGEBRAIC_TOL:
            raise ArgumentError(f"gate {self.name or '?'} is not unitary")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def num_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"Unitary({self.name or '?'}, num_qubits={self.num_qubits})"


def _bits_to_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        index = (index << 1) | int(b)
    return index


def index_to_bits(index: int, num_qubits: int) -> tuple[int, ...]:
    return tuple((index >> (num_qubits - 1 - k)) & 1 for k in range(num_qubits))


def controlled_x(num_controls: int, name: str = "") -> Unitary:
    """X on the last qubit, conditioned on all of the first ``num_controls`` being 1."""
    dim = 2 ** (num_controls + 1)
    m = np.eye(dim, dtype=complex)
    m[[dim - 2, dim - 1]] = m[[dim - 1, dim - 2]]
    return Unitary(m, name or ("C" * num_controls + "X"))


_SQRT1_2 = 1 / np.sqrt(2)

I2 = Unitary(np.eye(2), "I")
X = Unitary([[0, 1], [1, 0]], "X")
Y = Unitary([[0, -1j], [1j, 0]], "Y")
Z = Unitary([[1, 0], [0, -1]], "Z")
H = Unitary(np.array([[1, 1], [1, -1]]) * _SQRT1_2, "H")
CNOT = controlled_x(1, "CNOT")
TOFFOLI = controlled_x(2, "TOFFOLI")

PAULI = (X.matrix, Y.matrix, Z.matrix)

Operand = Union[np.ndarray, StateVector, DensityMatrix, Unitary]


def tensor_product(a: Operand, b: Operand) -> Operand:
    """Kronecker product with ``a`` on the high-order qubits.

    Plain arrays give a plain array; two operands of the same wrapper type give
    that type back (a product of states is a state, of gates a gate).
    """
    raw_a, raw_b = _raw(a), _raw(b)
    if raw_a.ndim != raw_b.ndim or raw_a.ndim not in (1, 2):
        raise ArgumentError("tensor_product needs two vectors or two matrices")
    for dim in (*raw_a.shape, *raw_b.shape):
        _num_qubits_for(dim)
    out_dim = raw_a.shape[0] * raw_b.shape[0]
    if out_dim > config.max_dim():
        raise CapacityError(
            f"tensor product dimension {out_dim} exceeds the cap of {config.max_dim()} "
            "(set NSBOX_MAX_QUBITS to raise it)"
        )
    out = np.kron(raw_a, raw_b)
    if type(a) is type(b) and isinstance(a, (StateVector, DensityMatrix)):
        return type(a)(out)
    if isinstance(a, Unitary) and isinstance(b, Unitary):
        return Unitary(out, f"{a.name}⊗{b.name}")
    return out


def tensor_all(*operands: Operand) -> Operand:
    out = operands[0]
    for op in operands[1:]:
        out = tensor_product(out, op)
    return out


def _raw(x: Operand) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amplitudes
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, Unitary):
        return x.matrix
    return np.asarray(x)


def _check_targets(targets: Sequence[int], num_qubits: int, gate_qubits: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ArgumentError(f"repeated target qubit in {targets}")
    if any(t < 0 or t >= num_qubits for t in targets):
        raise ArgumentError(f"target out of range for {num_qubits} qubits: {targets}")
    if len(targets) != gate_qubits:
        raise ArgumentError(f"gate acts on {gate_qubits} qubits but {len(targets)} targets were given")
    return targets


def apply_local(vector: np.ndarray, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix to ``targets`` of a length-``2^n`` vector.

    Works for amplitudes and for probability vectors alike; the operator need
    not be unitary.  Identity acts on the remaining qubits.
    """
    vector = np.asarray(vector)
    n = _num_qubits_for(vector.size)
    k = _num_qubits_for(op.shape[0])
    targets = _check_targets(targets, n, k)
    psi = vector.reshape((2,) * n)
    gate = np.asarray(op).reshape((2,) * (2 * k))
    out = np.tensordot(gate, psi, axes=(list(range(k, 2 * k)), targets))
    # tensordot leaves the gate's output axes in front
    out = np.moveaxis(out, list(range(k)), targets)
    return out.reshape(-1)


def apply_unitary(state: StateVector, gate: Unitary, targets: Sequence[int]) -> StateVector:
    if not isinstance(gate, Unitary):
        raise ArgumentError("apply_unitary needs a Unitary gate")
    return StateVector(apply_local(state.amplitudes, gate.matrix, targets))


def permute_qubits(state: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qubits so that new qubit ``k`` is old qubit ``order[k]``."""
    n = state.num_qubits
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ArgumentError(f"{order} is not a permutation of range({n})")
    psi = state.amplitudes.reshape((2,) * n).transpose(order)
    return StateVector(psi.reshape(-1))


def partial_trace(rho: DensityMatrix | StateVector, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep``; the result lists qubits in the order given."""
    if isinstance(rho, StateVector):
        rho = rho.to_density_matrix()
    n = rho.num_qubits
    keep = [int(k) for k in keep]
    if not keep:
        raise ArgumentError("partial_trace needs at least one qubit to keep")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise ArgumentError(f"invalid qubit indices {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = rho.matrix.reshape((2,) * (2 * n))
    # einsum labels: row axes 0..n-1, column axes n..2n-1; traced ones share a label
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise CapacityError(f"partial_trace supports at most {len(letters) // 2} qubits")
    rows = [letters[q] for q in range(n)]
    cols = [letters[n + q] for q in range(n)]
    for q in traced:
        cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    d = 2 ** len(keep)
    return DensityMatrix(reduced.reshape(d, d))


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def projector_matrix(direction: Sequence[float], outcome: int) -> np.ndarray:
    """``(I + outcome * n.sigma) / 2`` as a plain 2x2 array."""
    if outcome not in (1, -1):
        raise ArgumentError(f"outcome must be +1 or -1, got {outcome}")
    n1, n2, n3 = (float(c) for c in direction)
    return 0.5 * (np.eye(2) + outcome * (n1 * PAULI[0] + n2 * PAULI[1] + n3 * PAULI[2]))


def projector_from_bloch(direction, outcome: int) -> DensityMatrix:
    """Rank-1 projector onto the ``outcome`` eigenstate of ``direction . sigma``.

    ``direction`` is anything with ``unit_vector()`` (a ``BlochDirection``) or
    a 3-vector.
    """
    vec = direction.unit_vector() if hasattr(direction, "unit_vector") else np.asarray(direction, float)
    return DensityMatrix(projector_matrix(vec, outcome))
