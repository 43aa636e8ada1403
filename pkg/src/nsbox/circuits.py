"""Quantum and classical oracles that turn input bits into correlated primed registers.

Register layouts (qubit 0 is the most significant bit):

* bipartite: ``(A, B, B', A')``, the wire order of the four-qubit oracle;
* tripartite: ``(A, B, C, A', B', C')``;
* n-party: only the primed register ``(A'_1, ..., A'_n)`` is simulated, with the
  input bits acting as classical controls (see ``run_nparty_xyz_oracle``).

Every oracle returns its primed register with Alice first, i.e. ``(A', B')``
for two parties.  The bipartite wire order stores ``B'`` before ``A'``; the
reordering happens here so that callers never see the ``B'A'`` convention.

The parties may only choose computational-basis inputs for their unprimed
registers; primed registers always start in ``|0>``.  That restriction is what
keeps the oracles non-signaling, so the public runners accept bits only.
``run_with_free_inputs`` is the deliberate exception used to show how a CNOT
signals when the control is freely prepared.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from nsbox import config
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
    controlled_x,
    permute_qubits,
)


class OracleFamily(enum.Enum):
    BIPARTITE_QUANTUM = "bipartite-quantum"
    BIPARTITE_CLASSICAL = "bipartite-classical"
    TRIPARTITE_QUANTUM = "tripartite-quantum"
    TRIPARTITE_CLASSICAL = "tripartite-classical"
    NPARTY_XYZ_QUANTUM = "nparty-xyz-quantum"
    NPARTY_XYZ_CLASSICAL = "nparty-xyz-classical"

    @property
    def quantum(self) -> bool:
        return self.value.endswith("-quantum")


class TargetFunction(enum.Enum):
    """Boolean function of the inputs that fixes the parity of the outputs."""

    XYZ = "xyz"
    X_Y_PLUS_Z = "x(y+z)"
    SVETLICHNY = "svetlichny"

    def monomials(self, n: int = 3) -> tuple[tuple[int, ...], ...]:
        """Party indices of each AND-term; the function is their XOR."""
        if self is TargetFunction.XYZ:
            return (tuple(range(n)),)
        if n != 3:
            raise ArgumentError(f"{self.value} is defined for three parties only")
        if self is TargetFunction.X_Y_PLUS_Z:
            return ((0, 1), (0, 2))
        return ((0, 1), (1, 2), (2, 0))

    def evaluate(self, bits: Sequence[int]) -> int:
        value = 0
        for mono in self.monomials(len(bits)):
            value ^= int(all(bits[i] for i in mono))
        return value

    @classmethod
    def parse(cls, name: str) -> "TargetFunction":
        key = name.strip().lower().replace(" ", "")
        aliases = {"xyz": cls.XYZ, "x(y+z)": cls.X_Y_PLUS_Z, "xy+xz": cls.X_Y_PLUS_Z, "svetlichny": cls.SVETLICHNY}
        if key not in aliases:
            raise ArgumentError(f"unknown target function {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class OracleSpec:
    family: OracleFamily
    target: TargetFunction | None = None
    n: int = 2

    def __post_init__(self):
        tripartite = self.family in (OracleFamily.TRIPARTITE_QUANTUM, OracleFamily.TRIPARTITE_CLASSICAL)
        if (self.target is not None) != tripartite:
            raise ArgumentError("a target function is required for, and only for, tripartite oracles")
        if self.n < 2:
            raise ArgumentError(f"an oracle needs at least two parties, got n={self.n}")
        if self.family in (OracleFamily.BIPARTITE_QUANTUM, OracleFamily.BIPARTITE_CLASSICAL) and self.n != 2:
            raise ArgumentError("bipartite oracles have n=2")
        if tripartite and self.n != 3:
            raise ArgumentError("tripartite oracles have n=3")

    @property
    def quantum(self) -> bool:
        return self.family.quantum

    @property
    def parties(self) -> int:
        return self.n

    @classmethod
    def bipartite(cls, quantum: bool = True) -> "OracleSpec":
        return cls(OracleFamily.BIPARTITE_QUANTUM if quantum else OracleFamily.BIPARTITE_CLASSICAL)

    @classmethod
    def tripartite(cls, target: TargetFunction | str, quantum: bool = True) -> "OracleSpec":
        if isinstance(target, str):
            target = TargetFunction.parse(target)
        family = OracleFamily.TRIPARTITE_QUANTUM if quantum else OracleFamily.TRIPARTITE_CLASSICAL
        return cls(family, target, 3)

    @classmethod
    def nparty(cls, n: int, quantum: bool = True) -> "OracleSpec":
        family = OracleFamily.NPARTY_XYZ_QUANTUM if quantum else OracleFamily.NPARTY_XYZ_CLASSICAL
        return cls(family, None, n)

    def target_value(self, inputs: Sequence[int]) -> int:
        """Required parity of the outputs for these inputs."""
        if self.target is not None:
            return self.target.evaluate(inputs)
        return TargetFunction.XYZ.evaluate(inputs)


@dataclass(frozen=True, eq=False)
class ClassicalState:
    """Probability distribution over bit strings (big-endian, like ``StateVector``)."""

    distribution: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.distribution, dtype=float).reshape(-1)
        if p.size < 2 or p.size & (p.size - 1):
            raise ArgumentError(f"distribution length {p.size} is not a power of two")
        if np.any(p < -config.ALGEBRAIC_TOL) or abs(p.sum() - 1.0) > config.ALGEBRAIC_TOL:
            raise ArgumentError("distribution must be nonnegative and sum to 1")
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        object.__setattr__(self, "distribution", p)

    @property
    def num_bits(self) -> int:
        return self.distribution.size.bit_length() - 1

    @classmethod
    def point(cls, bits: Sequence[int]) -> "ClassicalState":
        p = np.zeros(2 ** len(bits))
        p[int("".join(str(int(b)) for b in bits), 2)] = 1.0
        return cls(p)

    def probability(self, bits: Sequence[int]) -> float:
        return float(self.distribution.reshape((2,) * self.num_bits)[tuple(bits)])

    def to_density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.distribution.astype(complex)))

    def __repr__(self) -> str:
        return f"ClassicalState(num_bits={self.num_bits})"


# Classical gates are column-stochastic matrices acting on distributions.
RANDOMIZER = np.full((2, 2), 0.5)
CLASSICAL_CNOT = CNOT.matrix.real.copy()
CLASSICAL_TOFFOLI = TOFFOLI.matrix.real.copy()


def _check_stochastic(m: np.ndarray) -> None:
    if np.any(m < 0) or np.max(np.abs(m.sum(axis=0) - 1.0)) > config.ALGEBRAIC_TOL:
        raise ArgumentError("classical gate must be column-stochastic")


def apply_stochastic(state: ClassicalState, gate: np.ndarray, targets: Sequence[int]) -> ClassicalState:
    gate = np.asarray(gate, dtype=float)
    _check_stochastic(gate)
    return ClassicalState(apply_local(state.distribution, gate, targets))


def _check_bits(bits: Sequence[int]) -> tuple[int, ...]:
    out = []
    for b in bits:
        if isinstance(b, (bool, np.bool_)) or int(b) != b or int(b) not in (0, 1):
            raise ArgumentError(f"oracle inputs must be bits 0/1, got {b!r}")
        out.append(int(b))
    return tuple(out)


Gate = Union[Unitary, np.ndarray]


def _run_quantum(init_bits: Sequence[int], ops: Sequence[tuple[Gate, Sequence[int]]]) -> StateVector:
    state = StateVector.basis(init_bits)
    for gate, targets in ops:
        state = apply_unitary(state, gate, targets)
    return state


def _run_classical(init_bits: Sequence[int], ops: Sequence[tuple[np.ndarray, Sequence[int]]]) -> ClassicalState:
    state = ClassicalState.point(init_bits)
    for gate, targets in ops:
        state = apply_stochastic(state, gate, targets)
    return state


def _split_unprimed(amplitudes: np.ndarray, inputs: Sequence[int], num_primed: int, what: str) -> np.ndarray:
    """Return the primed block after checking the unprimed register is still ``|inputs>``."""
    k = len(inputs)
    block = np.asarray(amplitudes).reshape((2,) * k + (2**num_primed,))[tuple(inputs)]
    weight = np.sum(np.abs(block) ** 2) if np.iscomplexobj(block) else np.sum(block)
    if abs(weight - 1.0) > config.ALGEBRAIC_TOL:
        raise RuntimeError(f"{what} altered the unprimed inputs (overlap {weight!r})")
    return block


# --- bipartite -------------------------------------------------------------

# wire order (A, B, B', A')
_A, _B, _BP, _AP = 0, 1, 2, 3


@functools.lru_cache(maxsize=None)
def bipartite_quantum_circuit(x: int, y: int) -> StateVector:
    """Full four-qubit state ``|x>_A |y>_B |phi^{xy}>_{B'A'}`` after the oracle."""
    x, y = _check_bits((x, y))
    return _run_quantum((x, y, 0, 0), [(H, [_BP]), (CNOT, [_BP, _AP]), (TOFFOLI, [_A, _B, _BP])])


@functools.lru_cache(maxsize=None)
def run_bipartite_quantum_oracle(x: int, y: int) -> StateVector:
    """Primed pair after the quantum oracle, Alice's qubit first."""
    x, y = _check_bits((x, y))
    full = bipartite_quantum_circuit(x, y)
    primed_bpap = _split_unprimed(full.amplitudes, (x, y), 2, "quantum oracle")
    return permute_qubits(StateVector(primed_bpap), [1, 0])


@functools.lru_cache(maxsize=None)
def bipartite_classical_circuit(x: int, y: int) -> ClassicalState:
    x, y = _check_bits((x, y))
    return _run_classical(
        (x, y, 0, 0),
        [(RANDOMIZER, [_BP]), (CLASSICAL_CNOT, [_BP, _AP]), (CLASSICAL_TOFFOLI, [_A, _B, _BP])],
    )


@functools.lru_cache(maxsize=None)
def run_bipartite_classical_oracle(x: int, y: int) -> ClassicalState:
    """Primed bits after the classical oracle as a distribution over ``(A', B')``."""
    x, y = _check_bits((x, y))
    full = bipartite_classical_circuit(x, y)
    primed_bpap = _split_unprimed(full.distribution, (x, y), 2, "classical oracle")
    return ClassicalState(primed_bpap.reshape(2, 2).T.reshape(-1))


def run_with_free_inputs(control: int | StateVector, target: int = 0) -> StateVector:
    """Unrestricted CNOT with Alice's qubit as control and Bob's as target.

    Unsafe by design: letting Alice choose ``|0>`` or ``|1>`` turns the gate into
    a one-bit channel to Bob.  Returns the two-qubit state (Alice, Bob).
    """
    if isinstance(control, StateVector):
        if control.num_qubits != 1:
            raise ArgumentError("control must be a single qubit")
        alice = control
    else:
        alice = StateVector.basis(_check_bits((control,)))
    bob = StateVector.basis(_check_bits((target,)))
    return apply_unitary(StateVector(np.kron(alice.amplitudes, bob.amplitudes)), CNOT, [0, 1])


PLUS = StateVector(np.array([1, 1]) / np.sqrt(2))
PHI_PLUS = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2))
# the photon-pair source emits |Psi+>, which is also the oracle output for inputs (1, 1)
PSI_PLUS = StateVector(np.array([0, 1, 1, 0]) / np.sqrt(2))


# --- tripartite ------------------------------------------------------------

def _tripartite_ops(target: TargetFunction, quantum: bool) -> list[tuple[Gate, list[int]]]:
    # wire order (A, B, C, A', B', C')
    primed = (3, 4, 5)
    if quantum:
        ops: list = [(H, [3]), (H, [4]), (CNOT, [3, 5]), (CNOT, [4, 5])]
    else:
        ops = [(RANDOMIZER, [3]), (RANDOMIZER, [4]), (CLASSICAL_CNOT, [3, 5]), (CLASSICAL_CNOT, [4, 5])]
    for mono in target.monomials(3):
        gate = controlled_x(len(mono))
        ops.append((gate if quantum else gate.matrix.real.copy(), [*mono, primed[2]]))
    return ops


def _check_target(f: TargetFunction | str) -> TargetFunction:
    return TargetFunction.parse(f) if isinstance(f, str) else f


@functools.lru_cache(maxsize=None)
def tripartite_quantum_circuit(f: TargetFunction, x: int, y: int, z: int) -> StateVector:
    bits = _check_bits((x, y, z))
    return _run_quantum((*bits, 0, 0, 0), _tripartite_ops(_check_target(f), True))


def run_tripartite_quantum_oracle(f: TargetFunction | str, x: int, y: int, z: int) -> StateVector:
    """Primed register ``(A', B', C')``: equal superposition of strings with parity f(x,y,z)."""
    f = _check_target(f)
    bits = _check_bits((x, y, z))
    full = tripartite_quantum_circuit(f, *bits)
    return StateVector(_split_unprimed(full.amplitudes, bits, 3, "tripartite oracle"))


def run_tripartite_classical_oracle(f: TargetFunction | str, x: int, y: int, z: int) -> ClassicalState:
    f = _check_target(f)
    bits = _check_bits((x, y, z))
    full = _run_classical((*bits, 0, 0, 0), _tripartite_ops(f, False))
    return ClassicalState(_split_unprimed(full.distribution, bits, 3, "tripartite classical oracle"))


# --- n parties -------------------------------------------------------------

def run_nparty_xyz_oracle(quantum: bool, inputs: Sequence[int]) -> StateVector | ClassicalState:
    """Uniform superposition (or mixture) over n-bit strings whose parity is the product of the inputs.

    Only the n primed qubits are simulated.  The unprimed registers hold
    computational basis states that act purely as controls, so the
    multi-controlled X on the last primed qubit reduces to a plain X applied
    when every input is 1.  The bipartite and tripartite oracles run their full
    registers and confirm that the inputs are never disturbed.
    """
    bits = _check_bits(inputs)
    n = len(bits)
    if n < 2:
        raise ArgumentError(f"need at least two parties, got {n}")
    if n > config.max_qubits():
        raise CapacityError(f"{n} parties exceed the cap of {config.max_qubits()} (NSBOX_MAX_QUBITS)")
    last = n - 1
    flip = all(bits)
    if quantum:
        ops: list = [(H, [k]) for k in range(last)] + [(CNOT, [k, last]) for k in range(last)]
        if flip:
            ops.append((X, [last]))
        return _run_quantum((0,) * n, ops)
    ops = [(RANDOMIZER, [k]) for k in range(last)] + [(CLASSICAL_CNOT, [k, last]) for k in range(last)]
    if flip:
        ops.append((X.matrix.real.copy(), [last]))
    return _run_classical((0,) * n, ops)


# --- dispatch --------------------------------------------------------------

def run_oracle(spec: OracleSpec, inputs: Sequence[int]) -> StateVector | ClassicalState:
    """Primed register of ``spec`` for one input tuple (one bit per party)."""
    inputs = _check_bits(inputs)
    if len(inputs) != spec.n:
        raise ArgumentError(f"{spec.family.value} oracle takes {spec.n} inputs, got {len(inputs)}")
    fam = spec.family
    if fam is OracleFamily.BIPARTITE_QUANTUM:
        return run_bipartite_quantum_oracle(*inputs)
    if fam is OracleFamily.BIPARTITE_CLASSICAL:
        return run_bipartite_classical_oracle(*inputs)
    if fam is OracleFamily.TRIPARTITE_QUANTUM:
        return run_tripartite_quantum_oracle(spec.target, *inputs)
    if fam is OracleFamily.TRIPARTITE_CLASSICAL:
        return run_tripartite_classical_oracle(spec.target, *inputs)
    return run_nparty_xyz_oracle(fam is OracleFamily.NPARTY_XYZ_QUANTUM, inputs)
