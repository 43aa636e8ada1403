"""Projective qubit measurements, outcome probabilities and closed-form CHSH values.

Outcomes are reported as +1/-1.  A party measuring along ``n`` with outcome
sign ``s`` reports ``a`` when the projector ``(I + s*a*n.sigma)/2`` fires, so
``s = -1`` swaps the labels without moving the direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from nsbox import config
from nsbox.circuits import ClassicalState
from nsbox.errors import ArgumentError
from nsbox.linalg import DensityMatrix, StateVector, bloch_vector, projector_matrix, tensor_all

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class BlochDirection:
    """Measurement axis given by polar angle ``theta`` and azimuth ``phi``.

    Angles are canonicalised on construction to ``theta`` in [0, pi] and
    ``phi`` in [0, 2pi); a polar angle outside [0, pi] is reflected back with
    ``phi`` shifted by pi, which leaves the axis unchanged.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ArgumentError("Bloch angles must be finite")
        t = math.fmod(theta, TWO_PI)
        if t < 0:
            t += TWO_PI
        if t > math.pi:
            t = TWO_PI - t
            phi += math.pi
        phi = math.fmod(phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "phi", phi)

    def unit_vector(self) -> np.ndarray:
        return bloch_vector(self.theta, self.phi)

    def eigenstates(self) -> tuple[np.ndarray, np.ndarray]:
        """Kets for outcomes +1 and -1 of ``n.sigma``."""
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([c, phase * s]), np.array([s, -phase * c])

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "BlochDirection":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ArgumentError("zero vector has no direction")
        v = v / norm
        return cls(math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0]))


Z_AXIS = BlochDirection(0.0, 0.0)
X_AXIS = BlochDirection(math.pi / 2, 0.0)
Y_AXIS = BlochDirection(math.pi / 2, math.pi / 2)


@dataclass(frozen=True)
class PartySettings:
    """Direction (and outcome labelling) a party uses for each of its inputs."""

    directions: Mapping[int, BlochDirection]
    outcome_sign: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        dirs = dict(self.directions)
        if not dirs:
            raise ArgumentError("a party needs at least one measurement direction")
        signs = {x: int(self.outcome_sign.get(x, 1)) for x in dirs}
        if set(self.outcome_sign) - set(dirs):
            raise ArgumentError("outcome signs given for inputs without a direction")
        if any(s not in (1, -1) for s in signs.values()):
            raise ArgumentError("outcome signs must be +1 or -1")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "outcome_sign", signs)

    @classmethod
    def from_angles(cls, angles: Sequence[tuple[float, float]], signs: Sequence[int] | None = None) -> "PartySettings":
        dirs = {x: BlochDirection(t, p) for x, (t, p) in enumerate(angles)}
        return cls(dirs, {} if signs is None else dict(enumerate(signs)))

    @classmethod
    def same(cls, direction: BlochDirection, num_inputs: int = 2, sign: int = 1) -> "PartySettings":
        return cls({x: direction for x in range(num_inputs)}, {x: sign for x in range(num_inputs)})

    @property
    def num_inputs(self) -> int:
        return len(self.directions)

    def direction(self, x: int) -> BlochDirection:
        try:
            return self.directions[x]
        except KeyError:
            raise ArgumentError(f"no measurement direction for input {x}") from None

    def effective_vector(self, x: int) -> np.ndarray:
        """Bloch vector whose +1 projector fires on reported outcome +1."""
        return self.outcome_sign[x] * self.direction(x).unit_vector()

    def basis_rows(self, x: int) -> np.ndarray:
        """2x2 unitary whose row k is the bra of reported outcome index k (0 is +1)."""
        plus, minus = self.direction(x).eigenstates()
        if self.outcome_sign[x] == -1:
            plus, minus = minus, plus
        return np.array([plus.conj(), minus.conj()])


State = StateVector | DensityMatrix | ClassicalState


def as_quantum_state(state: State) -> StateVector | DensityMatrix:
    if isinstance(state, ClassicalState):
        return state.to_density_matrix()
    if isinstance(state, (StateVector, DensityMatrix)):
        return state
    raise ArgumentError(f"unsupported state type {type(state).__name__}")


def _clamp(p: float) -> float:
    if p < -config.ALGEBRAIC_TOL or p > 1 + config.ALGEBRAIC_TOL:
        raise RuntimeError(f"probability {p!r} outside [0, 1]: internal inconsistency")
    return min(1.0, max(0.0, p))


def joint_probability(
    state: State,
    settings: Sequence[PartySettings],
    inputs: Sequence[int],
    outcomes: Sequence[int],
) -> float:
    """``Tr[rho (Pi_1 x Pi_2 x ...)]`` with one projector per qubit."""
    st = as_quantum_state(state)
    n = st.num_qubits
    if not (len(settings) == len(inputs) == len(outcomes) == n):
        raise ArgumentError(
            f"{n}-qubit state needs {n} settings, inputs and outcomes; got "
            f"{len(settings)}, {len(inputs)}, {len(outcomes)}"
        )
    projectors = []
    for s, x, a in zip(settings, inputs, outcomes):
        if a not in (1, -1):
            raise ArgumentError(f"outcomes must be +1 or -1, got {a}")
        projectors.append(projector_matrix(s.direction(x).unit_vector(), s.outcome_sign[x] * a))
    op = tensor_all(*projectors) if n > 1 else projectors[0]
    if isinstance(st, StateVector):
        p = np.vdot(st.amplitudes, op @ st.amplitudes).real
    else:
        p = np.trace(op @ st.matrix).real
    return _clamp(float(p))


def outcome_distribution(state: State, settings: Sequence[PartySettings], inputs: Sequence[int]) -> np.ndarray:
    """All outcome probabilities at once, indexed by outcome index (0 = +1, 1 = -1).

    Rotates each qubit into its measurement basis and reads the diagonal, an
    independent route from the trace formula in ``joint_probability``.
    """
    st = as_quantum_state(state)
    n = st.num_qubits
    if not (len(settings) == len(inputs) == n):
        raise ArgumentError(f"{n}-qubit state needs {n} settings and inputs")
    rows = [s.basis_rows(x) for s, x in zip(settings, inputs)]
    if isinstance(st, StateVector):
        psi = st.amplitudes.reshape((2,) * n)
        for k, u in enumerate(rows):
            psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [k])), 0, k)
        probs = np.abs(psi) ** 2
    else:
        rho = st.matrix.reshape((2,) * (2 * n))
        for k, u in enumerate(rows):
            rho = np.moveaxis(np.tensordot(u, rho, axes=([1], [k])), 0, k)
            rho = np.moveaxis(np.tensordot(u.conj(), rho, axes=([1], [n + k])), 0, n + k)
        d = 2**n
        probs = np.diagonal(rho.reshape(d, d)).real.reshape((2,) * n)
    if probs.min() < -config.ALGEBRAIC_TOL:
        raise RuntimeError("negative outcome probability: internal inconsistency")
    return np.clip(probs, 0.0, 1.0)


def _vec(direction) -> np.ndarray:
    if isinstance(direction, BlochDirection):
        return direction.unit_vector()
    return np.asarray(direction, dtype=float)


def _check_pm(*values: int) -> None:
    if any(v not in (1, -1) for v in values):
        raise ArgumentError(f"outcomes must be +1 or -1, got {values}")


def closed_form_prob_quantum(x: int, y: int, a: int, b: int, a_dir, b_dir) -> float:
    """p(a,b|x,y) for the entangled oracle output, from the Bloch components."""
    _check_pm(a, b)
    s = (-1) ** (x * y)
    va, vb = _vec(a_dir), _vec(b_dir)
    corr = va[0] * vb[0] - s * va[1] * vb[1] + s * va[2] * vb[2]
    return _clamp(0.25 * (1 + a * b * corr))


def closed_form_prob_classical(x: int, y: int, a: int, b: int, a_dir, b_dir) -> float:
    """p(a,b|x,y) for the classically correlated oracle output; only z-components matter."""
    _check_pm(a, b)
    s = (-1) ** (x * y)
    va, vb = _vec(a_dir), _vec(b_dir)
    return _clamp(0.25 * (1 + s * a * b * va[2] * vb[2]))


def _two_inputs(*parties: PartySettings) -> None:
    for p in parties:
        if sorted(p.directions) != [0, 1]:
            raise ArgumentError("CHSH needs settings for inputs 0 and 1 on both sides")


def chsh_closed_form_quantum(alice: PartySettings, bob: PartySettings) -> float:
    """Signed CHSH value of the entangled oracle for arbitrary directions.

    Written out component by component; outcome signs are folded into the
    directions.
    """
    _two_inputs(alice, bob)
    a0, a1 = alice.effective_vector(0), alice.effective_vector(1)
    b0, b1 = bob.effective_vector(0), bob.effective_vector(1)
    return float(
        a0[0] * (b0[0] + b1[0])
        - a0[1] * (b0[1] + b1[1])
        + a0[2] * (b0[2] + b1[2])
        + a1[0] * (b0[0] - b1[0])
        - a1[1] * (b0[1] + b1[1])
        + a1[2] * (b0[2] + b1[2])
    )


def chsh_lambda_curve(lam: float) -> float:
    """CHSH value of the entangled oracle when all four axes sit at polar angle ``lam`` in the x-z plane."""
    return 2 + 2 * math.cos(lam) ** 2


def chsh_closed_form_classical(theta_a0: float, theta_a1: float, theta_b0: float, theta_b1: float) -> float:
    """Signed CHSH value of the classical oracle; azimuths do not enter."""
    return (math.cos(theta_a0) + math.cos(theta_a1)) * (math.cos(theta_b0) + math.cos(theta_b1))


def chsh_closed_form_classical_settings(alice: PartySettings, bob: PartySettings) -> float:
    """As ``chsh_closed_form_classical`` but reading polar angles (and outcome signs) from settings."""
    _two_inputs(alice, bob)
    za = alice.effective_vector(0)[2] + alice.effective_vector(1)[2]
    zb = bob.effective_vector(0)[2] + bob.effective_vector(1)[2]
    return float(za * zb)


def random_direction(rng: np.random.Generator) -> BlochDirection:
    """Direction drawn uniformly from the sphere."""
    return BlochDirection(math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, TWO_PI))


def random_settings(rng: np.random.Generator, parties: int = 2, num_inputs: int = 2) -> list[PartySettings]:
    return [
        PartySettings({x: random_direction(rng) for x in range(num_inputs)}) for _ in range(parties)
    ]
