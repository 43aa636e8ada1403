"""Conditional probability tables and their analysis.

A ``Behavior`` stores ``p(outputs | inputs)`` as a dense array indexed
``table[x_1, ..., x_n, a_1, ..., a_n]``.  Outputs are indices 0/1; wherever
the +/-1 algebra is needed index 0 stands for +1 and index 1 for -1.  This is
the only place that mapping is applied.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from nsbox import config
from nsbox.circuits import ClassicalState, OracleSpec, TargetFunction, run_oracle, run_with_free_inputs
from nsbox.errors import ArgumentError, PreconditionError
from nsbox.linalg import DensityMatrix, StateVector
from nsbox.measurement import Z_AXIS, PartySettings, outcome_distribution

TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True, eq=False)
class Behavior:
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim < 4 or t.ndim % 2:
            raise ArgumentError(f"table must have 2n axes with n >= 2, got {t.ndim}")
        if not np.all(np.isfinite(t)):
            raise ArgumentError("behavior table contains NaN or Inf")
        if t.min() < -config.ALGEBRAIC_TOL:
            raise ArgumentError(f"negative probability {t.min()!r} in behavior table")
        t = np.clip(t, 0.0, None)
        n = t.ndim // 2
        sums = t.sum(axis=tuple(range(n, 2 * n)))
        if np.max(np.abs(sums - 1.0)) > config.PHYSICS_TOL:
            raise ArgumentError("outcome probabilities do not sum to 1 for every input tuple")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def parties(self) -> int:
        return self.table.ndim // 2

    @property
    def inputs_per_party(self) -> tuple[int, ...]:
        return self.table.shape[: self.parties]

    @property
    def outputs_per_party(self) -> tuple[int, ...]:
        return self.table.shape[self.parties :]

    def prob(self, outputs: Sequence[int], inputs: Sequence[int]) -> float:
        return float(self.table[tuple(inputs) + tuple(outputs)])

    def input_tuples(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.inputs_per_party))

    def is_222(self) -> bool:
        return self.table.shape == (2, 2, 2, 2)

    # --- serialization ---

    def to_dict(self) -> dict:
        return {
            "parties": self.parties,
            "inputs": list(self.inputs_per_party),
            "outputs": list(self.outputs_per_party),
            "table": self.table.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Behavior":
        table = np.asarray(data["table"], dtype=float)
        expected = tuple(data["inputs"]) + tuple(data["outputs"])
        if data["parties"] != len(data["inputs"]) or table.shape != expected:
            raise ArgumentError(f"table shape {table.shape} disagrees with header {expected}")
        return cls(table)

    @classmethod
    def from_json(cls, text: str) -> "Behavior":
        return cls.from_dict(json.loads(text))


# --- constructors ----------------------------------------------------------

def behavior_from_function(
    fn: Callable[[tuple[int, ...], tuple[int, ...]], float],
    inputs: Sequence[int],
    outputs: Sequence[int],
) -> Behavior:
    """Tabulate ``fn(outputs, inputs)`` over all tuples."""
    t = np.zeros(tuple(inputs) + tuple(outputs))
    for xs in itertools.product(*(range(k) for k in inputs)):
        for os_ in itertools.product(*(range(k) for k in outputs)):
            t[xs + os_] = fn(os_, xs)
    return Behavior(t)


def pr_box() -> Behavior:
    """1/2 when ``a XOR b == x AND y`` (equivalently ``ab = (-1)^{xy}``), else 0."""
    return behavior_from_function(lambda o, i: 0.5 if (o[0] ^ o[1]) == (i[0] & i[1]) else 0.0, (2, 2), (2, 2))


def uniform_behavior(parties: int = 2) -> Behavior:
    return Behavior(np.full((2,) * (2 * parties), 0.5**parties))


def deterministic_behavior(strategy: Callable[[tuple[int, ...]], tuple[int, ...]], parties: int = 2) -> Behavior:
    """Behavior with outputs fixed by ``strategy(inputs)``."""
    return behavior_from_function(
        lambda o, i: 1.0 if tuple(strategy(i)) == tuple(o) else 0.0, (2,) * parties, (2,) * parties
    )


def behavior_from_states(
    states: Callable[[tuple[int, ...]], StateVector | DensityMatrix | ClassicalState],
    settings: Sequence[PartySettings],
    inputs_per_party: Sequence[int] | None = None,
) -> Behavior:
    """Measure ``states(inputs)`` with ``settings`` for every input tuple."""
    if inputs_per_party is None:
        inputs_per_party = [s.num_inputs for s in settings]
    n = len(settings)
    table = np.zeros(tuple(inputs_per_party) + (2,) * n)
    for xs in itertools.product(*(range(k) for k in inputs_per_party)):
        table[xs] = outcome_distribution(states(xs), settings, xs)
    return Behavior(table)


def behavior_from_state(state, settings: Sequence[PartySettings]) -> Behavior:
    """Behavior of one fixed shared state (the usual Bell scenario)."""
    return behavior_from_states(lambda _xs: state, settings)


def behavior_from_oracle(spec: OracleSpec, settings: Sequence[PartySettings]) -> Behavior:
    """Run the oracle on every input tuple and measure its primed register."""
    if len(settings) != spec.n:
        raise ArgumentError(f"{spec.family.value} oracle has {spec.n} primed systems, got {len(settings)} settings")
    for s in settings:
        if sorted(s.directions) != [0, 1]:
            raise ArgumentError("oracle parties take binary inputs; give directions for inputs 0 and 1")
    return behavior_from_states(lambda xs: run_oracle(spec, xs), settings, (2,) * spec.n)


def free_input_cnot_behavior() -> Behavior:
    """Alice's input is the control bit of a bare CNOT; both read the computational basis.

    Bob's output copies Alice's input, so this behavior signals.
    """
    z = PartySettings.same(Z_AXIS)
    return behavior_from_states(lambda xs: run_with_free_inputs(xs[0], 0), [z, z], (2, 2))


# --- no-signaling ----------------------------------------------------------

@dataclass(frozen=True)
class NSReport:
    passed: bool
    max_violation: float
    # (party subset, input tuple with the larger marginal, input tuple with the smaller, subset outcome)
    worst_case: tuple | None
    tolerance: float


def no_signaling_check(b: Behavior, tol: float = config.PHYSICS_TOL) -> NSReport:
    """Largest change of any proper party subset's marginal under the other parties' inputs."""
    n = b.parties
    worst = 0.0
    worst_case = None
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            others = [k for k in range(n) if k not in subset]
            # sum out the complementary outputs
            marg = b.table.sum(axis=tuple(n + k for k in others))
            # -> (subset inputs, subset outputs, other inputs flattened)
            moved = np.moveaxis(marg, others, list(range(marg.ndim - len(others), marg.ndim)))
            other_shape = [b.inputs_per_party[k] for k in others]
            flat = moved.reshape(moved.shape[: 2 * size] + (-1,))
            spread = flat.max(axis=-1) - flat.min(axis=-1)
            idx = np.unravel_index(int(np.argmax(spread)), spread.shape)
            value = float(spread[idx])
            if value > worst:
                worst = value
                col = flat[idx]
                own_inputs, outcome = idx[:size], idx[size:]
                worst_case = (
                    subset,
                    _merge(subset, own_inputs, others, np.unravel_index(int(np.argmax(col)), other_shape)),
                    _merge(subset, own_inputs, others, np.unravel_index(int(np.argmin(col)), other_shape)),
                    tuple(int(o) for o in outcome),
                )
    return NSReport(worst <= tol, worst, worst_case, tol)


def _merge(subset, own, others, theirs) -> tuple[int, ...]:
    out = [0] * (len(subset) + len(others))
    for k, v in zip(subset, own):
        out[k] = int(v)
    for k, v in zip(others, theirs):
        out[k] = int(v)
    return tuple(out)


# --- CHSH ------------------------------------------------------------------

_SIGN = np.array([1.0, -1.0])


def correlators(b: Behavior) -> np.ndarray:
    """``E[x, y] = sum_ab ab p(a,b|x,y)`` for a 2-2-2 behavior."""
    _require_222(b)
    return np.einsum("xyab,a,b->xy", b.table, _SIGN, _SIGN)


def chsh_score(b: Behavior, signed: bool = False) -> float:
    """``|E00 + E01 + E10 - E11|``; ``signed=True`` drops the absolute value."""
    e = correlators(b)
    s = float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])
    return s if signed else abs(s)


def chsh_family(b: Behavior) -> np.ndarray:
    """The eight CHSH expressions: each choice of the minus-signed term, both overall signs."""
    e = correlators(b).reshape(-1)
    total = e.sum()
    values = total - 2 * e
    return np.concatenate([values, -values])


def _require_222(b: Behavior) -> None:
    if not b.is_222():
        raise ArgumentError(f"CHSH needs a 2-party, 2-input, 2-output behavior, got shape {b.table.shape}")


class Locality(enum.Enum):
    LOCAL = "Local"
    QUANTUM_COMPATIBLE = "QuantumCompatible"
    BEYOND_QUANTUM = "BeyondQuantum"


@dataclass(frozen=True)
class LocalityClass:
    classification: Locality
    chsh_max: float


def locality_classify(b: Behavior, tol: float = config.CLASSIFY_TOL, ns_tol: float = config.PHYSICS_TOL) -> LocalityClass:
    """Classify a non-signaling 2-2-2 behavior by its largest CHSH value.

    By Fine's theorem the behavior is local exactly when all eight CHSH
    expressions are at most 2.  Values within ``tol`` of a threshold count as
    the lower class.
    """
    _require_222(b)
    report = no_signaling_check(b, ns_tol)
    if not report.passed:
        raise PreconditionError(f"behavior signals (max violation {report.max_violation:.3g}); cannot classify")
    chsh_max = float(chsh_family(b).max())
    if chsh_max <= 2 + tol:
        cls = Locality.LOCAL
    elif chsh_max <= TSIRELSON + tol:
        cls = Locality.QUANTUM_COMPATIBLE
    else:
        cls = Locality.BEYOND_QUANTUM
    return LocalityClass(cls, chsh_max)


def is_pr_box(b: Behavior, tol: float = config.PHYSICS_TOL) -> bool:
    if not b.is_222():
        return False
    return bool(np.max(np.abs(b.table - pr_box().table)) <= tol)


# --- multipartite ----------------------------------------------------------

@dataclass(frozen=True)
class BoxCheck:
    passed: bool
    max_deviation: float


def parity_box(f: TargetFunction | Callable[[Sequence[int]], int], n: int) -> Behavior:
    """``2^(1-n)`` on output strings with parity ``f(inputs)``, 0 elsewhere."""
    fn = f.evaluate if isinstance(f, TargetFunction) else f
    weight = 2.0 ** (1 - n)
    return behavior_from_function(
        lambda o, i: weight if (sum(o) % 2) == fn(i) else 0.0, (2,) * n, (2,) * n
    )


def multiparty_box_check(b: Behavior, f: TargetFunction | str, tol: float = config.PHYSICS_TOL) -> BoxCheck:
    """Compare against the full-correlation box for ``f`` and require uniform strict marginals."""
    if isinstance(f, str):
        f = TargetFunction.parse(f)
    n = b.parties
    if b.table.shape != (2,) * (2 * n):
        raise ArgumentError("multiparty box check needs binary inputs and outputs")
    deviation = float(np.max(np.abs(b.table - parity_box(f, n).table)))
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            others = tuple(n + k for k in range(n) if k not in subset)
            marg = b.table.sum(axis=others)
            deviation = max(deviation, float(np.max(np.abs(marg - 0.5**size))))
    return BoxCheck(deviation <= tol, deviation)
