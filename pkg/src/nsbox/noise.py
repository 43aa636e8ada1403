"""Visibility noise, coincidence-count sampling and CHSH estimation from counts.

Noise is isotropic: ``rho -> v rho + (1 - v) I/d``.  The identity part has
zero correlators in every basis, so every CHSH value scales exactly by ``v``.

Sampling uses numpy's PCG64 bit generator.  A run seed is expanded with
``numpy.random.SeedSequence(seed).spawn(k)`` into one independent child stream
per input tuple (row-major input order), and each input tuple draws one
multinomial sample.  The same seed therefore always gives the same table, and
tables for different input tuples never share random state.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from nsbox.behavior import Behavior, behavior_from_states
from nsbox.circuits import ClassicalState, OracleSpec, run_oracle
from nsbox.errors import ArgumentError, InsufficientDataError
from nsbox.linalg import DensityMatrix, StateVector
from nsbox.measurement import PartySettings, as_quantum_state

# half-wave plate angle for outcome index 0 and 1
HWP_DEGREES = (0, 45)
CSV_COLUMNS = ("x", "y", "a_deg", "b_deg", "count")


def _check_v(v: float) -> float:
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise ArgumentError(f"visibility must lie in [0, 1], got {v}")
    return v


@dataclass(frozen=True)
class VisibilityModel:
    v: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v", _check_v(self.v))

    def apply(self, rho) -> DensityMatrix:
        return apply_visibility(rho, self.v)


def apply_visibility(rho: DensityMatrix | StateVector | ClassicalState, v: float) -> DensityMatrix:
    """``v rho + (1 - v) I/d``."""
    v = _check_v(v)
    st = as_quantum_state(rho)
    if isinstance(st, StateVector):
        st = st.to_density_matrix()
    d = st.dim
    return DensityMatrix(v * st.matrix + (1 - v) * np.eye(d) / d)


def noisy_oracle_behavior(spec: OracleSpec, settings: Sequence[PartySettings], v: float) -> Behavior:
    """Oracle behavior with visibility ``v`` applied to every output state."""
    v = _check_v(v)
    if len(settings) != spec.n:
        raise ArgumentError(f"{spec.family.value} oracle needs {spec.n} settings")
    return behavior_from_states(lambda xs: apply_visibility(run_oracle(spec, xs), v), settings, (2,) * spec.n)


def noisy_state_behavior(state, settings: Sequence[PartySettings], v: float) -> Behavior:
    noisy = apply_visibility(state, v)
    return behavior_from_states(lambda _xs: noisy, settings)


def fit_visibility(target_s: float, ideal_s: float) -> float:
    """Visibility that scales ``ideal_s`` down to ``target_s``."""
    if not (0 < target_s <= ideal_s):
        raise ArgumentError(f"need 0 < target ({target_s}) <= ideal ({ideal_s})")
    return target_s / ideal_s


@dataclass(frozen=True, eq=False)
class CountsTable:
    """Coincidence counts ``counts[x, y, a, b]`` with a, b indexing the two wave-plate settings."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (2, 2, 2, 2):
            raise ArgumentError(f"counts must have shape (2, 2, 2, 2), got {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ArgumentError("counts must be integers")
        c = c.astype(np.int64)
        if c.min() < 0:
            raise ArgumentError("counts must be nonnegative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    def total(self, x: int, y: int) -> int:
        return int(self.counts[x, y].sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for x in (0, 1):
            for y in (0, 1):
                for a in (0, 1):
                    for b in (0, 1):
                        writer.writerow((x, y, HWP_DEGREES[a], HWP_DEGREES[b], int(self.counts[x, y, a, b])))
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "CountsTable":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ArgumentError(f"expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
        c = np.zeros((2, 2, 2, 2), dtype=np.int64)
        seen = set()
        for row in reader:
            try:
                key = (
                    int(row["x"]),
                    int(row["y"]),
                    HWP_DEGREES.index(int(row["a_deg"])),
                    HWP_DEGREES.index(int(row["b_deg"])),
                )
            except ValueError as exc:
                raise ArgumentError(f"bad counts row {row}") from exc
            if key in seen:
                raise ArgumentError(f"duplicate counts row {row}")
            seen.add(key)
            c[key] = int(row["count"])
        return cls(c)

    @classmethod
    def read_csv(cls, path: str | Path) -> "CountsTable":
        return cls.from_csv(Path(path).read_text())


def sample_counts(b: Behavior, shots_per_input: int, seed: int) -> CountsTable:
    """Multinomial coincidence counts, ``shots_per_input`` per input pair."""
    if not b.is_222():
        raise ArgumentError("counts tables describe 2-2-2 behaviors")
    if shots_per_input < 1:
        raise ArgumentError("need at least one shot per input")
    children = np.random.SeedSequence(seed).spawn(4)
    c = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for child, (x, y) in zip(children, ((0, 0), (0, 1), (1, 0), (1, 1))):
        rng = np.random.Generator(np.random.PCG64(child))
        p = b.table[x, y].reshape(-1)
        c[x, y] = rng.multinomial(shots_per_input, p / p.sum()).reshape(2, 2)
    return CountsTable(c)


def expected_counts(b: Behavior, shots_per_input: int) -> CountsTable:
    """Noise-free counts ``round(shots * p)``; exact whenever every ``shots * p`` is an integer."""
    if not b.is_222():
        raise ArgumentError("counts tables describe 2-2-2 behaviors")
    return CountsTable(np.rint(b.table * shots_per_input).astype(np.int64))


_SAME = np.array([[1, -1], [-1, 1]])


def correlator_from_counts(c: CountsTable, x: int, y: int) -> float:
    """(equal-setting coincidences - unequal ones) / total."""
    total = c.total(x, y)
    if total <= 0:
        raise InsufficientDataError(f"no coincidences recorded for inputs ({x}, {y})")
    return float(np.sum(_SAME * c.counts[x, y]) / total)


def correlator_stderr(c: CountsTable, x: int, y: int) -> float:
    """Standard error of the correlator with independent Poisson counts per cell.

    Propagating ``var(C) = C`` through the ratio gives ``(1 - E^2) / N``.
    """
    total = c.total(x, y)
    if total <= 0:
        raise InsufficientDataError(f"no coincidences recorded for inputs ({x}, {y})")
    e = correlator_from_counts(c, x, y)
    grad = (_SAME - e) / total
    return float(math.sqrt(np.sum(grad**2 * c.counts[x, y])))


def chsh_from_counts(c: CountsTable) -> tuple[float, float]:
    """``|sum_xy (-1)^{xy} E_xy|`` and its standard error (cells independent)."""
    s = 0.0
    var = 0.0
    for x in (0, 1):
        for y in (0, 1):
            s += (-1) ** (x * y) * correlator_from_counts(c, x, y)
            var += correlator_stderr(c, x, y) ** 2
    return abs(s), math.sqrt(var)

