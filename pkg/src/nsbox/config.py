"""Tolerances and size caps.

``NSBOX_MAX_QUBITS`` in the environment overrides the default cap of 10
qubits (2**10 entries per matrix axis, at most 10 parties).  It is read at call
time so tests and the CLI can change it without reloading modules.
"""

from __future__ import annotations

import os

# algebraic identities (normalisation, idempotence, unitarity)
ALGEBRAIC_TOL = 1e-12
# derived physics checks (closed form vs. simulation, no-signaling)
PHYSICS_TOL = 1e-9
# smallest eigenvalue accepted for a density matrix
PSD_TOL = 1e-10
# band around the CHSH thresholds 2 and 2*sqrt(2)
CLASSIFY_TOL = 1e-6

DEFAULT_MAX_QUBITS = 10


def max_qubits() -> int:
    raw = os.environ.get("NSBOX_MAX_QUBITS")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"NSBOX_MAX_QUBITS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"NSBOX_MAX_QUBITS must be positive, got {value}")
    return value


def max_dim() -> int:
    return 2 ** max_qubits()
