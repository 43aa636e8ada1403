"""Measurement bases under which the bipartite oracles reproduce the PR box exactly.

For the entangled oracle the behavior has uniform marginals and correlators

    E_xy = a1 b1 - s a2 b2 + s a3 b3,   s = (-1)^{xy},

so it is a PR box iff ``E_xy = s`` for all four inputs.  In angles this is one
trigonometric condition for the three inputs with ``xy = 0`` and another for
``(1, 1)``; ``residuals`` returns their left-minus-right values.  The two
closed families below are the listed solutions.  ``grid_search`` re-derives
PR bases by brute force from the simulated states, independently of the
closed forms, and reports any hit outside the listed families.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from nsbox import config
from nsbox.behavior import behavior_from_oracle, is_pr_box, pr_box
from nsbox.circuits import OracleFamily, OracleSpec, run_oracle
from nsbox.errors import ArgumentError
from nsbox.linalg import PAULI, StateVector
from nsbox.measurement import TWO_PI, BlochDirection, PartySettings, as_quantum_state

HALF_PI = math.pi / 2
THREE_HALF_PI = 3 * math.pi / 2


class PRBasisKind(enum.Enum):
    COMPUTATIONAL = "Computational"
    NOVEL_QUANTUM = "NovelQuantum"


def _angle_close(a: float, b: float, tol: float) -> bool:
    d = math.fmod(abs(a - b), TWO_PI)
    return min(d, TWO_PI - d) <= tol


def _at_pole(theta: float, tol: float) -> bool:
    return abs(math.sin(theta)) <= tol


@dataclass(frozen=True)
class PRBasisFamily:
    kind: PRBasisKind
    description: str
    parameters: dict = field(default_factory=dict)

    def member(self, k: float, phis: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)) -> tuple[PartySettings, PartySettings]:
        """Settings of the member with shared polar angle ``k``.

        For the computational family ``k`` must be 0 or pi and ``phis`` sets the
        free azimuths ``(phi_a0, phi_a1, phi_b0, phi_b1)``; the novel family
        ignores ``phis``.
        """
        if self.kind is PRBasisKind.COMPUTATIONAL:
            if not _at_pole(k, 1e-12):
                raise ArgumentError("computational family needs theta in {0, pi}")
            return (
                PartySettings.from_angles([(k, phis[0]), (k, phis[1])]),
                PartySettings.from_angles([(k, phis[2]), (k, phis[3])]),
            )
        return (
            PartySettings.from_angles([(k, HALF_PI), (k, HALF_PI)]),
            PartySettings.from_angles([(k, THREE_HALF_PI), (k, THREE_HALF_PI)]),
        )

    def sample(self, rng: np.random.Generator, count: int) -> list[tuple[PartySettings, PartySettings]]:
        out = []
        for i in range(count):
            if self.kind is PRBasisKind.COMPUTATIONAL:
                k = 0.0 if i % 2 == 0 else math.pi
                out.append(self.member(k, tuple(rng.uniform(0, TWO_PI, 4))))
            else:
                # endpoints first, then interior points
                k = (0.0, math.pi)[i] if i < 2 else float(rng.uniform(0, math.pi))
                out.append(self.member(k))
        return out

    def contains(self, alice: PartySettings, bob: PartySettings, tol: float = config.PHYSICS_TOL) -> bool:
        dirs = [_effective(alice, 0), _effective(alice, 1), _effective(bob, 0), _effective(bob, 1)]
        thetas = [d.theta for d in dirs]
        if max(thetas) - min(thetas) > tol:
            return False
        theta = thetas[0]
        if self.kind is PRBasisKind.COMPUTATIONAL:
            return _at_pole(theta, tol)
        if _at_pole(theta, tol):
            # azimuth is meaningless at the poles; canonicalised to 0 there
            return True
        return all(_angle_close(d.phi, HALF_PI, tol) for d in dirs[:2]) and all(
            _angle_close(d.phi, THREE_HALF_PI, tol) for d in dirs[2:]
        )


COMPUTATIONAL_FAMILY = PRBasisFamily(
    PRBasisKind.COMPUTATIONAL,
    "all polar angles equal to 0 or to pi, azimuths free",
    {"theta": "{0, pi} shared", "phi_a": "[0, 2pi) free", "phi_b": "[0, 2pi) free"},
)
NOVEL_QUANTUM_FAMILY = PRBasisFamily(
    PRBasisKind.NOVEL_QUANTUM,
    "shared polar angle k in [0, pi], phi_a = pi/2, phi_b = 3pi/2",
    {"theta": "k in [0, pi] shared", "phi_a": "pi/2", "phi_b": "3pi/2"},
)


def _effective(settings: PartySettings, x: int) -> BlochDirection:
    d = settings.direction(x)
    if settings.outcome_sign[x] == 1:
        return d
    return BlochDirection(math.pi - d.theta, d.phi + math.pi)


def _require_bipartite(spec: OracleSpec) -> None:
    if spec.family not in (OracleFamily.BIPARTITE_QUANTUM, OracleFamily.BIPARTITE_CLASSICAL):
        raise ArgumentError("PR bases are characterised for the bipartite oracles only")


def pr_basis_check(spec: OracleSpec, alice: PartySettings, bob: PartySettings, tol: float = config.PHYSICS_TOL) -> bool:
    """True iff the oracle's behavior under these settings is the PR box within ``tol``."""
    _require_bipartite(spec)
    return is_pr_box(behavior_from_oracle(spec, [alice, bob]), tol)


def residuals_by_input(alice: PartySettings, bob: PartySettings) -> dict[tuple[int, int], float]:
    """Left-minus-right value of the PR condition for each input pair."""
    out = {}
    for x in (0, 1):
        for y in (0, 1):
            da, db = _effective(alice, x), _effective(bob, y)
            sa, sb = math.sin(da.theta), math.sin(db.theta)
            ca, cb = math.cos(da.theta), math.cos(db.theta)
            if x * y == 0:
                out[(x, y)] = sa * sb * math.cos(da.phi + db.phi) + ca * cb - 1.0
            else:
                out[(x, y)] = sa * sb * math.cos(db.phi - da.phi) - ca * cb + 1.0
    return out


def residuals(alice: PartySettings, bob: PartySettings) -> tuple[float, float]:
    """``(r1, r2)``: the worst of the three ``xy = 0`` conditions, and the ``(1, 1)`` condition."""
    res = residuals_by_input(alice, bob)
    r1 = max((res[(0, 0)], res[(0, 1)], res[(1, 0)]), key=abs)
    return r1, res[(1, 1)]


def enumerate_pr_families(
    spec: OracleSpec, samples: int = 20, seed: int = 0, tol: float = config.PHYSICS_TOL
) -> list[PRBasisFamily]:
    """Closed-form PR-basis families for the oracle, each certified on ``samples`` members."""
    _require_bipartite(spec)
    families = [COMPUTATIONAL_FAMILY]
    if spec.quantum:
        families.append(NOVEL_QUANTUM_FAMILY)
    rng = np.random.default_rng(seed)
    for fam in families:
        for alice, bob in fam.sample(rng, samples):
            if not pr_basis_check(spec, alice, bob, tol):
                raise RuntimeError(f"family {fam.kind.value} failed certification")
    return families


@dataclass(frozen=True, eq=False)
class GridSearchResult:
    thetas: np.ndarray
    phis: np.ndarray
    # one row (theta, phi_a, phi_b) per grid point whose behavior is a PR box
    hits: np.ndarray
    # which listed family each hit belongs to ("" when none)
    family: tuple[str, ...]

    @property
    def unlisted(self) -> np.ndarray:
        return self.hits[[f == "" for f in self.family]]

    @property
    def all_listed(self) -> bool:
        return all(self.family)


def _projectors(theta: float, phis: np.ndarray) -> np.ndarray:
    """Projectors ``[outcome index, grid index, 2, 2]`` for axes at ``theta`` and each ``phi``."""
    n = np.stack([np.sin(theta) * np.cos(phis), np.sin(theta) * np.sin(phis), np.full_like(phis, np.cos(theta))], axis=-1)
    ndots = np.einsum("gk,kij->gij", n, np.asarray(PAULI))
    eye = np.eye(2)
    return 0.5 * np.stack([eye + ndots, eye - ndots])


def grid_search(spec: OracleSpec, points: int = 100, tol: float = config.PHYSICS_TOL) -> GridSearchResult:
    """Brute-force PR bases over (shared theta, Alice's phi, Bob's phi).

    Each party uses the same axis for both inputs.  Probabilities come from
    the simulated oracle states via the trace rule, not from the closed forms.
    """
    _require_bipartite(spec)
    if points < 2:
        raise ArgumentError("grid needs at least two points per angle")
    thetas = np.linspace(0.0, math.pi, points)
    phis = TWO_PI * np.arange(points) / points
    rhos = {}
    for x in (0, 1):
        for y in (0, 1):
            st = as_quantum_state(run_oracle(spec, (x, y)))
            rho = st.to_density_matrix().matrix if isinstance(st, StateVector) else st.matrix
            rhos[(x, y)] = rho.reshape(2, 2, 2, 2)
    target = pr_box().table
    hits = []
    for theta in thetas:
        proj = _projectors(theta, phis)
        dev = np.zeros((points, points))
        for (x, y), r in rhos.items():
            p = np.einsum("agik,bhjl,klij->abgh", proj, proj, r, optimize=True).real
            dev = np.maximum(dev, np.max(np.abs(p - target[x, y][:, :, None, None]), axis=(0, 1)))
        ga, gb = np.nonzero(dev <= tol)
        hits.append(np.column_stack([np.full(ga.size, theta), phis[ga], phis[gb]]))
    hits_arr = np.concatenate(hits) if hits else np.zeros((0, 3))
    return GridSearchResult(thetas, phis, hits_arr, classify_grid_points(spec, hits_arr))


def classify_grid_points(spec: OracleSpec, points: np.ndarray, tol: float = 1e-9) -> tuple[str, ...]:
    """Listed family of each ``(theta, phi_a, phi_b)`` row, or "" for none.

    Each row describes settings where both of a party's inputs share one axis.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    theta, pa, pb = points.T
    pole = np.abs(np.sin(theta)) <= tol

    def close(a, b):
        d = np.mod(np.abs(a - b), TWO_PI)
        return np.minimum(d, TWO_PI - d) <= tol

    novel = close(pa, HALF_PI) & close(pb, THREE_HALF_PI)
    labels = []
    for is_pole, is_novel in zip(pole, novel):
        if is_pole:
            labels.append(PRBasisKind.COMPUTATIONAL.value)
        elif spec.quantum and is_novel:
            labels.append(PRBasisKind.NOVEL_QUANTUM.value)
        else:
            labels.append("")
    return tuple(labels)
