"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line with the measured quantity and the
tolerance it was held to, then asserts.  Run directly for a compact summary:

    python3 tests/test_acceptance.py
"""

import itertools
import math
import subprocess
import sys

import numpy as np
import pytest

from nsbox.behavior import (
    TSIRELSON,
    Locality,
    behavior_from_oracle,
    behavior_from_state,
    chsh_score,
    deterministic_behavior,
    free_input_cnot_behavior,
    is_pr_box,
    locality_classify,
    multiparty_box_check,
    no_signaling_check,
    pr_box,
)
from nsbox.circuits import PHI_PLUS, PSI_PLUS, OracleSpec, TargetFunction, run_oracle
from nsbox.measurement import (
    PartySettings,
    closed_form_prob_classical,
    closed_form_prob_quantum,
    joint_probability,
    random_direction,
    random_settings,
)
from nsbox.noise import chsh_from_counts, noisy_oracle_behavior, noisy_state_behavior, sample_counts
from nsbox.prbases import (
    COMPUTATIONAL_FAMILY,
    NOVEL_QUANTUM_FAMILY,
    grid_search,
    pr_basis_check,
    residuals,
)
from nsbox.presets import get_preset

QUANTUM = OracleSpec.bipartite(True)
CLASSICAL = OracleSpec.bipartite(False)
TOL = 1e-9


@pytest.fixture
def verdict(capsys):
    def emit(name: str, passed: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'}  {name:<34} {detail}")
        return passed

    return emit


def _pr_deviation(b) -> float:
    return float(np.max(np.abs(b.table - pr_box().table)))


def test_pr_reproduction(verdict):
    z = list(get_preset("computational"))
    dq = _pr_deviation(behavior_from_oracle(QUANTUM, z))
    dc = _pr_deviation(behavior_from_oracle(CLASSICAL, z))
    sq = chsh_score(behavior_from_oracle(QUANTUM, z))
    sc = chsh_score(behavior_from_oracle(CLASSICAL, z))
    ok = max(dq, dc) <= TOL and abs(sq - 4) <= TOL and abs(sc - 4) <= TOL
    assert verdict("pr-reproduction", ok, f"max|p-PR|={max(dq, dc):.1e} S_q={sq:.12f} S_c={sc:.12f} tol={TOL}")


def test_basis_dependence(verdict):
    s_circ = chsh_score(behavior_from_oracle(QUANTUM, list(get_preset("circular"))))
    s_diag = chsh_score(behavior_from_oracle(QUANTUM, list(get_preset("diagonal"))))
    ok = abs(s_circ - 4) <= TOL and abs(s_diag - 2) <= TOL
    assert verdict("basis-dependence", ok, f"circular S={s_circ:.12f} diagonal S={s_diag:.12f} tol={TOL}")


def test_sweep_curves(verdict):
    worst_q = worst_c = 0.0
    for lam in np.linspace(0, math.pi, 181):
        s = PartySettings.from_angles([(lam, 0.0)] * 2)
        worst_q = max(worst_q, abs(chsh_score(behavior_from_oracle(QUANTUM, [s, s])) - (2 + 2 * math.cos(lam) ** 2)))
        worst_c = max(worst_c, abs(chsh_score(behavior_from_oracle(CLASSICAL, [s, s])) - 4 * math.cos(lam) ** 2))
    spread = 0.0
    for theta in np.linspace(0, math.pi, 13):
        values = []
        for phi in np.linspace(0, 2 * math.pi, 25):
            s = PartySettings.from_angles([(theta, phi)] * 2)
            values.append(chsh_score(behavior_from_oracle(CLASSICAL, [s, s]), signed=True))
        spread = max(spread, max(values) - min(values))
    ok = worst_q <= TOL and worst_c <= TOL and spread <= 1e-12
    detail = f"quantum dev={worst_q:.1e} classical dev={worst_c:.1e} (tol {TOL}); phi spread={spread:.1e} (tol 1e-12)"
    assert verdict("sweep-curves", ok, detail)


def test_closed_forms_match_circuits(verdict):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        a_dir, b_dir = random_direction(rng), random_direction(rng)
        settings = [PartySettings.same(a_dir), PartySettings.same(b_dir)]
        for x, y in itertools.product((0, 1), repeat=2):
            sq, sc = run_oracle(QUANTUM, (x, y)), run_oracle(CLASSICAL, (x, y))
            for a, b in itertools.product((1, -1), repeat=2):
                worst = max(
                    worst,
                    abs(joint_probability(sq, settings, (x, y), (a, b)) - closed_form_prob_quantum(x, y, a, b, a_dir, b_dir)),
                    abs(joint_probability(sc, settings, (x, y), (a, b)) - closed_form_prob_classical(x, y, a, b, a_dir, b_dir)),
                )
    assert verdict("closed-form-vs-circuit", worst <= TOL, f"max dev={worst:.1e} over 100 pairs x 16, tol={TOL}")


def test_no_signaling(verdict):
    rng = np.random.default_rng(7)
    specs = [QUANTUM, CLASSICAL]
    specs += [OracleSpec.tripartite(f, q) for f in TargetFunction for q in (True, False)]
    specs += [OracleSpec.nparty(n, q) for n in (2, 3, 4, 5) for q in (True, False)]
    worst = 0.0
    for spec in specs:
        for _ in range(100):
            b = behavior_from_oracle(spec, random_settings(rng, spec.n))
            worst = max(worst, no_signaling_check(b).max_violation)
    demo = no_signaling_check(free_input_cnot_behavior()).max_violation
    ok = worst < TOL and abs(demo - 1) <= 1e-12
    detail = f"max violation={worst:.1e} over {len(specs)} oracles x 100 (tol {TOL}); free-input demo={demo:.12f}"
    assert verdict("no-signaling", ok, detail)


def test_pr_bases_quantum_grid_only_on_listed_families(verdict):
    result = grid_search(QUANTUM, 100)
    unlisted = result.unlisted
    detail = f"hits={len(result.hits)} unlisted={len(unlisted)}"
    if len(unlisted):
        pa, pb = unlisted[0, 1] / math.pi, unlisted[0, 2] / math.pi
        detail += f" e.g. phi_a={pa:.3f}pi phi_b={pb:.3f}pi"
    listed = result.all_listed
    assert verdict("pr-bases-quantum-grid", listed, detail)


def test_pr_bases_classical_grid_only_at_poles(verdict):
    result = grid_search(CLASSICAL, 100)
    off_pole = int(np.sum(np.abs(np.sin(result.hits[:, 0])) > 1e-12))
    ok = result.all_listed and off_pole == 0 and len(result.hits) > 0
    assert verdict("pr-bases-classical-grid", ok, f"hits={len(result.hits)} off-pole={off_pole}")


def test_pr_basis_residuals_on_families(verdict):
    rng = np.random.default_rng(3)
    members = NOVEL_QUANTUM_FAMILY.sample(rng, 50) + COMPUTATIONAL_FAMILY.sample(rng, 20)
    worst = max(max(abs(r) for r in residuals(a, b)) for a, b in members)
    all_pr = all(pr_basis_check(QUANTUM, a, b) for a, b in members)
    # off-family control: diagonal settings miss the (1,1) condition by 2
    r_diag = residuals(*get_preset("diagonal"))[1]
    ok = worst <= TOL and all_pr and abs(r_diag - 2) <= TOL
    assert verdict("pr-basis-residuals", ok, f"max|r| on families={worst:.1e} (tol {TOL}); diagonal r2={r_diag:.12f}")


def test_locality_classification(verdict):
    local = locality_classify(deterministic_behavior(lambda i: (0, 0)))
    q = locality_classify(behavior_from_state(PHI_PLUS, list(get_preset("tsirelson"))))
    pr = locality_classify(pr_box())
    ok = (
        local.classification is Locality.LOCAL
        and q.classification is Locality.QUANTUM_COMPATIBLE
        and abs(q.chsh_max - TSIRELSON) <= TOL
        and pr.classification is Locality.BEYOND_QUANTUM
        and abs(pr.chsh_max - 4) <= TOL
    )
    detail = (
        f"{local.classification.value}, {q.classification.value} ({q.chsh_max:.12f}), "
        f"{pr.classification.value} ({pr.chsh_max:.12f})"
    )
    assert verdict("locality-classification", ok, detail)


def test_multipartite_boxes(verdict):
    z3 = list(get_preset("computational"))[:1] * 3
    worst = 0.0
    ok = True
    for f in TargetFunction:
        for quantum in (True, False):
            check = multiparty_box_check(behavior_from_oracle(OracleSpec.tripartite(f, quantum), z3), f)
            ok &= check.passed
            worst = max(worst, check.max_deviation)
    for n in (2, 3, 4, 5):
        b = behavior_from_oracle(OracleSpec.nparty(n), list(get_preset("computational"))[:1] * n)
        check = multiparty_box_check(b, TargetFunction.XYZ)
        levels = {0.0, 2.0 ** (1 - n)}
        entries_ok = all(min(abs(v - lv) for lv in levels) <= TOL for v in b.table.reshape(-1))
        ok &= check.passed and entries_ok
        worst = max(worst, check.max_deviation)
    n2_is_pr = is_pr_box(behavior_from_oracle(OracleSpec.nparty(2), list(get_preset("computational"))))
    ok &= n2_is_pr
    assert verdict("multipartite-boxes", ok, f"max deviation={worst:.1e} (tol {TOL}); n=2 is PR box: {n2_is_pr}")


def test_experimental_values(verdict):
    v_oracle = 3.91 / 4
    b = noisy_oracle_behavior(QUANTUM, list(get_preset("computational")), v_oracle)
    analytic = chsh_score(b)
    sampled, err = chsh_from_counts(sample_counts(b, 10**6, seed=20240601))
    v_source = 2.708 / (2 * math.sqrt(2))
    s_source = chsh_score(noisy_state_behavior(PSI_PLUS, list(get_preset("tsirelson_psi")), v_source))
    ok = abs(analytic - 3.91) <= TOL and abs(sampled - analytic) <= 3 * err and abs(s_source - 2.708) <= 1e-6
    detail = (
        f"analytic={analytic:.12f} sampled={sampled:.6f}+/-{err:.6f} "
        f"({abs(sampled - analytic) / err:.2f} stderr); source S={s_source:.9f} at v={v_source:.6f}"
    )
    assert verdict("experimental-values", ok, detail)


def test_reproduction_is_byte_identical(verdict, tmp_path):
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for d in dirs:
        subprocess.run(
            [sys.executable, "-m", "nsbox.cli", "reproduce", "--out", str(d), "--seed", "12345"],
            check=True,
            capture_output=True,
        )
    names = sorted(p.name for p in dirs[0].iterdir())
    same = names == sorted(p.name for p in dirs[1].iterdir()) and all(
        (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names
    )
    assert verdict("deterministic-reproduction", same, f"{len(names)} files compared")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
