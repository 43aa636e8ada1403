"""Command-line interface: ``nsbox <verb> [flags]``.

Every verb prints a short human-readable summary on stdout.  With ``--out``
the full table is also written to a file in ``--format`` (csv or json); both
formats carry the same numbers, rounded to 9 decimals half-to-even.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import re
import sys
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Sequence

import numpy as np

from nsbox import config
from nsbox.behavior import (
    Behavior,
    behavior_from_oracle,
    chsh_score,
    free_input_cnot_behavior,
    locality_classify,
    multiparty_box_check,
    no_signaling_check,
)
from nsbox.circuits import PSI_PLUS, OracleSpec, TargetFunction
from nsbox.errors import CapacityError, NSBoxError
from nsbox.measurement import (
    PartySettings,
    chsh_closed_form_classical_settings,
    chsh_closed_form_quantum,
    random_settings,
)
from nsbox.noise import (
    chsh_from_counts,
    expected_counts,
    noisy_oracle_behavior,
    noisy_state_behavior,
    sample_counts,
)
from nsbox.prbases import enumerate_pr_families, grid_search, residuals
from nsbox.presets import get_preset, preset_for_parties, presets_version

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_QUANTUM = OracleSpec.bipartite(True)
_CLASSICAL = OracleSpec.bipartite(False)


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """Fixed 9-decimal rendering, round-half-even, no negative zero."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    d = Decimal(repr(float(x))).quantize(Decimal("1e-9"), rounding=ROUND_HALF_EVEN)
    if d.is_zero():
        d = abs(d)
    return f"{d:f}"


def _json_value(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    return float(fmt(x))


_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*(?:e[+-]?\d+)?)\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$", re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Radians from ``0.5``, ``pi/6``, ``3pi/2`` or ``0.25*pi``."""
    m = _ANGLE.match(text)
    if not m or (not m.group(1) and not m.group(2)) or m.group(1) in ("+", "-", "."):
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    coef = m.group(1)
    value = float(coef) if coef else 1.0
    if m.group(2):
        value *= math.pi
    if m.group(3):
        value /= float(m.group(3))
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    return value


def parse_angle_list(text: str) -> list[float]:
    return [parse_angle(t) for t in text.split(",") if t.strip()]


def _table_text(columns: Sequence[str], rows: Sequence[Sequence], fmt_name: str) -> str:
    if fmt_name == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps({"columns": list(columns), "rows": records}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(args, columns, rows) -> None:
    if args.out:
        Path(args.out).write_text(_table_text(columns, rows, args.format))


def _spec_from_args(args) -> OracleSpec:
    quantum = args.oracle == "quantum"
    function = getattr(args, "function", None)
    n = getattr(args, "n", None)
    if function is not None:
        if n not in (None, 3):
            if TargetFunction.parse(function) is not TargetFunction.XYZ:
                raise UsageError(f"{function} is defined for three parties only")
            return OracleSpec.nparty(n, quantum)
        return OracleSpec.tripartite(function, quantum)
    if n is None or n == 2:
        return OracleSpec.bipartite(quantum)
    return OracleSpec.nparty(n, quantum)


def _require_bipartite(spec: OracleSpec, verb: str) -> None:
    if spec.n != 2:
        raise UsageError(f"{verb} needs a bipartite oracle")


# ---- verbs ---------------------------------------------------------------


def cmd_chsh(args) -> int:
    spec = _spec_from_args(args)
    _require_bipartite(spec, "chsh")
    rows = []
    for name in args.basis or ["computational", "diagonal", "circular"]:
        alice, bob = get_preset(name)
        b = noisy_oracle_behavior(spec, [alice, bob], args.visibility)
        s = chsh_score(b)
        closed = chsh_closed_form_quantum(alice, bob) if spec.quantum else chsh_closed_form_classical_settings(alice, bob)
        closed = abs(closed) * args.visibility
        rows.append((args.oracle, name, args.visibility, s, closed))
        print(f"{name}: S={fmt(s)}")
    _emit(args, ("oracle", "basis", "visibility", "S", "S_closedform"), rows)
    worst = max(abs(r[3] - r[4]) for r in rows)
    return EXIT_OK if worst <= args.tolerance else EXIT_CHECK_FAILED


def _sweep_row(theta: float, phi: float) -> tuple:
    settings = PartySettings.from_angles([(theta, phi), (theta, phi)])
    s_q = chsh_score(behavior_from_oracle(_QUANTUM, [settings, settings]), signed=True)
    s_c = chsh_score(behavior_from_oracle(_CLASSICAL, [settings, settings]), signed=True)
    closed_q = chsh_closed_form_quantum(settings, settings)
    closed_c = chsh_closed_form_classical_settings(settings, settings)
    return (theta, phi, s_q, s_c, closed_q, closed_c)


def sweep_rows(thetas: Sequence[float], phis: Sequence[float], workers: int = 1) -> list[tuple]:
    """One row per (theta, phi), theta-major, whatever the worker count."""
    grid = [(t, p) for t in thetas for p in phis]
    if workers <= 1:
        return [_sweep_row(t, p) for t, p in grid]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda tp: _sweep_row(*tp), grid))


def cmd_sweep(args) -> int:
    if args.theta is not None:
        thetas = args.theta
    else:
        if args.grid < 1:
            raise UsageError("--grid needs at least one point")
        thetas = list(np.linspace(0.0, math.pi, args.grid)) if args.grid > 1 else [0.0]
    phis = args.phi if args.phi is not None else [0.0]
    if not thetas or not phis:
        raise UsageError("empty sweep grid")
    rows = sweep_rows(thetas, phis, args.workers)
    columns = ("theta", "phi", "S_quantum", "S_classical", "S_closedform", "S_classical_closedform")
    _emit(args, columns, rows)
    worst = max(max(abs(r[2] - r[4]), abs(r[3] - r[5])) for r in rows)
    print(f"points={len(rows)} max_closedform_deviation={fmt(worst)}")
    if len(rows) == 1:
        r = rows[0]
        print(f"S_quantum={fmt(r[2])} S_classical={fmt(r[3])}")
    return EXIT_OK if worst <= args.tolerance else EXIT_CHECK_FAILED


def cmd_nosig(args) -> int:
    if args.unsafe_free_inputs:
        report = no_signaling_check(free_input_cnot_behavior(), args.tolerance)
        print("free-input CNOT demo: the control qubit is prepared freely, so Bob reads Alice's input")
        print(f"max_violation={fmt(report.max_violation)}")
        _emit(args, ("oracle", "trial", "max_violation"), [("free-input-cnot", 0, report.max_violation)])
        # signalling is the expected result here
        return EXIT_OK if not report.passed else EXIT_CHECK_FAILED
    spec = _spec_from_args(args)
    if args.basis:
        trials = [preset_for_parties(args.basis, spec.n)]
    else:
        rng = np.random.default_rng(args.seed)
        trials = [random_settings(rng, spec.n) for _ in range(args.random)]
    rows = []
    for i, settings in enumerate(trials):
        report = no_signaling_check(behavior_from_oracle(spec, settings), args.tolerance)
        rows.append((spec.family.value, i, report.max_violation))
    worst = max(r[2] for r in rows)
    _emit(args, ("oracle", "trial", "max_violation"), rows)
    print(f"{spec.family.value}: trials={len(rows)} max_violation={worst:.3e}")
    return EXIT_OK if worst <= args.tolerance else EXIT_CHECK_FAILED


def cmd_prbases(args) -> int:
    spec = _spec_from_args(args)
    _require_bipartite(spec, "prbases")
    for fam in enumerate_pr_families(spec, tol=args.tolerance):
        print(f"{fam.kind.value}: {fam.description}")
        alice, bob = fam.member(math.pi / 3 if fam.kind.value == "NovelQuantum" else 0.0)
        r1, r2 = residuals(alice, bob)
        print(f"  residuals at a sample member: r1={fmt(r1)} r2={fmt(r2)}")
    if args.grid is None:
        return EXIT_OK
    result = grid_search(spec, args.grid, args.tolerance)
    rows = [(t, pa, pb, fam or "unlisted") for (t, pa, pb), fam in zip(result.hits, result.family)]
    _emit(args, ("theta", "phi_a", "phi_b", "family"), rows)
    unlisted = result.unlisted
    print(f"grid {args.grid}: hits={len(rows)} unlisted={len(unlisted)}")
    if len(unlisted):
        pairs = sorted({(round(pa / math.pi, 6), round(pb / math.pi, 6)) for _, pa, pb in unlisted})
        shown = ", ".join(f"({pa}pi, {pb}pi)" for pa, pb in pairs[:5])
        print(f"  unlisted azimuth pairs (phi_a, phi_b): {shown}")
    return EXIT_CHECK_FAILED if args.strict and len(unlisted) else EXIT_OK


def _behavior_rows(b: Behavior) -> list[tuple]:
    n = b.parties
    rows = []
    for idx in np.ndindex(b.table.shape):
        rows.append(("".join(map(str, idx[:n])), "".join(map(str, idx[n:])), float(b.table[idx])))
    return rows


def cmd_multiparty(args) -> int:
    spec = _spec_from_args(args)
    if spec.n == 2 and args.function is None:
        spec = OracleSpec.nparty(2, spec.quantum)
    settings = preset_for_parties(args.basis or "computational", spec.n)
    b = behavior_from_oracle(spec, settings)
    target = spec.target or TargetFunction.XYZ
    box = multiparty_box_check(b, target, args.tolerance)
    ns = no_signaling_check(b, args.tolerance)
    values = sorted({float(fmt(v)) for v in b.table.reshape(-1)})
    print(f"{spec.family.value} f={target.value} n={spec.n}")
    print(f"box check: {'pass' if box.passed else 'FAIL'} max_deviation={box.max_deviation:.3e}")
    print(f"no-signaling: {'pass' if ns.passed else 'FAIL'} max_violation={ns.max_violation:.3e}")
    print(f"distinct probabilities: {', '.join(fmt(v) for v in values)}")
    rows = _behavior_rows(b)
    if args.table:
        for x, a, p in rows:
            print(f"  p({a}|{x}) = {fmt(p)}")
    _emit(args, ("inputs", "outputs", "p"), rows)
    return EXIT_OK if box.passed and ns.passed else EXIT_CHECK_FAILED


def cmd_experiment(args) -> int:
    if args.resource == "source":
        alice, bob = get_preset(args.basis or "tsirelson_psi")
        b = noisy_state_behavior(PSI_PLUS, [alice, bob], args.visibility)
    else:
        spec = _spec_from_args(args)
        _require_bipartite(spec, "experiment")
        alice, bob = get_preset(args.basis or "computational")
        b = noisy_oracle_behavior(spec, [alice, bob], args.visibility)
    analytic = chsh_score(b)
    print(f"analytic S={fmt(analytic)}")
    if args.exact:
        if args.out:
            Path(args.out).write_text(expected_counts(b, args.shots).to_csv())
        return EXIT_OK
    if args.shots < 1:
        raise UsageError("--shots must be positive")
    counts = sample_counts(b, args.shots, args.seed)
    s, err = chsh_from_counts(counts)
    print(f"sampled S={fmt(s)} +/- {fmt(err)} (shots/input={args.shots}, seed={args.seed})")
    if args.out:
        Path(args.out).write_text(counts.to_csv())
    return EXIT_OK


def cmd_behavior_dump(args) -> int:
    spec = _spec_from_args(args)
    settings = preset_for_parties(args.basis or "computational", spec.n)
    b = noisy_oracle_behavior(spec, settings, args.visibility)
    text = json.dumps(_rounded_behavior(b), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _rounded_behavior(b: Behavior) -> dict:
    d = b.to_dict()

    def walk(v):
        return [walk(x) for x in v] if isinstance(v, list) else float(fmt(v))

    d["table"] = walk(d["table"])
    return d


def cmd_reproduce(args) -> int:
    """Write every figure's data table into one directory."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True

    rows = []
    for oracle, spec in (("quantum", _QUANTUM), ("classical", _CLASSICAL)):
        for name in ("computational", "diagonal", "circular"):
            alice, bob = get_preset(name)
            rows.append((oracle, name, chsh_score(behavior_from_oracle(spec, [alice, bob]))))
    (out / "chsh_bases.csv").write_text(_table_text(("oracle", "basis", "S"), rows, "csv"))

    thetas = list(np.linspace(0.0, math.pi, 181))
    columns = ("theta", "phi", "S_quantum", "S_classical", "S_closedform", "S_classical_closedform")
    (out / "sweep_theta.csv").write_text(_table_text(columns, sweep_rows(thetas, [0.0]), "csv"))
    phis = list(np.linspace(0.0, 2 * math.pi, 37))
    (out / "sweep_phi.csv").write_text(
        _table_text(columns, sweep_rows([0.0, math.pi / 6, math.pi / 4, math.pi / 3], phis), "csv")
    )

    for label, spec in (("quantum", _QUANTUM), ("classical", _CLASSICAL)):
        result = grid_search(spec, args.grid)
        hits = [(t, pa, pb, fam or "unlisted") for (t, pa, pb), fam in zip(result.hits, result.family)]
        (out / f"prbases_grid_{label}.csv").write_text(_table_text(("theta", "phi_a", "phi_b", "family"), hits, "csv"))

    rng = np.random.default_rng(args.seed)
    ns_rows = []
    specs = [_QUANTUM, _CLASSICAL] + [OracleSpec.tripartite(f, q) for f in TargetFunction for q in (True, False)]
    specs += [OracleSpec.nparty(n, q) for n in (4, 5) for q in (True, False)]
    for spec in specs:
        label = spec.family.value + (f"-{spec.target.value}" if spec.target else "") + f"-n{spec.n}"
        worst = max(
            no_signaling_check(behavior_from_oracle(spec, random_settings(rng, spec.n))).max_violation
            for _ in range(args.random)
        )
        ns_rows.append((label, worst))
        ok &= worst <= config.PHYSICS_TOL
    (out / "nosig.csv").write_text(_table_text(("oracle", "max_violation"), ns_rows, "csv"))

    for f in TargetFunction:
        b = behavior_from_oracle(OracleSpec.tripartite(f), preset_for_parties("computational", 3))
        (out / f"multiparty_{f.name.lower()}.json").write_text(json.dumps(_rounded_behavior(b), indent=2) + "\n")

    exp_rows = []
    pr_b = noisy_oracle_behavior(_QUANTUM, list(get_preset("computational")), args.visibility)
    counts = sample_counts(pr_b, args.shots, args.seed)
    (out / "experiment_counts.csv").write_text(counts.to_csv())
    s, err = chsh_from_counts(counts)
    exp_rows.append(("oracle", args.visibility, chsh_score(pr_b), s, err))
    v_src = args.source_visibility
    src_b = noisy_state_behavior(PSI_PLUS, list(get_preset("tsirelson_psi")), v_src)
    counts = sample_counts(src_b, args.shots, args.seed + 1)
    (out / "experiment_source_counts.csv").write_text(counts.to_csv())
    s, err = chsh_from_counts(counts)
    exp_rows.append(("source", v_src, chsh_score(src_b), s, err))
    (out / "experiment.csv").write_text(
        _table_text(("resource", "visibility", "S_analytic", "S_sampled", "stderr"), exp_rows, "csv")
    )

    cls_rows = []
    for name in ("computational", "tsirelson"):
        c = locality_classify(behavior_from_oracle(_QUANTUM, list(get_preset(name))))
        cls_rows.append((name, c.classification.value, c.chsh_max))
    (out / "locality.csv").write_text(_table_text(("basis", "class", "chsh_max"), cls_rows, "csv"))

    print(f"wrote figure data to {out} (presets v{presets_version()})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---- argument parsing ----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write the full table here")
    common.add_argument("--tolerance", type=float, default=config.PHYSICS_TOL)

    oracle = argparse.ArgumentParser(add_help=False)
    oracle.add_argument("--oracle", choices=("quantum", "classical"), default="quantum")
    oracle.add_argument("--function", help="tripartite target: xyz, x(y+z) or svetlichny")
    oracle.add_argument("--n", type=int, help="number of parties (n-party XYZ oracle when > 3)")

    parser = argparse.ArgumentParser(prog="nsbox", description="Non-signaling oracle simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh", parents=[common, oracle], help="CHSH score per basis preset")
    p.add_argument("--basis", action="append", help="preset name; repeatable")
    p.add_argument("--visibility", type=float, default=1.0)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("sweep", parents=[common], help="CHSH over a grid of shared measurement axes")
    p.add_argument("--theta", type=parse_angle_list, help="comma-separated polar angles (e.g. pi/6,pi/4)")
    p.add_argument("--phi", type=parse_angle_list, help="comma-separated azimuths")
    p.add_argument("--grid", type=int, default=181, help="theta points on [0, pi] when --theta is absent")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("nosig", parents=[common, oracle], help="no-signaling check")
    p.add_argument("--basis", help="check one preset instead of random settings")
    p.add_argument("--random", type=int, default=100, help="number of random settings")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unsafe-free-inputs", action="store_true", help="run the free-input CNOT demo")
    p.set_defaults(func=cmd_nosig)

    p = sub.add_parser("prbases", parents=[common, oracle], help="PR-basis families and grid rediscovery")
    p.add_argument("--grid", type=int, help="grid points per angle")
    p.add_argument("--strict", action="store_true", help="exit 1 when the grid finds unlisted PR bases")
    p.set_defaults(func=cmd_prbases)

    p = sub.add_parser("multiparty", parents=[common, oracle], help="multipartite box identities")
    p.add_argument("--basis", help="preset applied to every party (default computational)")
    p.add_argument("--table", action="store_true", help="print the full behavior table")
    p.set_defaults(func=cmd_multiparty)

    p = sub.add_parser("experiment", parents=[common, oracle], help="noisy counts and sampled CHSH")
    p.add_argument("--basis")
    p.add_argument("--resource", choices=("oracle", "source"), default="oracle")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--shots", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="skip sampling; report the analytic value")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("behavior-dump", parents=[common, oracle], help="behavior table as JSON")
    p.add_argument("--basis")
    p.add_argument("--visibility", type=float, default=1.0)
    p.set_defaults(func=cmd_behavior_dump)

    p = sub.add_parser("reproduce", help="write all figure data into a directory")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=10**6)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--random", type=int, default=20)
    p.add_argument("--visibility", type=float, default=3.91 / 4)
    p.add_argument("--source-visibility", type=float, default=2.708 / (2 * math.sqrt(2)))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nsbox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"nsbox: capacity error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NSBoxError as exc:
        print(f"nsbox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
