import csv
import io
import json
import math

import numpy as np
import pytest

from nsbox.behavior import Behavior, pr_box
from nsbox.cli import fmt, main, parse_angle
from nsbox.noise import CountsTable


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


@pytest.mark.parametrize(
    "value,text",
    [
        (4.0, "4.000000000"),
        (3.9999999999999996, "4.000000000"),
        (-1e-17, "0.000000000"),
        (0.0000000005, "0.000000000"),
        (0.0000000015, "0.000000002"),
        (2.8284271247461903, "2.828427125"),
        (7, "7"),
    ],
)
def test_number_format(value, text):
    assert fmt(value) == text


@pytest.mark.parametrize(
    "text,value",
    [("0.5", 0.5), ("pi", math.pi), ("pi/6", math.pi / 6), ("3pi/2", 1.5 * math.pi), ("0.25*pi", math.pi / 4)],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["", "abc", "-", "pi/"])
def test_parse_angle_rejects(text):
    with pytest.raises(Exception):
        parse_angle(text)


@pytest.mark.parametrize(
    "oracle,basis,expected",
    [("quantum", "computational", "4.000000000"), ("quantum", "diagonal", "2.000000000"), ("classical", "circular", "0.000000000")],
)
def test_chsh(capsys, oracle, basis, expected):
    code, out = run(capsys, "chsh", "--oracle", oracle, "--basis", basis)
    assert code == 0
    assert out.out.strip() == f"{basis}: S={expected}"


def test_unknown_preset_is_usage_error(capsys):
    code, out = run(capsys, "chsh", "--basis", "nope")
    assert code == 2
    assert "unknown basis preset" in out.err


def test_bad_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["chsh", "--oracle", "magic"])
    assert exc.value.code == 2


def test_csv_and_json_carry_same_numbers(capsys, tmp_path):
    c, j = tmp_path / "s.csv", tmp_path / "s.json"
    assert main(["sweep", "--grid", "7", "--phi", "0,pi/3", "--out", str(c)]) == 0
    assert main(["sweep", "--grid", "7", "--phi", "0,pi/3", "--format", "json", "--out", str(j)]) == 0
    rows = list(csv.DictReader(io.StringIO(c.read_text())))
    data = json.loads(j.read_text())
    assert len(rows) == len(data["rows"]) == 14
    for r, d in zip(rows, data["rows"]):
        for key, value in r.items():
            assert float(value) == d[key]


def test_sweep_quantum_curve(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--grid", "181", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 181
    for r in rows:
        theta = float(r["theta"])
        assert float(r["S_quantum"]) == pytest.approx(2 + 2 * math.cos(theta) ** 2, abs=2e-9)
        assert r["S_quantum"] == r["S_closedform"]


def test_sweep_classical_pi_over_six(capsys):
    code, out = run(capsys, "sweep", "--theta", "pi/6")
    assert code == 0
    assert "S_classical=3.000000000" in out.out


def test_sweep_parallel_rows_match_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--grid", "9", "--phi", "0,pi/2,pi", "--out", str(a)])
    main(["sweep", "--grid", "9", "--phi", "0,pi/2,pi", "--workers", "4", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_empty_grid_is_usage_error(capsys):
    assert run(capsys, "sweep", "--grid", "0")[0] == 2
    assert run(capsys, "sweep", "--theta", ",")[0] == 2


@pytest.mark.parametrize("extra", [[], ["--oracle", "classical"], ["--function", "svetlichny"], ["--n", "4"]])
def test_nosig_passes(capsys, extra):
    code, out = run(capsys, "nosig", "--random", "10", *extra)
    assert code == 0
    assert "max_violation=" in out.out


def test_nosig_free_input_demo(capsys):
    code, out = run(capsys, "nosig", "--unsafe-free-inputs")
    assert code == 0
    assert "max_violation=1.000000000" in out.out


def test_prbases_lists_families(capsys):
    _, out = run(capsys, "prbases")
    assert "Computational" in out.out and "NovelQuantum" in out.out
    _, out = run(capsys, "prbases", "--oracle", "classical")
    assert "Computational" in out.out and "NovelQuantum" not in out.out


def test_prbases_grid(capsys, tmp_path):
    out = tmp_path / "grid.csv"
    code, printed = run(capsys, "prbases", "--grid", "50", "--strict", "--out", str(out))
    assert code == 0
    assert "unlisted=0" in printed.out
    code, printed = run(capsys, "prbases", "--grid", "100", "--strict")
    assert code == 1
    assert "unlisted=98" in printed.out


@pytest.mark.parametrize(
    "argv,values",
    [
        (["--function", "xyz"], "0.000000000, 0.250000000"),
        (["--function", "svetlichny"], "0.000000000, 0.250000000"),
        (["--n", "5"], "0.000000000, 0.062500000"),
    ],
)
def test_multiparty(capsys, argv, values):
    code, out = run(capsys, "multiparty", *argv)
    assert code == 0
    assert "box check: pass" in out.out
    assert f"distinct probabilities: {values}" in out.out


def test_multiparty_capacity(capsys, monkeypatch):
    monkeypatch.setenv("NSBOX_MAX_QUBITS", "4")
    code, out = run(capsys, "multiparty", "--n", "5")
    assert code == 2
    assert "capacity" in out.err


def test_experiment_counts(capsys, tmp_path):
    out = tmp_path / "counts.csv"
    code, printed = run(capsys, "experiment", "--visibility", "0.9775", "--shots", "100000", "--seed", "4", "--out", str(out))
    assert code == 0
    assert "analytic S=3.910000000" in printed.out
    assert CountsTable.read_csv(out).total(1, 0) == 100000


def test_experiment_exact(capsys):
    code, out = run(capsys, "experiment", "--exact")
    assert code == 0
    assert out.out.strip() == "analytic S=4.000000000"


def test_experiment_source(capsys):
    v = 2.708 / (2 * math.sqrt(2))
    code, out = run(capsys, "experiment", "--resource", "source", "--visibility", repr(v), "--exact")
    assert "analytic S=2.708000000" in out.out


def test_behavior_dump_round_trips(capsys):
    code, out = run(capsys, "behavior-dump")
    assert code == 0
    assert np.array_equal(Behavior.from_json(out.out).table, pr_box().table)


def test_reproduce_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["--seed", "9", "--shots", "1000", "--grid", "12", "--random", "2"]
    assert main(["reproduce", "--out", str(a), *argv]) == 0
    assert main(["reproduce", "--out", str(b), *argv]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
