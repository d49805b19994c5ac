import json

import pytest

from polarkit.cli import main, parse_args


def run(argv):
    return main(argv)


def test_parse_args_analyze():
    ns = parse_args(
        ["analyze", "--kernel", "100,110,011", "--eps", "0.5", "--depth", "7",
         "--out", "spectrum.csv"]
    )
    assert ns.command == "analyze"
    assert ns.depth == 7


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        parse_args(["analyze", "--kernel", "10,11", "--depth", "2", "--bogus"])
    assert exc.value.code == 2


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        parse_args([])
    assert exc.value.code == 2


def test_bad_kernel_text_exits_2(capsys):
    assert run(["analyze", "--kernel", "10,1X", "--depth", "2"]) == 2


def test_bad_eps_exits_2():
    assert run(["analyze", "--kernel", "10,11", "--eps", "1.5", "--depth", "2"]) == 2


def test_budget_exceeded_exits_3():
    assert run(["analyze", "--kernel", "10,11", "--depth", "60"]) == 3


def test_analyze_writes_spectrum(tmp_path, capsys):
    out = tmp_path / "spectrum.csv"
    assert run(
        ["analyze", "--kernel", "100,110,011", "--eps", "0.5", "--depth", "7",
         "--out", str(out)]
    ) == 0
    assert "N=2187" in capsys.readouterr().out
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "index,erasure_prob,capacity"
    assert len(lines) == 2188
    idx, z, cap = lines[1].split(",")
    assert idx == "0"
    assert float(z) + float(cap) == pytest.approx(1.0, abs=1e-12)


def test_survey_small_family(tmp_path, capsys):
    out = tmp_path / "survey.csv"
    assert run(
        ["survey", "--size", "3", "--family", "lower_triangular_unit_diagonal",
         "--eps", "0.5", "--depth", "7", "--out", str(out)]
    ) == 0
    assert "groups=3" in capsys.readouterr().out
    assert len(out.read_text().strip().split("\n")) == 9


def test_exponent_command(capsys):
    assert run(["exponent", "--kernel", "100,110,011", "--kernel", "10,10"]) == 0
    out = capsys.readouterr().out
    assert "exponent=0.420619835714" in out
    assert "singular" in out


def test_bound_command(tmp_path, capsys):
    out = tmp_path / "bounds.csv"
    assert run(
        ["bound", "--kernel", "10,11", "--eps", "0.5", "--depth", "10",
         "--rates", "0.1,0.2,0.3,0.4,0.5", "--out", str(out)]
    ) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "rate,K,bound"
    assert len(lines) == 6
    assert lines[1].split(",")[1] == "102"  # K = round(0.1 * 1024)


def test_construct_and_simulate_round_trip(tmp_path, capsys):
    code_path = tmp_path / "code.json"
    assert run(
        ["construct", "--kernel", "1000,1001,0101,1111", "--depth", "2",
         "--rate", "0.25", "--eps", "0.5", "--out", str(code_path)]
    ) == 0
    doc = json.loads(code_path.read_text())
    assert doc["depth"] == 2
    assert doc["frozen_mask"].count("0") == 4
    sim_path = tmp_path / "sim.csv"
    assert run(
        ["simulate", "--code", str(code_path), "--eps", "0.5,0.4",
         "--seed", "9", "--min-frame-errors", "10", "--max-trials", "500",
         "--out", str(sim_path)]
    ) == 0
    lines = sim_path.read_text().strip().split("\n")
    assert len(lines) == 3


def test_simulate_reproducible_csv(tmp_path):
    args = ["simulate", "--kernel", "10,11", "--depth", "5", "--rate", "0.5",
            "--eps", "0.5", "--seed", "31", "--min-frame-errors", "20",
            "--max-trials", "400"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_requires_code_or_kernel():
    assert run(["simulate", "--eps", "0.5"]) == 2


def test_simulate_missing_code_file(tmp_path):
    assert run(["simulate", "--code", str(tmp_path / "nope.json"),
                "--eps", "0.5"]) == 2


def test_oracle_check_ok(capsys):
    assert run(["oracle-check", "--kernel", "100,110,011"]) == 0
    assert "ok" in capsys.readouterr().out


def test_out_dir_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("POLARKIT_OUT_DIR", str(tmp_path))
    assert run(["bound", "--kernel", "10,11", "--depth", "3",
                "--rates", "0.5", "--out", "rel.csv"]) == 0
    assert (tmp_path / "rel.csv").exists()


def test_construct_rejects_singular_kernel(tmp_path):
    assert run(["construct", "--kernel", "10,10", "--depth", "2",
                "--rate", "0.5", "--out", str(tmp_path / "c.json")]) == 2


def test_no_partial_file_on_failed_write(tmp_path):
    target_dir = tmp_path / "ro"
    target_dir.mkdir()
    blocker = target_dir / "bounds.csv"
    blocker.mkdir()  # directory at the target path forces the rename to fail
    rc = run(["bound", "--kernel", "10,11", "--depth", "3", "--rates", "0.5",
              "--out", str(blocker)])
    assert rc == 3
    assert not any(p.is_file() for p in target_dir.iterdir())
