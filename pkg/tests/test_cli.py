import json

import pytest

from qpcocycles import cli

RPSI = {"alpha": "golden", "map": {"kind": "const", "matrix": [[0.0, -1.0], [1.0, 0.0]]}}


@pytest.fixture
def rpsi(tmp_path):
    p = tmp_path / "rpsi.json"
    p.write_text(json.dumps(RPSI))
    return str(p)


def test_cf_golden_gives_fibonacci(capsys):
    assert cli.main(["cf", "--alpha", "golden", "--depth", "20"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,a_k,p_k,q_k,beta_k,alpha_k"
    q = [int(line.split(",")[3]) for line in lines[1:]]
    assert q[:8] == [1, 1, 2, 3, 5, 8, 13, 21] and q[-1] == 10946


def test_invariants_on_quarter_rotation(rpsi, capsys):
    assert cli.main(["invariants", "--map", rpsi, "--param", "n=20000"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert float(rec["rotation"]) == pytest.approx(0.25, abs=1e-4)
    assert int(rec["degree"]) == 0


def test_outputs_written_and_deterministic(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["renorm", "--alpha", "silver", "--depth", "3", "--out", str(tmp_path / name)]) == 0
    a, b = (tmp_path / "a" / "renorm.csv").read_bytes(), (tmp_path / "b" / "renorm.csv").read_bytes()
    assert a == b
    env = json.loads((tmp_path / "a" / "renorm.json").read_text())
    assert set(env) == {"command", "config_digest", "rows", "diagnostics"}
    assert env["command"] == "renorm" and len(env["rows"]) == 4


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha": "silver", "depth": 3}))
    assert cli.main(["cf", "--config", str(cfg), "--depth", "5"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 7


def test_digest_tracks_config():
    a = cli.RunConfig("cf", alpha="golden", depth=4)
    b = cli.RunConfig("cf", alpha="golden", depth=5)
    assert a.digest() != b.digest()
    assert a.digest() == cli.RunConfig("cf", alpha="golden", depth=4, out="x").digest()


@pytest.mark.parametrize("argv", [
    ["cf", "--grid", "100"],
    ["cf", "--tol", "-1"],
    ["cf", "--alpha", "pi-ish"],
    ["cf", "--param", "novalue"],
])
def test_invalid_config_exit_code(argv, capsys):
    assert cli.main(argv) == 2
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_bad_map_document(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kind": "unknown"}))
    assert cli.main(["invariants", "--map", str(p)]) == 2


def test_module_error_is_command_failed(tmp_path, capsys):
    p = tmp_path / "deg.json"
    p.write_text(json.dumps({"kind": "rot_path", "r": 1}))
    assert cli.main(["reduce", "--map", str(p)]) == 3
    assert "COMMAND_FAILED" in capsys.readouterr().err


@pytest.mark.parametrize("command", ["reduce", "perturb", "destabilize"])
def test_small_commands_run(command, capsys):
    assert cli.main([command]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split(",") == cli.SCHEMAS[command]


def test_monitors_command(capsys):
    assert cli.main(["monitors", "--alpha", "fours", "--depth", "2"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 4


def test_zeta_scan_rows(tmp_path):
    assert cli.main(["zeta-scan", "--param", "betas=1", "--param", "radii=[0.9,0.99]", "--out", str(tmp_path)]) == 0
    env = json.loads((tmp_path / "zeta-scan.json").read_text())
    assert [r["r"] for r in env["rows"]] == [0.9, 0.99, 1.0]
    assert "rotation_spread" in env["diagnostics"]


def test_renorm_with_shift_selection(tmp_path):
    argv = ["renorm", "--alpha", "silver", "--depth", "2", "--param", "select_shift=true", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    env = json.loads((tmp_path / "renorm.json").read_text())
    assert env["diagnostics"]["nu_heuristic"] is True
