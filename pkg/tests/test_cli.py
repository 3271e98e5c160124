import json

import pytest

from recur.cli import main

NEWARCH_TEXT = (
    "X[i] = (1 + W[i])*X[i-1] - W[i-1]*X[i-2]\n"
    "X[1] = (1 + W[1])*X[0]\n"
    "X[0] = input\n"
)
EQ22_TEXT = "X[q] = W[q]*X[q-1] + X[0]\nX[1] = (1 + W[1])*X[0]\nX[0] = input\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_census_binomial_example(capsys):
    code, out, _ = run(
        capsys, "census", "--builtin", "resnet",
        "--depth", "5", "--wrt", "0", "--check", "binomial",
    )
    assert code == 0
    assert "census {0: 1, 1: 5, 2: 10, 3: 10, 4: 5, 5: 1}" in out
    assert "PASS" in out


def test_census_check_failure_exits_one(capsys):
    code, out, _ = run(
        capsys, "census", "--builtin", "newarch",
        "--depth", "5", "--wrt", "0", "--check", "binomial",
    )
    assert code == 1
    assert "FAIL" in out


def test_equiv_files(tmp_path, capsys):
    a = tmp_path / "newarch.rf"
    b = tmp_path / "eq22.rf"
    a.write_text(NEWARCH_TEXT)
    b.write_text(EQ22_TEXT)
    code, out, _ = run(capsys, "equiv", str(a), str(b), "--depth", "6")
    assert code == 0
    assert "equivalent" in out
    code, out, _ = run(capsys, "equiv", str(a), str(b), "--depth", "6", "--structural")
    assert code == 1
    assert "NOT isomorphic" in out


def test_equiv_builtin_names(capsys):
    code, out, _ = run(capsys, "equiv", "resnet", "chain", "--depth", "2")
    assert code == 1
    assert "NOT equivalent" in out


def test_stats_fixture_cd(capsys):
    code, out, _ = run(capsys, "stats", "table1", "--alpha", "0.05")
    assert code == 0
    assert "CD = 6.062" in out


def test_stats_graph_json(tmp_path, capsys):
    out_file = tmp_path / "graph.json"
    code, _, _ = run(
        capsys, "stats", "table1", "--alpha", "0.05", "--graph-json", str(out_file)
    )
    assert code == 0
    payload = json.loads(out_file.read_text())
    assert payload["cd"] == pytest.approx(6.062, abs=1e-9)
    assert payload["entries"][0]["method"] == "ResNet50s"


def test_stats_json_format(capsys):
    code, out, _ = run(capsys, "stats", "table1", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["friedman"]["df1"] == 7
    assert payload["nemenyi"]["cd"] == pytest.approx(6.062, abs=1e-9)


def test_parse_prints_canonical_form(tmp_path, capsys):
    f = tmp_path / "messy.rf"
    f.write_text("X[i]=X[i-1]+W[i]*X[i-1];X[0]=input")
    code, out, _ = run(capsys, "parse", str(f))
    assert code == 0
    assert out == "X[i] = (1 + W[i])*X[i-1]\nX[0] = input\n"


def test_parse_error_exits_two_with_position(tmp_path, capsys):
    f = tmp_path / "bad.rf"
    f.write_text("X[i] = W[i!*X[i-1]\nX[0] = input\n")
    code, out, err = run(capsys, "parse", str(f))
    assert code == 2
    assert "position" in err


def test_missing_file_exits_two(capsys):
    code, _, err = run(capsys, "parse", "no-such-file.rf")
    assert code == 2
    assert "error:" in err


def test_expand_text_and_json(capsys):
    code, out, _ = run(capsys, "expand", "--builtin", "chain", "--depth", "3")
    assert code == 0
    assert "W[3]*W[2]*W[1]" in out
    code, out, _ = run(
        capsys, "expand", "--builtin", "chain", "--depth", "3", "--format", "json"
    )
    payload = json.loads(out)
    assert payload["components"][0]["terms"] == [{"coeff": 1, "factors": [3, 2, 1]}]


def test_graph_dot_and_json(capsys):
    code, out, _ = run(capsys, "graph", "--builtin", "resnet", "--depth", "2")
    assert code == 0
    assert out.startswith('digraph "resnet"')
    code, out, _ = run(
        capsys, "graph", "--builtin", "resnet", "--depth", "2", "--format", "json"
    )
    payload = json.loads(out)
    assert payload["depth"] == 2


def test_graph_propagation_report(capsys):
    code, out, _ = run(
        capsys, "graph", "--builtin", "eq22", "--depth", "4",
        "--propagation", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert all(not p["has_direct_identity"] for p in payload["pairs"])
    assert all(p["cross_layer_sources"] == [0] for p in payload["pairs"])


def test_verify_affine(capsys):
    code, out, _ = run(
        capsys, "verify", "--builtin", "newarch",
        "--depth", "4", "--dim", "3", "--seeds", "2",
    )
    assert code == 0
    assert "FAIL" not in out


def test_verify_tanh(capsys):
    code, out, _ = run(
        capsys, "verify", "--builtin", "resnet",
        "--depth", "4", "--dim", "4", "--activation", "tanh",
    )
    assert code == 0


def test_verify_tanh_rejected_for_newarch(capsys):
    code, _, err = run(
        capsys, "verify", "--builtin", "newarch", "--activation", "tanh"
    )
    assert code == 2
    assert "tanh" in err


def test_chain_identity_command(capsys):
    code, out, _ = run(capsys, "chain-identity", "--builtin", "newarch", "--depth", "12")
    assert code == 0
    assert "PASS" in out
    code, out, _ = run(capsys, "chain-identity", "--builtin", "resnet", "--depth", "4")
    assert code == 1


def test_depth_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("RECUR_DEPTH_CAP", "4")
    code, _, err = run(capsys, "expand", "--builtin", "resnet", "--depth", "6")
    assert code == 2
    assert "cap" in err
    monkeypatch.setenv("RECUR_DEPTH_CAP", "30")
    code, _, _ = run(capsys, "expand", "--builtin", "resnet", "--depth", "6")
    assert code == 0


def test_byte_identical_output(capsys):
    args = ("census", "--builtin", "resnet", "--depth", "6", "--wrt", "1",
            "--format", "json")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second


def test_byte_identical_across_processes(tmp_path):
    import subprocess
    import sys

    args = [sys.executable, "-m", "recur.cli", "graph", "--builtin", "newarch",
            "--depth", "4", "--format", "json"]
    first = subprocess.run(args, capture_output=True, check=True)
    second = subprocess.run(args, capture_output=True, check=True)
    assert first.stdout == second.stdout


def test_help_exits_zero(capsys):
    for sub in ("parse", "expand", "census", "equiv", "graph", "verify",
                "chain-identity", "stats"):
        code, out, _ = run(capsys, sub, "--help")
        assert code == 0
        assert "usage" in out.lower()


def test_usage_error_exits_two(capsys):
    code, _, _ = run(capsys, "census", "--builtin", "not-a-builtin")
    assert code == 2


def test_invalid_values_exit_two(capsys):
    code, _, err = run(capsys, "expand", "--builtin", "resnet", "--depth", "0")
    assert code == 2 and "error:" in err
    code, _, err = run(capsys, "census", "--builtin", "resnet",
                       "--depth", "3", "--wrt", "9")
    assert code == 2 and "error:" in err
    code, _, err = run(capsys, "verify", "--builtin", "resnet", "--dim", "0")
    assert code == 2 and "error:" in err
