import json

import pytest

from jacobipoly.cli import main
from jacobipoly.families import family_ids


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_all(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == len(family_ids())
    assert any(l.startswith("krawtchouk (finite, self-dual)") for l in lines)
    assert any(l.startswith("hahn (finite, dual: dual_hahn)") for l in lines)


def test_list_json_filtered(capsys):
    code, out, _ = run(capsys, "list", "--json", "--filter", "infinite")
    assert code == 0
    ids = [m["id"] for m in json.loads(out)["data"]]
    assert ids == family_ids("infinite")


def test_table_phi0sq_charlier(capsys):
    code, out, _ = run(capsys, "table", "charlier", "a=1", "--quantities", "phi0sq", "--xmax", "3")
    assert code == 0
    rows = [l.split(",") for l in out.strip().splitlines()]
    assert rows[0] == ["x", "phi0sq"]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([1, 1, 0.5, 1 / 6], rel=1e-11)


def test_table_P_krawtchouk(capsys):
    code, out, _ = run(capsys, "table", "krawtchouk", "p=0.5", "N=2", "--quantities", "P")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x,P0,P1,P2"
    assert len(lines) == 4


def test_table_json_round_trip(capsys):
    code, out, _ = run(capsys, "table", "meixner", "beta=1.5", "c=0.4", "--quantities", "B", "D",
                       "--xmax", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "data"}
    assert doc["meta"]["family"] == "meixner"


def test_table_spectral_quantities(capsys):
    code, out, _ = run(capsys, "table", "charlier", "a=1", "--quantities", "E", "A", "C", "--nmax", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[1:] == ["E", "A", "C"]
    assert lines[1].startswith("0,0,")


def test_mixed_quantities_rejected(capsys):
    code, _, err = run(capsys, "table", "charlier", "a=1", "--quantities", "B", "E")
    assert code == 2 and "error" in err


def test_parameter_violation_exit_2(capsys):
    code, _, err = run(capsys, "table", "krawtchouk", "p=2", "N=3")
    assert code == 2
    assert "krawtchouk: 0<p<1 violated" in err


def test_unknown_family_exit_2(capsys):
    code, _, _ = run(capsys, "table", "jacobi", "a=1")
    assert code == 2


def test_bad_assignment_exit_2(capsys):
    code, _, _ = run(capsys, "table", "charlier", "a")
    assert code == 2


def test_unknown_flag_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["list", "--bogus"])
    assert exc.value.code == 2


def test_verify_single_family(capsys):
    code, out, _ = run(capsys, "verify", "krawtchouk", "--suites", "factorization,spectrum")
    assert code == 0
    assert "0 fail" in out.strip().splitlines()[-1]


def test_verify_json_and_point(capsys):
    code, out, _ = run(capsys, "verify", "charlier", "a=1.5", "--suites", "closure", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["ok"] is True
    assert {r["check"] for r in doc["data"]["records"]} >= {"closure", "closure_negative_control"}


def test_verify_failure_exit_1(capsys):
    # a tolerance no residual can meet
    code, out, _ = run(capsys, "verify", "krawtchouk", "--suites", "closure",
                       "--tol", "closure_negative_control=1e6", "--failures-only")
    assert code == 1
    assert "closure_negative_control" in out


def test_verify_unknown_suite_exit_2(capsys):
    code, _, _ = run(capsys, "verify", "krawtchouk", "--suites", "nonsense")
    assert code == 2


def test_verify_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("JACOBIPOLY_RTOL", "1e-30")
    code, _, _ = run(capsys, "verify", "krawtchouk", "p=0.3", "N=5", "--suites", "closure")
    assert code == 1
    monkeypatch.setenv("JACOBIPOLY_RTOL", "junk")
    code, _, _ = run(capsys, "verify", "krawtchouk", "--suites", "closure")
    assert code == 2


def test_verify_custom_bd_file(capsys, tmp_path):
    path = tmp_path / "bd.csv"
    path.write_text("B,D\n2,0\n1,1\n0,2\n")
    code, out, err = run(capsys, "verify", "custom", "--bd-file", str(path))
    assert code == 0
    assert err


def test_reconstruct_from_family(capsys):
    code, out, _ = run(capsys, "reconstruct", "--from-family", "charlier", "a=1", "--xmax", "5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    data = doc["data"]
    assert data["B"] == pytest.approx([1.0] * 6)
    assert data["D"] == pytest.approx(list(range(6)))


def test_reconstruct_text(capsys):
    code, out, _ = run(capsys, "reconstruct", "--from-family", "charlier", "a=1", "--xmax", "4")
    assert code == 0
    assert "linear" in out


def test_reconstruct_from_coefficients(capsys):
    args = ["reconstruct", "--r11", "0", "--r10", "1", "--r00", "0", "--rm12", "0", "--rm11", "1",
            "--rm10", "1", "--eta1", "1", "--B0", "1", "--xmax", "4", "--format", "csv"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    assert out.splitlines()[0].startswith("x,eta,a,B,D")


def test_reconstruct_unsupported_regime(capsys):
    args = ["reconstruct", "--r11", "-0.5", "--r10", "1", "--r00", "0", "--rm12", "0", "--rm11", "1",
            "--rm10", "1", "--eta1", "1", "--B0", "1"]
    code, _, err = run(capsys, *args)
    assert code == 2
    assert "unsupported regime" in err


def test_reconstruct_missing_and_inconsistent(capsys):
    code, _, err = run(capsys, "reconstruct", "--r11", "0")
    assert code == 2 and "--r10" in err
    args = ["reconstruct", "--r11", "0", "--r10", "1", "--r01", "5", "--r00", "0", "--rm12", "0",
            "--rm11", "1", "--rm10", "1", "--eta1", "1", "--B0", "1"]
    code, _, _ = run(capsys, *args)
    assert code == 2
