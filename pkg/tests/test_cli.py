import json
import subprocess
import sys

import pytest

from goodpair.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, main

from conftest import M24_ROWS, M37_ROWS

FAST = ["--max-boxes", "20000", "--max-depth", "14", "--samples", "64"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


@pytest.fixture
def m37_file(tmp_path):
    return write(tmp_path, "m37.json", {"l": 3, "n": 7, "entries": M37_ROWS})


class TestVerify:
    def test_m37(self, capsys, tmp_path, m37_file):
        cert = tmp_path / "cert.json"
        code, out, err = run(capsys, "verify", "--matrix", m37_file, "--certificate-out", str(cert), *FAST)
        rep = json.loads(out)
        assert code == EXIT_OK
        assert rep["verdict"]["kind"] == "PositiveDefinite"
        assert rep["degree"] == 4 and rep["obstruction"] == "Passes"
        assert rep["det"] == "z1^4+2*z1^2*z2^2+z2^4+4*z3^4"
        assert json.loads(cert.read_text())["kind"] == "PositiveDefinite"
        assert "det =" in err

    def test_m24(self, capsys, tmp_path):
        f = write(tmp_path, "m24.json", {"l": 2, "n": 4, "entries": M24_ROWS})
        code, out, _ = run(capsys, "verify", "--matrix", f, *FAST)
        assert code == EXIT_OK
        assert json.loads(out)["verdict"]["kind"] == "NegativeDefinite"

    def test_zero_row(self, capsys, tmp_path):
        f = write(tmp_path, "z.json", {"l": 2, "entries": [[0, 0], [0, "z1"]]})
        code, out, _ = run(capsys, "verify", "--matrix", f, *FAST)
        assert code == EXIT_NEGATIVE
        assert json.loads(out)["verdict"]["kind"] == "IdenticallyZero"

    def test_indefinite(self, capsys, tmp_path):
        f = write(tmp_path, "i.json", {"l": 2, "entries": [["z1", 0], [0, "z2"]]})
        code, _, _ = run(capsys, "verify", "--matrix", f, *FAST)
        assert code == EXIT_NEGATIVE

    def test_malformed_json(self, capsys, tmp_path):
        f = write(tmp_path, "bad.json", '{"l": 2,\n "entries": [[1, 2]')
        code, _, err = run(capsys, "verify", "--matrix", f)
        assert code == EXIT_INPUT
        assert "line 2" in err and "column" in err

    def test_asymmetric(self, capsys, tmp_path):
        f = write(tmp_path, "a.json", {"l": 2, "entries": [["z1", "z2"], ["-z2", "z1"]]})
        code, _, err = run(capsys, "verify", "--matrix", f)
        assert code == EXIT_INPUT and "symmetric" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", "--matrix", str(tmp_path / "nope.json"))
        assert code == EXIT_INPUT


class TestSearch:
    def test_two_four(self, capsys, tmp_path):
        out_dir = tmp_path / "out"
        code, out, err = run(capsys, "search", "2", "4", "--out", str(out_dir), *FAST)
        assert code == EXIT_OK
        summary = json.loads(out)
        assert summary["exhaustive"] and summary["accepted"] >= 1
        lines = (out_dir / "candidates.jsonl").read_text().splitlines()
        assert len(lines) == summary["accepted"]
        assert json.loads((out_dir / "summary.json").read_text())["exhaustive"]
        assert "exhaustive: True" in err

    def test_obstruction_refusal(self, capsys):
        code, _, err = run(capsys, "search", "2", "5")
        assert code == EXIT_USAGE and "Obstruction 1" in err
        code, _, err = run(capsys, "search", "3", "5")
        assert code == EXIT_USAGE and "Obstruction 2" in err

    def test_forced(self, capsys):
        code, out, _ = run(capsys, "search", "2", "5", "--force", *FAST)
        rep = json.loads(out)
        assert code == EXIT_OK and rep["accepted"] == 0 and rep["exhaustive"]

    def test_randomized_reports_no_exhaustiveness(self, capsys):
        code, out, _ = run(capsys, "search", "3", "9", "--mode", "randomized", "--max-candidates", "30",
                           "--seed", "2", *FAST)
        rep = json.loads(out)
        assert code == EXIT_UNKNOWN
        assert rep["exhaustive"] is False and rep["truncated"]
        assert "unknown" in rep

    def test_deterministic_output(self, capsys):
        args = ["search", "2", "6", "--mode", "randomized", "--max-candidates", "100", "--seed", "7", *FAST]
        _, a, _ = run(capsys, *args)
        _, b, _ = run(capsys, *args)
        assert a == b

    def test_bad_pair(self, capsys):
        code, _, _ = run(capsys, "search", "3", "3")
        assert code == EXIT_USAGE


class TestConstructAndCheck:
    def test_round_trip(self, capsys, tmp_path, m37_file):
        man = tmp_path / "m37_manifold.json"
        code, out, err = run(capsys, "construct", "--matrix", m37_file, "--out", str(man), "--label", "M37")
        assert code == EXIT_OK
        spec = json.loads(man.read_text())
        assert spec["n"] == 7 and spec["l"] == 3 and spec["label"] == "M37"
        assert "g1 = 1/2*x1^2" in err
        code, out, _ = run(capsys, "check2", "--manifold", str(man), *FAST)
        assert code == EXIT_OK
        assert json.loads(out)["verdict"]["kind"] == "PositiveDefinite"

    def test_custom_forms(self, capsys, tmp_path):
        f = write(tmp_path, "m24.json", {"l": 2, "n": 4, "entries": M24_ROWS})
        man = tmp_path / "man.json"
        code, _, _ = run(capsys, "construct", "--matrix", f, "--L", "1,1;0,1", "--out", str(man))
        assert code == EXIT_OK
        code, out, _ = run(capsys, "check2", "--manifold", str(man), *FAST)
        rep = json.loads(out)
        assert rep["det"] == "-s1^2-2*s1*s2-2*s2^2"
        assert rep["coefficients_2x2"]["criterion_holds"]
        code, _, _ = run(capsys, "construct", "--matrix", f, "--L", "1,1;2,2")
        assert code == EXIT_INPUT
        code, _, _ = run(capsys, "construct", "--matrix", f, "--L", "1,1")
        assert code == EXIT_USAGE

    def test_m_delta_zero(self, capsys, tmp_path):
        spec = {"n": 4, "l": 2, "label": "flat",
                "hessians": [[[2, 0], [0, -2]], [[2, 0], [0, -2]]]}
        f = write(tmp_path, "flat.json", spec)
        code, out, _ = run(capsys, "check2", "--manifold", f, *FAST)
        rep = json.loads(out)
        assert code == EXIT_NEGATIVE
        assert rep["coefficients_2x2"]["criterion_holds"] is False


class TestAnalyze:
    def test_classifications(self, capsys):
        for s, kind in (("5", "Convergent"), ("3", "Divergent"), ("4", "Critical")):
            code, out, _ = run(capsys, "analyze", "--n", "7", "--l", "3", "--tau", "7", "--s", s)
            rep = json.loads(out)
            assert code == EXIT_OK and rep["classification"] == kind and rep["s_star"] == "4"

    def test_shells(self, capsys):
        code, out, _ = run(capsys, "analyze", "--n", "7", "--l", "3", "--tau", "7", "--s", "5", "--qmax", "20")
        rep = json.loads(out)
        assert [s["Q"] for s in rep["shells"]] == [1, 2, 4, 8, 16, 20]
        assert rep["shells"][0]["partial_sum"] == 3**7 - 1

    def test_invalid(self, capsys):
        code, _, _ = run(capsys, "analyze", "--n", "7", "--l", "3", "--tau", "5", "--s", "1")
        assert code == EXIT_USAGE


class TestCover:
    def test_slab(self, capsys):
        code, out, _ = run(capsys, "cover", "--slab", "2", "--delta-ladder", "3:7")
        rep = json.loads(out)
        assert code == EXIT_OK and abs(rep["slope"] - 1) < 0.1

    def test_manifold_with_enforce(self, capsys, tmp_path):
        spec = {"n": 4, "l": 2, "hessians": [[[2, 1], [1, -2]], [[2, 0], [0, -2]]]}
        f = write(tmp_path, "md.json", spec)
        code, out, _ = run(capsys, "cover", "--manifold", f, "--delta-ladder", "3:6")
        assert code == EXIT_OK and not json.loads(out)["precondition"]["holds"]
        code, _, err = run(capsys, "cover", "--manifold", f, "--delta-ladder", "3:6", "--enforce")
        assert code == EXIT_USAGE and "precondition" in err

    def test_usage(self, capsys):
        assert run(capsys, "cover")[0] == EXIT_USAGE
        assert run(capsys, "cover", "--slab", "2", "--delta-ladder", "x")[0] == EXIT_USAGE


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog", *FAST)
    rows = {r["label"]: r for r in json.loads(out)}
    assert code == EXIT_OK
    assert rows["M37"]["condition_I_range"] == [4, 6]
    assert rows["M_delta(delta=1)"]["condition_I"] == "(I) fails: dim 2"
    e2 = next(r for k, r in rows.items() if k.startswith("e2"))
    assert e2["condition_II"] == "PositiveDefinite"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["--workers", "0", "catalog"])
    assert e.value.code == EXIT_USAGE


def test_module_entry_point(m37_file):
    p = subprocess.run([sys.executable, "-m", "goodpair", "verify", "--matrix", m37_file, *FAST],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["verdict"]["kind"] == "PositiveDefinite"


def test_workers_env(monkeypatch, capsys):
    monkeypatch.setenv("GOODPAIR_WORKERS", "2")
    from goodpair.cli import build_parser

    assert build_parser().parse_args(["catalog"]).workers == 2
