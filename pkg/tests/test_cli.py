import json

import pytest

from eqih.cli import main
from eqih.fixtures import cone2, hopf
from eqih.model import save_model


@pytest.fixture()
def cone_file(tmp_path):
    path = tmp_path / "cone2.json"
    save_model(cone2(), str(path))
    return str(path)


@pytest.fixture()
def hopf_file(tmp_path):
    path = tmp_path / "hopf.json"
    save_model(hopf(), str(path))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBasicCommands:
    def test_validate_ok(self, capsys, cone_file):
        code, out, _ = run(capsys, "validate", cone_file, "--strict")
        report = json.loads(out)
        assert code == 0 and report["passed"]
        assert report["schema"] == "eqih-report/1"

    def test_validate_malformed_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        code, out, err = run(capsys, "validate", str(bad))
        assert code == 2 and not out
        assert json.loads(err)["error"] == "InputError"

    def test_cohomology(self, capsys, hopf_file):
        code, out, _ = run(capsys, "cohomology", hopf_file, "-p", "")
        report = json.loads(out)
        assert code == 0
        assert report["base_dims"] == [1, 0, 1]
        assert report["total_dims"] == [1, 0, 0, 1]

    def test_gysin(self, capsys, cone_file):
        code, out, _ = run(capsys, "gysin", cone_file, "-p", "apex=2")
        report = json.loads(out)
        assert code == 0
        assert report["gysin_les"]["exact"]
        assert report["cogysin_les"]["exact"]
        assert report["euler_maps"]["0"] == [["1"]]

    def test_equivariant_window_override(self, capsys, cone_file):
        code, out, _ = run(capsys, "equivariant", cone_file,
                           "-p", "apex=2", "--nu", "10")
        report = json.loads(out)
        assert code == 0 and report["window"] == 10
        assert len(report["dims"]) == 11

    def test_spectral_with_d3(self, capsys, cone_file):
        code, out, _ = run(capsys, "spectral", cone_file, "-p", "apex=2",
                           "--pages", "3", "--d3-check")
        report = json.loads(out)
        assert code == 0
        assert [pg["r"] for pg in report["pages"]] == [1, 2, 3]
        assert report["d3"]["all_equal"]

    def test_skjelbred(self, capsys, cone_file):
        code, out, _ = run(capsys, "skjelbred", cone_file)
        report = json.loads(out)
        assert code == 0 and report["sequence"]["exact"]

    def test_localize_with_cone_check(self, capsys, cone_file):
        code, out, _ = run(capsys, "localize", cone_file, "-p", "apex=2",
                           "--cone-check")
        report = json.loads(out)
        assert code == 0
        assert report["ranks"] == {"even": 1, "odd": 0}
        assert report["cone"]["match"]

    def test_human_mode(self, capsys, hopf_file):
        code, out, _ = run(capsys, "cohomology", hopf_file, "-p", "",
                           "--human")
        assert code == 0
        assert "base_dims" in out
        with pytest.raises(json.JSONDecodeError):
            json.loads(out)


class TestCompare:
    def test_identity_compare(self, capsys, tmp_path, hopf_file):
        iso = tmp_path / "iso.json"
        iso.write_text(json.dumps({
            "mats": {"0": [["1"]], "1": [], "2": [["1"]], "3": [["1"]]},
            "strata": {},
        }))
        code, out, _ = run(capsys, "compare", hopf_file, hopf_file,
                           "--iso", str(iso))
        report = json.loads(out)
        assert code == 0
        assert report["optimal"] and report["related"]
        assert report["consequences"]["all_equal"]

    def test_bad_iso_exits_2(self, capsys, tmp_path, hopf_file):
        iso = tmp_path / "iso.json"
        iso.write_text(json.dumps({"mats": {"0": [["0"]]}, "strata": {}}))
        code, _, err = run(capsys, "compare", hopf_file, hopf_file,
                           "--iso", str(iso))
        assert code == 2
        assert json.loads(err)["error"] == "InvalidIso"


class TestFixtureCommand:
    def test_roundtrip(self, capsys, tmp_path):
        out_path = tmp_path / "m.json"
        code, _, _ = run(capsys, "fixture", "cone2", "-o", str(out_path))
        assert code == 0
        code, out, _ = run(capsys, "validate", str(out_path), "--strict")
        assert code == 0 and json.loads(out)["passed"]

    def test_random_deterministic(self, capsys):
        code, out1, _ = run(capsys, "fixture", "random", "--seed", "7")
        code2, out2, _ = run(capsys, "fixture", "random", "--seed", "7")
        assert code == code2 == 0 and out1 == out2

    def test_unknown_name_exits_2(self, capsys):
        code, _, err = run(capsys, "fixture", "nope")
        assert code == 2


class TestErrors:
    def test_bad_perversity_syntax(self, capsys, cone_file):
        code, _, err = run(capsys, "cohomology", cone_file, "-p", "apex")
        assert code == 2
        assert json.loads(err)["error"] == "InputError"

    def test_unknown_stratum(self, capsys, cone_file):
        code, _, err = run(capsys, "cohomology", cone_file, "-p", "nope=1")
        assert code == 2

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "validate", "/nonexistent/model.json")
        assert code == 2


class TestDeterminism:
    def test_reports_byte_identical(self, capsys, cone_file):
        _, out1, _ = run(capsys, "spectral", cone_file, "-p", "apex=1")
        _, out2, _ = run(capsys, "spectral", cone_file, "-p", "apex=1")
        assert out1 == out2


class TestSelftest:
    def test_small_selftest(self, capsys):
        code, out, _ = run(capsys, "selftest", "--seeds", "2")
        report = json.loads(out)
        assert code == 0 and report["passed"]
        assert report["checks"]["models"] == 6
