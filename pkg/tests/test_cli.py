import json
import os
import subprocess
import sys

import pytest

from towerlim.cli import dispatch, main
from towerlim.report import validate_report
from towerlim.towerfile import (
    ParseError,
    UnresolvedReference,
    dump_tower,
    parse,
    parse_text,
    serialize,
)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def fixture(name):
    return os.path.join(ROOT, "towers", name)


class TestParser:
    def test_solenoid_fixture(self):
        doc = parse(fixture("solenoid_2.tower"))
        t = doc.towers["main"]
        assert t.tail_group.smith_invariants == (1, [])
        assert t.tail_endo.matrix.data == ((2,),)
        assert "milnor" in doc.ses
        assert doc.stowers["shape"].family == "solenoid"

    def test_undefined_map_reference(self):
        text = "[group Zg]\ngenerators = 1\n[tower t]\ntail_group = Zg\ntail_endo = nope\n"
        with pytest.raises(UnresolvedReference):
            parse_text(text)

    def test_empty_file(self):
        with pytest.raises(ParseError):
            parse_text("")

    def test_unknown_key_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_text("[group G]\ngenerators = 1\ncolour = blue\n")
        assert err.value.line == 3

    def test_unknown_section_rejected(self):
        with pytest.raises(ParseError):
            parse_text("[wibble w]\n")

    def test_bad_matrix_entry(self):
        with pytest.raises(ParseError):
            parse_text("[group G]\ngenerators = 1\nrelations = [x]\n")

    def test_relator_rows_are_relators(self):
        doc = parse_text("[group G]\ngenerators = 2\nrelations = [2 0; 0 3]\n")
        assert doc.groups["G"].smith_invariants == (0, [6])

    def test_round_trip(self):
        for name in ("solenoid_2.tower", "hawaiian.tower", "compare_2_3.tower"):
            doc = parse(fixture(name))
            text = serialize(doc)
            doc2 = parse_text(text)
            assert doc2.sections == doc.sections
            assert serialize(doc2) == text

    def test_dump_tower_replayable(self):
        from towerlim.exactlat import cyclic_group, free_group, hom_make
        from towerlim.towers import periodic_tower
        Z = free_group(1)
        Z2 = cyclic_group(2)
        t = periodic_tower([Z2], [], Z, hom_make(Z, Z, [[6]]),
                           splice=hom_make(Z, Z2, [[1]]))
        doc = parse_text(dump_tower(t))
        back = doc.towers["main"]
        assert back.tail_endo.matrix == t.tail_endo.matrix
        assert back.prefix_groups[0].smith_invariants == (0, [2])


class TestDispatch:
    def test_lim1_solenoid(self):
        code, report, text = dispatch(["lim1", fixture("solenoid_2.tower")])
        assert code == 0
        assert report["result"]["tag"] == "completion_quotient"
        assert "Z_2/Z" in text and "uncountable" in text

    def test_lim_zero(self):
        code, report, text = dispatch(["lim", fixture("solenoid_2.tower")])
        assert code == 0 and report["result"]["is_trivial"]

    def test_steenrod_json_fields(self):
        code, report, _ = dispatch(
            ["steenrod", fixture("hawaiian.tower"), "--degree", "1", "--json"])
        assert code == 0
        assert report["result"]["lim_part"]["tag"] == "full_product"
        assert report["result"]["lim1_part"]["is_trivial"]

    def test_six_term_joints(self):
        code, report, _ = dispatch(["six-term", fixture("solenoid_2.tower")])
        assert code == 0
        joints = dict(j.split(":") for j in report["verified_joints"])
        assert joints["lim_sub"] == "verified"
        assert joints["lim_total"] == "verified"

    def test_lab_exit_zero(self):
        code, report, text = dispatch(
            ["lab", "--suite", "ml_equiv", "--seed", "42", "--trials", "10"])
        assert code == 0
        assert report["result"]["failed"] == 0

    def test_telescope(self):
        code, report, _ = dispatch(
            ["telescope", fixture("solenoid_2.tower"), "--m", "2"])
        assert code == 0
        assert report["result"]["retracts_to_level0"]

    def test_reports_validate(self):
        for argv in (["lim1", fixture("solenoid_2.tower")],
                     ["ml", fixture("solenoid_2.tower")],
                     ["cech", fixture("solenoid_2.tower"), "--degree", "1"],
                     ["compare", fixture("compare_2_3.tower"),
                      "--a", "two", "--b", "three"]):
            _, report, _ = dispatch(argv)
            assert validate_report(report) == []


class TestExitCodes:
    def test_parse_error_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.tower"
        bad.write_text("[group G]\ngenerators = one\n")
        assert main(["lim", str(bad)]) == 2

    def test_missing_file_is_2(self):
        assert main(["lim", "/nonexistent/x.tower"]) == 2

    def test_ill_defined_is_4(self, tmp_path):
        bad = tmp_path / "bad.tower"
        bad.write_text("[group Z2]\ngenerators = 1\nrelations = [2]\n"
                       "[group Z4]\ngenerators = 1\nrelations = [4]\n"
                       "[map m]\nsource = Z2\ntarget = Z4\nmatrix = [1]\n")
        assert main(["lim", str(bad)]) == 4

    def test_unresolved_is_2(self):
        assert main(["lim", fixture("compare_2_3.tower"), "--tower", "nope"]) == 2

    def test_json_to_stdout(self, capsys):
        assert main(["lim1", fixture("solenoid_2.tower"), "--json"]) == 0
        out = capsys.readouterr().out
        parsed = json.loads(out)
        assert parsed["task"] == "lim1"

    def test_depth_limited_is_3(self):
        assert main(["cech", fixture("hawaiian.tower"), "--degree", "1"]) == 3


class TestGoldenReports:
    @pytest.mark.parametrize("argv,name", [
        (["lim1", "towers/solenoid_2.tower", "--json"], "lim1_solenoid_2"),
        (["steenrod", "towers/hawaiian.tower", "--degree", "1", "--json"],
         "steenrod_hawaiian_1"),
        (["six-term", "towers/solenoid_2.tower", "--json"], "six_term_solenoid_2"),
        (["compare", "towers/compare_2_3.tower", "--a", "two", "--b", "three",
          "--json"], "compare_2_3"),
    ])
    def test_byte_for_byte(self, argv, name):
        from towerlim.report import report_json
        argv = [a if not a.startswith("towers/") else os.path.join(ROOT, a)
                for a in argv]
        _, report, _ = dispatch(argv)
        with open(os.path.join(ROOT, "tests", "golden", name + ".json"), "rb") as fh:
            golden = fh.read()
        assert report_json(report).encode("utf-8") == golden

    def test_golden_reports_validate(self):
        gdir = os.path.join(ROOT, "tests", "golden")
        for name in os.listdir(gdir):
            with open(os.path.join(gdir, name)) as fh:
                assert validate_report(json.load(fh)) == []


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "towerlim.cli", "lim1",
         os.path.join(ROOT, "towers", "solenoid_3.tower")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "Z_3/Z" in proc.stdout
