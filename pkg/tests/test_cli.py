import json
import xml.etree.ElementTree as ET

import pytest

from multidendro.cli import main

TOY_NEWICK = "((x1,x2,x3)[2.000,4.000],x4)[5.000,5.000];"


def run_cli(capsys, *args):
    rc = main(list(args))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_newick_output(toy_file, capsys):
    rc, out, err = run_cli(capsys, "--input", str(toy_file),
                           "--method", "unweighted_average")
    assert rc == 0
    assert out == TOY_NEWICK + "\n"


def test_records_output(toy_file, capsys):
    rc, out, _ = run_cli(capsys, "--input", str(toy_file),
                         "--method", "unweighted_average",
                         "--output", "records")
    assert rc == 0
    doc = json.loads(out)
    assert doc["format_version"] == "1"
    assert doc["method"] == "unweighted_average"
    assert len(doc["merges"]) == 2
    assert doc["trace"]["iterations"][0]["d_lower"] == 2.0


def test_text_output(toy_file, capsys):
    rc, out, _ = run_cli(capsys, "--input", str(toy_file),
                         "--method", "unweighted_average",
                         "--output", "text")
    assert rc == 0
    assert "[2..4]" in out


def test_svg_output(toy_file, capsys):
    rc, out, _ = run_cli(capsys, "--input", str(toy_file),
                         "--method", "unweighted_average",
                         "--output", "svg")
    assert rc == 0
    ET.fromstring(out)


def test_enumerate_lists_all_outcomes(toy_file, capsys):
    rc, out, err = run_cli(capsys, "--input", str(toy_file),
                           "--method", "unweighted_average", "--enumerate")
    assert rc == 0
    lines = out.splitlines()
    assert len(lines) == 3
    assert lines == sorted(lines)
    assert "3 distinct outcome(s)" in err


def test_reversal_exit_code(toy_file, capsys):
    rc, out, _ = run_cli(capsys, "--input", str(toy_file),
                         "--method", "single")
    assert rc == 2
    assert out.endswith(";\n")


def test_tiebreak_first(toy_file, capsys):
    rc, out, _ = run_cli(capsys, "--input", str(toy_file),
                         "--method", "unweighted_average",
                         "--tiebreak", "first")
    assert rc == 0
    assert out == ("((x1,x2)[2.000,2.000],(x3,x4)[3.000,3.000])"
                   "[4.500,4.500];\n")


def test_tiebreak_random_is_seeded(toy_file, capsys):
    rc1, out1, _ = run_cli(capsys, "--input", str(toy_file),
                           "--method", "unweighted_average",
                           "--tiebreak", "random", "--seed", "11")
    rc2, out2, _ = run_cli(capsys, "--input", str(toy_file),
                           "--method", "unweighted_average",
                           "--tiebreak", "random", "--seed", "11")
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_seed_requires_random_rule(toy_file, capsys):
    rc, _, err = run_cli(capsys, "--input", str(toy_file),
                         "--method", "single", "--seed", "4")
    assert rc == 1
    assert err.startswith("error:")


def test_enumerate_excludes_tiebreak(toy_file, capsys):
    rc, _, err = run_cli(capsys, "--input", str(toy_file),
                         "--method", "single", "--enumerate",
                         "--tiebreak", "first")
    assert rc == 1
    assert "error:" in err


def test_missing_input_file(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "--input", str(tmp_path / "nope.txt"),
                         "--method", "single")
    assert rc == 1
    assert err.startswith("error:")


def test_unknown_method_rejected(toy_file, capsys):
    rc, _, err = run_cli(capsys, "--input", str(toy_file),
                         "--method", "median")
    assert rc == 1
    assert "usage" in err


def test_help_exits_zero(capsys):
    rc, out, _ = run_cli(capsys, "--help")
    assert rc == 0
    assert "usage" in out


def test_similarity_flow(tmp_path, capsys):
    path = tmp_path / "sim.txt"
    path.write_text("1.0 0.9 0.2\n0.9 1.0 0.4\n0.2 0.4 1.0\n")
    rc, out, _ = run_cli(capsys, "--input", str(path),
                         "--method", "single", "--similarity")
    assert rc == 0
    assert out == "((x1,x2)[0.100,0.100],x3)[0.600,0.600];\n"


def test_precision_flag_changes_ties(tmp_path, capsys):
    path = tmp_path / "close.txt"
    path.write_text("0 2.04 9\n2.04 0 1.96\n9 1.96 0\n")
    rc, raw_out, _ = run_cli(capsys, "--input", str(path),
                             "--method", "single")
    assert rc == 0
    assert raw_out == "(x1,(x2,x3)[1.960,1.960])[2.040,2.040];\n"

    rc, rounded_out, _ = run_cli(capsys, "--input", str(path),
                                 "--method", "single", "--precision", "1")
    assert rc == 0  # single wide merge, nothing above it to invert
    assert rounded_out == "(x1,x2,x3)[2.000,9.000];\n"


def test_pairs_format(tmp_path, capsys):
    path = tmp_path / "pairs.txt"
    path.write_text("1 2 2\n1 3 4\n1 4 7\n2 3 2\n2 4 5\n3 4 3\n")
    rc, out, _ = run_cli(capsys, "--input", str(path),
                         "--format", "pairs",
                         "--method", "unweighted_average")
    assert rc == 0
    assert out == TOY_NEWICK + "\n"


def test_enumeration_limit_is_enforced(tmp_path, capsys):
    n = 7
    rows = [" ".join("0" if i == j else "1" for j in range(n))
            for i in range(n)]
    path = tmp_path / "flat.txt"
    path.write_text("\n".join(rows) + "\n")
    rc, _, err = run_cli(capsys, "--input", str(path),
                         "--method", "single", "--enumerate",
                         "--limit", "5")
    assert rc == 1
    assert "error:" in err


def test_alpha_flag(tmp_path, capsys):
    path = tmp_path / "two.txt"
    path.write_text("0 9\n9 0\n")
    rc, out, _ = run_cli(capsys, "--input", str(path),
                         "--method", "joint_between_within",
                         "--alpha", "2.0")
    assert rc == 0
    assert out == "(x1,x2)[9.000,9.000];\n"
