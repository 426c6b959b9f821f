import csv
import io
import json
import math

import pytest

from rigidemt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_emt_report(capsys):
    code, out, _ = run(capsys, "emt", "--shape", "disk")
    assert code == 0
    rep = json.loads(out)
    assert rep["entries"]["m1111"] == pytest.approx(4.5 * math.pi, rel=1e-12)
    assert len(rep["entries"]) == 16
    assert rep["closed_form"]["max_relative_difference"] < 1e-12
    assert set(rep["e_pairs"]) == {f"E({s},{i})" for s in (1, 2) for i in (1, 2, 3)}


def test_emt_degree_four_has_note(capsys, tmp_path):
    p = tmp_path / "quartic.json"
    p.write_text(json.dumps({"gamma": 1.0, "a": [[0, 0], [0.05, 0], [0, 0], [0, 0], [0.03, 0]]}))
    code, out, _ = run(capsys, "emt", "--shape", str(p))
    assert code == 0
    rep = json.loads(out)
    assert rep["closed_form"] is None and "degree 4" in rep["note"]


def test_emt_csv_and_out_file(capsys, tmp_path):
    target = tmp_path / "emt.csv"
    assert main(["emt", "--shape", "egg", "--format", "csv", "--out", str(target)]) == 0
    rows = list(csv.reader(target.open()))
    assert rows[0] == ["quantity", "value"] and rows[1][0] == "m1111"


def test_effective_sweep(capsys):
    code, out, _ = run(capsys, "effective", "--shape", "disk", "--cell-area", "10", "--fractions", "0:0.2:0.1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["f"]) for r in rows] == [0.0, 0.1, 0.2]
    assert float(rows[0]["C11"]) == 3.0 and float(rows[0]["C33"]) == 2.0


def test_effective_geometry_error(capsys):
    code, _, err = run(capsys, "effective", "--shape", "disk", "--cell-area", "1")
    assert code == 2 and "does not fit" in err


def test_field_marks_interior(capsys):
    code, out, _ = run(capsys, "field", "--shape", "ellipse", "--grid", "box:-2:2:-1:1:5:3", "--loading", "U2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    inside = [r for r in rows if r["interior"] == "1"]
    assert len(rows) == 15 and any(float(r["x"]) == 0 and float(r["y"]) == 0 for r in inside)


def test_field_ring_general_loading(capsys):
    code, out, _ = run(capsys, "field", "--shape", "egg", "--grid", "ring:2:8", "--loading", "1+0j,0.5j")
    assert code == 0 and len(out.splitlines()) == 9


def test_density_dump(capsys):
    code, out, _ = run(capsys, "density", "--shape", "disk", "--loading", "U2")
    assert code == 0
    assert json.loads(out)["c"]["-1"][0] == pytest.approx(-1.5)


def test_shapes(capsys, tmp_path):
    code, out, _ = run(capsys, "shapes")
    assert code == 0 and set(json.loads(out)) == {"disk", "ellipse", "egg", "trilobe"}
    assert main(["shapes", "--out", str(tmp_path / "presets")]) == 0
    assert (tmp_path / "presets" / "egg.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["emt", "--shape", "missing.json"],
        ["emt", "--shape", "disk", "--truncation", "0"],
        ["emt", "--shape", "disk", "--tol", "-1"],
        ["field", "--grid", "hex:1"],
        ["field", "--loading", "U9"],
        ["effective", "--shape", "disk", "--cell-area", "10", "--fractions", "0:1.5:0.5"],
    ],
)
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_invalid_material(capsys, tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"lambda": 1, "mu": -1}))
    code, _, err = run(capsys, "emt", "--material", str(p))
    assert code == 2 and "mu" in err


def test_self_intersecting_shape(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"gamma": 1.0, "a": [[0, 0], [0, 0], [0.9, 0]]}))
    code, _, err = run(capsys, "emt", "--shape", str(p))
    assert code == 2 and "crosses itself" in err


def test_verify_quick(capsys):
    code, out, err = run(capsys, "verify", "--quick")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["informational"][0]["name"].startswith("far-field decay window (ellipse)")
    assert "PASS" in err


def test_verify_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--tol", "1e-15")
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_wrong_convention_fails(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--kappa-convention", "plane_stress")
    rep = json.loads(out)
    assert code == 1
    assert not next(c for c in rep["checks"] if c["name"] == "E-pair identities")["passed"]
