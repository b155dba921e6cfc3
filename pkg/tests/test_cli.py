import json

import numpy as np
import pytest

from planar_rpr import ParseError, Pose, ValidationError, load_robot, pose_distance
from planar_rpr.cli import main

from conftest import REF_BASE, REF_PLATFORM, REF_SCALE

L = REF_SCALE


# --- robot files ------------------------------------------------------------


def test_load_robot_ok(ref_file):
    geom = load_robot(ref_file)
    assert geom.name == "ref"
    assert np.allclose(geom.base, REF_BASE)


def test_load_robot_wrong_arity(tmp_path):
    path = tmp_path / "two.json"
    path.write_text(json.dumps({"base": [[0, 0], [10, 0]], "platform": REF_PLATFORM}))
    with pytest.raises(ParseError):
        load_robot(path)


def test_load_robot_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_robot(path)


def test_load_robot_bad_point_shape(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"base": [[0, 0, 0], [10, 0], [4, 8]], "platform": REF_PLATFORM}))
    with pytest.raises(ParseError):
        load_robot(path)


def test_load_robot_non_finite(tmp_path):
    path = tmp_path / "inf.json"
    path.write_text('{"base": [[0, 0], [Infinity, 0], [4, 8]], "platform": [[-2,-1],[2,-1],[0,2]]}')
    with pytest.raises(ValidationError):
        load_robot(path)


def test_load_robot_coincident_points(tmp_path):
    path = tmp_path / "coincident.json"
    path.write_text(json.dumps({"base": [[1, 1], [1, 1], [1, 1]], "platform": REF_PLATFORM}))
    with pytest.raises(ValidationError):
        load_robot(path)


def test_load_robot_warns_similar(tmp_path, recwarn):
    base = np.asarray(REF_BASE)
    platform = 0.5 * (base - base.mean(axis=0))
    path = tmp_path / "similar.json"
    path.write_text(json.dumps({"base": base.tolist(), "platform": platform.tolist()}))
    load_robot(path)
    messages = [str(w.message) for w in recwarn.list]
    assert any("architecturally singular" in m for m in messages)
    # a similar design has matching angles everywhere, so every leg is flagged
    assert sum("not passage-safe" in m for m in messages) == 3


# --- CLI --------------------------------------------------------------------


def test_cli_ik(ref_file, capfd):
    assert main(["ik", "--robot", str(ref_file), "--pose", "0,0,0"]) == 0
    out = json.loads(capfd.readouterr().out)
    assert np.allclose(out["rho"], np.sqrt([5, 65, 52]))


def test_cli_fk_round_trip(ref_file, capfd):
    code = main(["fk", "--robot", str(ref_file), "--joints", "2.2360679,8.0622577,7.2111025"])
    assert code == 0
    rows = json.loads(capfd.readouterr().out)
    assert any(
        pose_distance(Pose(r["x"], r["y"], r["phi"]), Pose(0, 0, 0), L) < 1e-5 for r in rows
    )
    assert all(r["multiplicity"] >= 1 for r in rows)


def test_cli_fk_oracle_agrees(ref_file, capfd):
    joints = "2.23606797749979,8.06225774829855,7.211102550927978"
    assert main(["fk", "--robot", str(ref_file), "--joints", joints]) == 0
    solver_rows = json.loads(capfd.readouterr().out)
    assert main(["oracle-fk", "--robot", str(ref_file), "--joints", joints, "--grid", "2048"]) == 0
    oracle_rows = json.loads(capfd.readouterr().out)
    assert len(solver_rows) == len(oracle_rows)
    for a, b in zip(solver_rows, oracle_rows):
        pa, pb = Pose(a["x"], a["y"], a["phi"]), Pose(b["x"], b["y"], b["phi"])
        assert pose_distance(pa, pb, L) <= 1e-6 * L


def test_cli_classify(ref_file, capfd):
    assert main(["classify", "--robot", str(ref_file), "--pose", "2,1,0"]) == 0
    out = json.loads(capfd.readouterr().out)
    assert out["kind"] == "serial_singular"
    assert out["singular_legs"] == [1]
    assert out["clearance"] == pytest.approx(0.8)


def test_cli_design_check(ref_file, capfd):
    assert main(["design-check", "--robot", str(ref_file)]) == 0
    out = json.loads(capfd.readouterr().out)
    assert out["architectural"] is False
    assert out["passage_safety"] == [True, True, True]
    assert len(out["angles"]["base"]) == 3


def test_cli_locus_json(ref_file, capfd):
    code = main([
        "locus", "--robot", str(ref_file), "--phi", "0",
        "--window", "-10,-10,20,20", "--step", "0.25",
    ])
    assert code == 0
    out = json.loads(capfd.readouterr().out)
    assert out["conic_class"] == "hyperbola"
    assert out["serial_points"] == [[2, 1], [8, 1], [4, 6]]
    assert out["polylines"]


def test_cli_locus_csv(ref_file, capfd):
    code = main([
        "locus", "--robot", str(ref_file), "--phi", "0",
        "--window", "-10,-10,20,20", "--step", "0.25", "--out", "csv",
    ])
    assert code == 0
    lines = capfd.readouterr().out.strip().splitlines()
    assert lines[0] == "x,y,polyline_id"
    x, y, pid = lines[1].split(",")
    float(x), float(y), int(pid)


def test_cli_usage_errors(ref_file, capfd):
    assert main(["fk", "--robot", str(ref_file)]) == 2  # missing --joints
    capfd.readouterr()
    assert main(["fk", "--bogus"]) == 2
    capfd.readouterr()
    assert main(["ik", "--robot", str(ref_file), "--pose", "1,2"]) == 2
    capfd.readouterr()


def test_cli_domain_error_exit_code(tmp_path, capfd):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"base": [[0, 0], [10, 0]], "platform": REF_PLATFORM}))
    assert main(["ik", "--robot", str(path), "--pose", "0,0,0"]) == 1
    err = capfd.readouterr().err
    assert "error:" in err


def test_cli_plan_and_verify(ref_file, tmp_path, capfd):
    out_path = tmp_path / "path.json"
    code = main([
        "plan", "--robot", str(ref_file), "--start", "0,0,0", "--out", str(out_path),
    ])
    assert code == 0
    stdout_doc = json.loads(capfd.readouterr().out)
    file_doc = json.loads(out_path.read_text())
    assert stdout_doc == file_doc
    assert len(file_doc["waypoints"]) >= 2

    assert main(["verify", "--robot", str(ref_file), "--path", str(out_path)]) == 0
    cert = json.loads(capfd.readouterr().out)
    assert cert["verdict"] == "changed_without_parallel"
    kinds = [e["kind"] for e in cert["events"]]
    assert "passage" in kinds and "parallel" not in kinds
    trace = cert["trace"]
    assert len(trace["t"]) == len(trace["measure"]) == len(trace["rho1"])
    assert np.allclose(
        np.asarray(cert["start_joints_sq"]), np.asarray(cert["end_joints_sq"]), atol=1e-9 * L**2
    )


def test_cli_determinism(ref_file, capfd):
    args = ["fk", "--robot", str(ref_file), "--joints", "3.5,7.25,6.5", "--oracle", "--grid", "1024"]
    assert main(args) == 0
    first = capfd.readouterr().out
    assert main(args) == 0
    assert capfd.readouterr().out == first


def test_cli_verify_csv_trace(ref_file, tmp_path, capfd):
    path_doc = {"waypoints": [{"x": 4, "y": 2, "phi": 0}, {"x": 0, "y": 0, "phi": 0}]}
    path_file = tmp_path / "seg.json"
    path_file.write_text(json.dumps(path_doc))
    assert main(["verify", "--robot", str(ref_file), "--path", str(path_file), "--out", "csv"]) == 0
    out, err = capfd.readouterr()
    lines = out.strip().splitlines()
    assert lines[0] == "t,rho1,rho2,rho3".replace("t,", "t,measure,")
    assert "verdict:" in err
    # rho1 runs from +sqrt5 to -sqrt5 through the serial point
    first, last = lines[1].split(","), lines[-1].split(",")
    assert float(first[2]) == pytest.approx(np.sqrt(5))
    assert float(last[2]) == pytest.approx(-np.sqrt(5))


def test_cli_locus_determinism(ref_file, capfd):
    args = [
        "--seed", "11", "locus", "--robot", str(ref_file), "--phi", "0.9",
        "--window", "-10,-10,20,20", "--step", "0.5",
    ]
    assert main(args) == 0
    first = capfd.readouterr().out
    assert main(args) == 0
    assert capfd.readouterr().out == first
