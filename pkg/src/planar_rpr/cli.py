"""Command-line interface.

JSON results go to standard output, diagnostics to standard error, so
outputs pipe cleanly into plotting scripts.  Exit codes: 0 on success, 1 on
domain errors (bad geometry, singular designs, planning failures), 2 on
usage errors.
"""
from __future__ import annotations

import json
import sys
import warnings

import click
import numpy as np

from .errors import RobotError
from .kinematics import inverse_kinematics, oracle_fk, solve_fk
from .model import JointVector, Pose, characteristic_scale
from .modeplan import WorkspacePath, plan_mode_change, verify_mode_change
from .robotfile import RunConfig, load_robot
from .singularity import (
    classify_configuration,
    is_architecturally_singular,
    passage_safety,
    sample_conic_polyline,
    singularity_conic,
    triangle_angles,
)


def _emit(obj):
    click.echo(json.dumps(obj, sort_keys=True))


def _load(robot_path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        geom = load_robot(robot_path)
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    return geom


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise click.UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise click.UsageError(f"{what} needs numbers, got {text!r}")


def _pose_arg(text: str) -> Pose:
    x, y, phi = _floats(text, 3, "pose")
    return Pose(x, y, phi)


def _solution_rows(sols):
    return [
        {
            "x": p.x,
            "y": p.y,
            "phi": p.phi,
            "residual": float(r),
            "multiplicity": int(m),
        }
        for p, r, m in zip(sols.solutions, sols.residuals, sols.multiplicities)
    ]


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for sampling schedules.")
@click.pass_context
def cli(ctx, seed):
    """Model 3-RPR planar parallel robots: kinematics, singularity loci and
    passage-crossing mode-change planning."""
    cfg = RunConfig.from_env()
    if seed is not None:
        cfg.seed = seed
    ctx.obj = cfg


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--pose", "pose_text", required=True, help="x,y,phi")
@click.option("--signs", "signs_text", default=None, help="optional s1,s2,s3 sign hint")
def ik(robot_path, pose_text, signs_text):
    """Inverse kinematics: signed leg lengths for a pose."""
    geom = _load(robot_path)
    hint = _floats(signs_text, 3, "signs") if signs_text else None
    joints = inverse_kinematics(geom, _pose_arg(pose_text), hint)
    _emit({"rho": [float(v) for v in joints.rho]})


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--joints", "joints_text", required=True, help="r1,r2,r3")
@click.option("--oracle", is_flag=True, help="Use the brute-force sweep instead of the solver.")
@click.option("--grid", type=int, default=None, help="Sweep grid size (with --oracle).")
@click.pass_obj
def fk(cfg, robot_path, joints_text, oracle, grid):
    """Forward kinematics: all assembly modes for given joint values."""
    geom = _load(robot_path)
    joints = JointVector(_floats(joints_text, 3, "joints"))
    if oracle:
        sols = oracle_fk(geom, joints, grid or cfg.oracle_grid)
    else:
        sols = solve_fk(geom, joints)
    _emit(_solution_rows(sols))


@cli.command("oracle-fk")
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--joints", "joints_text", required=True, help="r1,r2,r3")
@click.option("--grid", type=int, default=None)
@click.pass_obj
def oracle_fk_cmd(cfg, robot_path, joints_text, grid):
    """Brute-force forward kinematics by orientation sweep."""
    geom = _load(robot_path)
    joints = JointVector(_floats(joints_text, 3, "joints"))
    sols = oracle_fk(geom, joints, grid or cfg.oracle_grid)
    _emit(_solution_rows(sols))


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--pose", "pose_text", required=True, help="x,y,phi")
def classify(robot_path, pose_text):
    """Classify a pose: regular, parallel or serial singular."""
    geom = _load(robot_path)
    c = classify_configuration(geom, _pose_arg(pose_text))
    _emit(
        {
            "kind": c.kind,
            "singular_legs": list(c.singular_legs),
            "measure": None if c.measure is None else float(c.measure),
            "clearance": None if c.clearance is None else float(c.clearance),
        }
    )


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--phi", type=float, required=True)
@click.option("--window", "window_text", required=True, help="x0,y0,x1,y1")
@click.option("--step", type=float, required=True)
@click.option("--out", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_obj
def locus(cfg, robot_path, phi, window_text, step, fmt):
    """Singularity conic at fixed orientation, as plot-ready polylines."""
    geom = _load(robot_path)
    window = _floats(window_text, 4, "window")
    conic = singularity_conic(geom, phi, seed=cfg.seed)
    polylines = sample_conic_polyline(conic, window, step)
    if fmt == "csv":
        click.echo("x,y,polyline_id")
        for pid, poly in enumerate(polylines):
            for x, y in poly:
                click.echo(f"{float(x)!r},{float(y)!r},{pid}")
        return
    _emit(
        {
            "phi": conic.phi,
            "coefficients": [float(c) for c in conic.coefficients],
            "conic_class": conic.conic_class,
            "serial_points": [[float(v) for v in p] for p in conic.serial_points],
            "polylines": [[[float(v) for v in pt] for pt in poly] for poly in polylines],
        }
    )


@cli.command("design-check")
@click.option("--robot", "robot_path", required=True, type=click.Path())
def design_check(robot_path):
    """Architectural-singularity and passage-safety report."""
    geom = _load(robot_path)
    singular, detail = is_architecturally_singular(geom)
    _emit(
        {
            "architectural": bool(singular),
            "detail": detail,
            "passage_safety": [bool(v) for v in passage_safety(geom)],
            "angles": {
                "base": [float(a) for a in triangle_angles(geom.base)],
                "platform": [float(a) for a in triangle_angles(geom.platform)],
            },
        }
    )


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--start", "start_text", required=True, help="x,y,phi")
@click.option("--target", "target_text", default=None, help="x,y,phi")
@click.option("--box", "box_text", default=None, help="x0,y0,x1,y1")
@click.option("--res", "res_text", default=None, help="nx,ny,nphi")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Also write the path here.")
@click.pass_obj
def plan(cfg, robot_path, start_text, target_text, box_text, res_text, out_path):
    """Plan an assembly-mode change crossing the locus through passages."""
    geom = _load(robot_path)
    L = characteristic_scale(geom)
    start = _pose_arg(start_text)
    target = _pose_arg(target_text) if target_text else None
    box = _floats(box_text, 4, "box") if box_text else None
    if res_text:
        res = tuple(int(v) for v in _floats(res_text, 3, "res"))
    else:
        res = cfg.resolution
    path = plan_mode_change(
        geom, start, target, box=box, resolution=res, eps_pass=cfg.eps_pass_rel * L
    )
    doc = {"waypoints": [{"x": w.x, "y": w.y, "phi": w.phi} for w in path.waypoints]}
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
    _emit(doc)


@cli.command()
@click.option("--robot", "robot_path", required=True, type=click.Path())
@click.option("--path", "path_file", required=True, type=click.Path())
@click.option("--samples", type=int, default=16, help="Samples per path segment.")
@click.option("--out", "fmt", type=click.Choice(["json", "csv"]), default="json",
              help="csv emits just the sampled trace, verdict goes to stderr.")
@click.pass_obj
def verify(cfg, robot_path, path_file, samples, fmt):
    """Verify a workspace path and print its mode-change certificate."""
    geom = _load(robot_path)
    L = characteristic_scale(geom)
    try:
        with open(path_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        waypoints = tuple(Pose(w["x"], w["y"], w["phi"]) for w in doc["waypoints"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise click.UsageError(f"cannot read path file {path_file}: {exc}")
    path = WorkspacePath(waypoints, samples_per_segment=samples)
    cert = verify_mode_change(geom, path, eps_pass=cfg.eps_pass_rel * L)
    if fmt == "csv":
        click.echo(f"verdict: {cert.verdict}", err=True)
        click.echo("t,measure,rho1,rho2,rho3")
        if cert.joint_path is not None:
            for k, t in enumerate(cert.joint_path.ts):
                meas = cert.measure_trace[k]
                meas_txt = "" if not np.isfinite(meas) else repr(float(meas))
                r1, r2, r3 = (repr(float(v)) for v in cert.joint_path.rho[k])
                click.echo(f"{float(t)!r},{meas_txt},{r1},{r2},{r3}")
        return
    _emit(cert.to_dict())


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, prog_name="planar-rpr", standalone_mode=False)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except RobotError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
