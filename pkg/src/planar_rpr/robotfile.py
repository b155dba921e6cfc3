"""Robot description files and run configuration.

A robot file is JSON: {"base": [[x,y],[x,y],[x,y]],
"platform": [[x,y],[x,y],[x,y]], "name": optional string}.  Parsing is
strict: exactly three points per triple, two finite numbers per point.
Loading also runs the design checks and emits Python warnings for an
architecturally singular design or passage-unsafe legs.
"""
from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .model import RobotGeometry
from .singularity import CONIC_FIT_SEED, is_architecturally_singular, passage_safety

_ENV_PREFIX = "PLANAR_RPR_"


@dataclass
class RunConfig:
    """Tunable knobs shared by the CLI commands.

    Every field can be overridden by an environment variable with the
    PLANAR_RPR_ prefix (e.g. PLANAR_RPR_EPS_PASS_REL).  Overrides must be
    positive.  With a fixed seed every command is byte-deterministic.
    """

    eps_pass_rel: float = 1e-3
    oracle_grid: int = 4096
    seed: int = CONIC_FIT_SEED
    resolution: tuple[int, int, int] = (64, 64, 64)

    @classmethod
    def from_env(cls) -> "RunConfig":
        cfg = cls()
        for name, cast in (("eps_pass_rel", float), ("oracle_grid", int), ("seed", int)):
            raw = os.environ.get(_ENV_PREFIX + name.upper())
            if raw is None:
                continue
            try:
                value = cast(raw)
            except ValueError as exc:
                raise ValidationError(f"bad override {name}={raw!r}") from exc
            if name != "seed" and value <= 0:
                raise ValidationError(f"override {name} must be positive, got {value}")
            setattr(cfg, name, value)
        return cfg


def parse_robot(data) -> RobotGeometry:
    """Validate a decoded robot description and build the geometry."""
    if not isinstance(data, dict):
        raise ParseError("robot description must be a JSON object")
    unknown = set(data) - {"base", "platform", "name"}
    if unknown:
        raise ParseError(f"unknown keys in robot description: {sorted(unknown)}")
    points = {}
    for key in ("base", "platform"):
        if key not in data:
            raise ParseError(f"robot description is missing {key!r}")
        triple = data[key]
        if not isinstance(triple, list) or len(triple) != 3:
            raise ParseError(f"{key} must be an array of exactly 3 points")
        for p in triple:
            if not isinstance(p, list) or len(p) != 2 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in p
            ):
                raise ParseError(f"{key} points must be [x, y] number pairs")
        points[key] = triple
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("name must be a string")
    return RobotGeometry(base=points["base"], platform=points["platform"], name=name)


def load_robot(path) -> RobotGeometry:
    """Load and validate a robot description file.

    Raises ParseError for malformed input and ValidationError for geometric
    invariant violations; warns (warnings.warn) about architecturally
    singular designs and passage-unsafe legs.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read robot file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"robot file {path} is not valid JSON: {exc}") from exc
    geom = parse_robot(data)
    singular, detail = is_architecturally_singular(geom)
    if singular:
        warnings.warn(f"architecturally singular design: {detail}", stacklevel=2)
    safe = passage_safety(geom)
    for i, ok in enumerate(safe):
        if not ok:
            warnings.warn(
                f"leg {i + 1} is not passage-safe: its base and platform angles match",
                stacklevel=2,
            )
    return geom
