"""Kinematics, singularity loci and assembly-mode-change planning for
general 3-RPR planar parallel robots."""

from .errors import (
    AmbiguousContinuation,
    ArchitecturalSingularity,
    DegenerateElimination,
    InvalidStart,
    NoPathFound,
    ParseError,
    RobotError,
    SerialDegenerate,
    ValidationError,
)
from .model import (
    JointVector,
    Pose,
    RobotGeometry,
    characteristic_scale,
    platform_points,
    pose_distance,
    wrap_angle,
)
from .kinematics import (
    FkSolutionSet,
    UnivariateFkPolynomial,
    build_fk_polynomial,
    fk_root_multiplicity,
    inverse_kinematics,
    oracle_fk,
    solve_fk,
)
from .singularity import (
    ConfigurationClass,
    LegLine,
    SingularityConic,
    classify_configuration,
    is_architecturally_singular,
    leg_lines,
    parallel_singularity_measure,
    passage_safety,
    sample_conic_polyline,
    serial_points,
    singularity_conic,
    triangle_angles,
    unnormalized_determinant,
)
from .modeplan import (
    CrossingEvent,
    JointPath,
    ModeChangeCertificate,
    WorkspacePath,
    continue_joints,
    detect_crossings,
    plan_mode_change,
    verify_mode_change,
)
from .robotfile import RunConfig, load_robot, parse_robot

__all__ = [
    "AmbiguousContinuation",
    "ArchitecturalSingularity",
    "ConfigurationClass",
    "CrossingEvent",
    "DegenerateElimination",
    "FkSolutionSet",
    "InvalidStart",
    "JointPath",
    "JointVector",
    "LegLine",
    "ModeChangeCertificate",
    "NoPathFound",
    "ParseError",
    "Pose",
    "RobotError",
    "RobotGeometry",
    "RunConfig",
    "SerialDegenerate",
    "SingularityConic",
    "UnivariateFkPolynomial",
    "ValidationError",
    "WorkspacePath",
    "build_fk_polynomial",
    "characteristic_scale",
    "classify_configuration",
    "continue_joints",
    "detect_crossings",
    "fk_root_multiplicity",
    "inverse_kinematics",
    "is_architecturally_singular",
    "leg_lines",
    "load_robot",
    "oracle_fk",
    "parallel_singularity_measure",
    "parse_robot",
    "passage_safety",
    "plan_mode_change",
    "platform_points",
    "pose_distance",
    "sample_conic_polyline",
    "serial_points",
    "singularity_conic",
    "solve_fk",
    "triangle_angles",
    "unnormalized_determinant",
    "verify_mode_change",
    "wrap_angle",
]
