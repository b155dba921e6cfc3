"""Line-geometry singularity analysis for the 3-RPR platform.

Each leg transmits force along the line through its two revolute joints.
The robot loses stiffness (parallel singularity) exactly when the three
lines are concurrent or all parallel, i.e. when the 3x3 matrix of Pluecker
line coordinates drops rank.  Two determinant flavours are used here:

* ``parallel_singularity_measure`` uses unit leg directions.  It vanishes
  exactly at parallel singularities, is undefined when a leg has zero
  length, and is this package's proximity heuristic.  How to measure
  closeness to a parallel singularity is an open problem; the normalized
  |det| used here is a pragmatic choice that tests and the planner only
  rely on for sign and zero detection.
* ``unnormalized_determinant`` uses raw joint-to-joint vectors.  It is a
  polynomial in the pose, vanishes additionally at serial singularities
  (a zero row), and at fixed orientation is exactly quadratic in (x, y):
  the singularity locus is a conic.

The conic passes through the three serial points S_i(phi) = a_i - R(phi) b_i
where leg i has zero length.  Those points are ordinary (parallel) singular
positions only for designs where a base angle equals the corresponding
platform angle -- otherwise they are passages through the locus.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArchitecturalSingularity, SerialDegenerate
from .model import Pose, RobotGeometry, characteristic_scale, platform_points, rotation

# Leg-length band (relative to L) below which a leg line is undefined.
LINE_DEGENERACY_REL = 1e-9
# Looser band used for configuration classification, so the planner has a
# usable passage window instead of a chattering classifier.
SERIAL_CLASSIFY_REL = 1e-6
# Zero band for the normalized measure.
MEASURE_ZERO = 1e-9
# Fixed seed of the conic-fit sampling schedule (deterministic fits).
CONIC_FIT_SEED = 1729


@dataclass(frozen=True)
class LegLine:
    """Pluecker coordinates (unit direction, moment about the origin) of one
    leg's force line.  ``degenerate`` is set when the two joints coincide."""

    direction: np.ndarray
    moment: float
    degenerate: bool

    def point_distance(self, p) -> float:
        """Unsigned distance from a point to the (infinite) line."""
        px, py = p
        return abs(self.direction[0] * py - self.direction[1] * px + self.moment)


@dataclass(frozen=True)
class SingularityConic:
    """Fixed-orientation singularity locus Q(x, y) = 0.

    ``coefficients`` = (q20, q11, q02, q10, q01, q00) so that
    Q = q20 x^2 + q11 xy + q02 y^2 + q10 x + q01 y + q00, matching the
    unnormalized determinant (length^4 units).  ``serial_points`` are the
    three passage candidates S_i(phi), always on the conic.
    """

    coefficients: np.ndarray
    phi: float
    serial_points: np.ndarray
    conic_class: str

    def evaluate(self, x, y):
        q20, q11, q02, q10, q01, q00 = self.coefficients
        return q20 * x * x + q11 * x * y + q02 * y * y + q10 * x + q01 * y + q00


@dataclass(frozen=True)
class ConfigurationClass:
    """Pointwise classification of a pose.

    ``singular_legs`` uses 1-based leg ids (matching rho_1..rho_3).
    ``measure`` is the normalized parallel-singularity measure, or None
    where undefined (some leg serially singular).  ``clearance`` is only
    set at serial poses: the distance from the intersection of the
    remaining leg lines to the coinciding joint (the serial point is also
    a parallel singularity only when that distance vanishes).
    """

    kind: str
    singular_legs: tuple[int, ...]
    measure: float | None
    clearance: float | None


def _leg_vectors(geom: RobotGeometry, pose: Pose):
    b = platform_points(geom, pose)
    d = b - geom.base
    return d, np.hypot(d[:, 0], d[:, 1])


def leg_lines(geom: RobotGeometry, pose: Pose) -> list[LegLine]:
    """Force line of each leg (through a_i and B_i) at the given pose."""
    L = characteristic_scale(geom)
    d, dist = _leg_vectors(geom, pose)
    lines = []
    for i in range(3):
        if dist[i] <= LINE_DEGENERACY_REL * L:
            lines.append(LegLine(np.zeros(2), 0.0, True))
            continue
        u = d[i] / dist[i]
        u.flags.writeable = False
        moment = float(geom.base[i, 0] * u[1] - geom.base[i, 1] * u[0])
        lines.append(LegLine(u, moment, False))
    return lines


def parallel_singularity_measure(geom: RobotGeometry, pose: Pose, normalized: bool = False) -> float:
    """Determinant of the unit-direction line matrix (length units).

    Zero exactly at parallel singularities.  Raises
    :class:`SerialDegenerate` when some leg line is undefined.  With
    ``normalized=True`` the value is divided by the characteristic scale.
    """
    L = characteristic_scale(geom)
    d, dist = _leg_vectors(geom, pose)
    for i in range(3):
        if dist[i] <= LINE_DEGENERACY_REL * L:
            raise SerialDegenerate(i + 1)
    u = d / dist[:, None]
    moments = geom.base[:, 0] * u[:, 1] - geom.base[:, 1] * u[:, 0]
    det = float(np.linalg.det(np.column_stack([u, moments])))
    return det / L if normalized else det


def unnormalized_determinant(geom: RobotGeometry, pose: Pose) -> float:
    """Line-matrix determinant with raw (un-normalized) leg vectors.

    Equals rho_1 rho_2 rho_3 times the measure wherever the measure is
    defined, and vanishes with a zero row at serial configurations.  At
    fixed phi this is exactly quadratic in (x, y) -- the conic locus.
    """
    det, _ = _det_and_min_distance(geom, pose.x, pose.y, pose.phi)
    return float(det)


def _det_and_min_distance(geom: RobotGeometry, x, y, phi):
    """Vectorized unnormalized determinant and min leg length.

    ``x``, ``y``, ``phi`` may be scalars or broadcastable arrays; used
    heavily by the planner's edge scans.
    """
    ax, ay = geom.base[:, 0], geom.base[:, 1]
    bx, by = geom.platform[:, 0], geom.platform[:, 1]
    c, s = np.cos(phi), np.sin(phi)
    rbx = [c * bx[i] - s * by[i] for i in range(3)]
    rby = [s * bx[i] + c * by[i] for i in range(3)]
    dx = [x + rbx[i] - ax[i] for i in range(3)]
    dy = [y + rby[i] - ay[i] for i in range(3)]
    m = [ax[i] * dy[i] - ay[i] * dx[i] for i in range(3)]
    det = (
        m[0] * (dx[1] * dy[2] - dx[2] * dy[1])
        - m[1] * (dx[0] * dy[2] - dx[2] * dy[0])
        + m[2] * (dx[0] * dy[1] - dx[1] * dy[0])
    )
    dmin = np.minimum(
        np.minimum(np.hypot(dx[0], dy[0]), np.hypot(dx[1], dy[1])), np.hypot(dx[2], dy[2])
    )
    return det, dmin


def serial_points(geom: RobotGeometry, phi: float) -> np.ndarray:
    """Positions S_i(phi) = a_i - R(phi) b_i where leg i has zero length."""
    return geom.base - geom.platform @ rotation(phi).T


def singularity_conic(geom: RobotGeometry, phi: float, seed: int = CONIC_FIT_SEED) -> SingularityConic:
    """Quadratic model of the fixed-orientation singularity locus.

    The six coefficients are fitted by least squares to the unnormalized
    determinant on a seeded sample schedule (fixed default seed, so fits
    are deterministic) and verified on fresh points: a residual above 1e-9
    of scale (or an identically vanishing quadratic) means the locus is not
    a proper conic and the design is rejected as architecturally singular.
    """
    singular, detail = is_architecturally_singular(geom)
    if singular:
        raise ArchitecturalSingularity(detail)
    L = characteristic_scale(geom)
    center = geom.base.mean(axis=0)
    rng = np.random.default_rng(seed)
    pts = center + rng.uniform(-2.0 * L, 2.0 * L, size=(16, 2))
    vals, _ = _det_and_min_distance(geom, pts[:, 0], pts[:, 1], phi)

    def quad_design(p):
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])

    coeffs, *_ = np.linalg.lstsq(quad_design(pts), vals, rcond=None)

    fresh = center + rng.uniform(-2.0 * L, 2.0 * L, size=(100, 2))
    fresh_vals, _ = _det_and_min_distance(geom, fresh[:, 0], fresh[:, 1], phi)
    model = quad_design(fresh) @ coeffs
    scale = float(np.max(np.abs(fresh_vals)))
    if scale == 0.0 or np.max(np.abs(coeffs)) == 0.0:
        raise ArchitecturalSingularity(
            f"singularity locus degenerates to the whole plane at phi={phi:.6f}"
        )
    if float(np.max(np.abs(model - fresh_vals))) > 1e-9 * scale:
        raise ArchitecturalSingularity(
            f"determinant is not quadratic in (x, y) at phi={phi:.6f}; "
            "the design is rejected"
        )

    q20, q11, q02 = coeffs[0], coeffs[1], coeffs[2]
    quad_scale = max(abs(q20), abs(q11), abs(q02))
    disc = q11 * q11 - 4.0 * q20 * q02
    if quad_scale <= 1e-12 * float(np.max(np.abs(coeffs))):
        conic_class = "degenerate"
    elif abs(disc) <= 1e-9 * quad_scale**2:
        conic_class = "parabola"
    elif disc < 0.0:
        conic_class = "ellipse"
    else:
        conic_class = "hyperbola"

    coeffs = coeffs.copy()
    coeffs.flags.writeable = False
    sp = serial_points(geom, phi)
    sp.flags.writeable = False
    return SingularityConic(coeffs, float(phi), sp, conic_class)


# marching-squares segment table: cell corner order is
# (i, j), (i+1, j), (i+1, j+1), (i, j+1); entries pair edge indices
# 0:bottom 1:right 2:top 3:left.
_MS_SEGMENTS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def sample_conic_polyline(conic: SingularityConic, window, step: float) -> list[np.ndarray]:
    """Marching-squares contour of Q = 0 inside an axis-aligned window.

    ``window`` is (x0, y0, x1, y1).  Returns polylines as (n, 2) arrays
    with adjacent point spacing at most 2 * step; an empty list when the
    conic misses the window.  Fully deterministic.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    x0, y0, x1, y1 = window
    if x1 <= x0 or y1 <= y0:
        raise ValueError("window must have positive extent")
    nx = max(2, int(np.ceil((x1 - x0) / step)) + 1)
    ny = max(2, int(np.ceil((y1 - y0) / step)) + 1)
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    Q = conic.evaluate(xs[:, None], ys[None, :])
    inside = Q < 0.0

    def _interp(na, nb):
        # linear zero crossing between two grid nodes; the node order is
        # canonicalized so the two cells sharing an edge emit bit-identical
        # points (otherwise chains would not stitch).
        if nb < na:
            na, nb = nb, na
        qa, qb = Q[na], Q[nb]
        t = qa / (qa - qb)
        return (
            xs[na[0]] + t * (xs[nb[0]] - xs[na[0]]),
            ys[na[1]] + t * (ys[nb[1]] - ys[na[1]]),
        )

    segments = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            code = 0
            for bit, (ci, cj) in enumerate(corners):
                if inside[ci, cj]:
                    code |= 1 << bit
            if code in (0, 15):
                continue
            q_c = [Q[ci, cj] for ci, cj in corners]
            edge_pt = {}
            for e, (a, b) in enumerate(((0, 1), (1, 2), (2, 3), (3, 0))):
                if (q_c[a] < 0.0) != (q_c[b] < 0.0):
                    edge_pt[e] = _interp(corners[a], corners[b])
            if code in (5, 10):
                # saddle: disambiguate with the cell-center value
                qc = conic.evaluate(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
                if code == 5:
                    pairs = [(3, 0), (1, 2)] if (qc < 0.0) else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if (qc < 0.0) else [(0, 3), (2, 1)]
            else:
                pairs = _MS_SEGMENTS[code]
            for a, b in pairs:
                if a in edge_pt and b in edge_pt:
                    segments.append((edge_pt[a], edge_pt[b]))

    return _stitch_segments(segments, 1e-9 * step)


def _stitch_segments(segments, tol: float) -> list[np.ndarray]:
    """Chain marching-squares segments into polylines (deterministic order)."""

    def key(p):
        return (round(p[0] / tol), round(p[1] / tol))

    # zero-length corner clips (contour grazing a lattice node) carry no
    # information and would foul the endpoint matching
    segments = [(a, b) for a, b in segments if key(a) != key(b)]

    adjacency: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(key(a), []).append(idx)
        adjacency.setdefault(key(b), []).append(idx)

    used = [False] * len(segments)
    polylines = []

    def walk(idx, start_pt):
        used[idx] = True
        a, b = segments[idx]
        chain = [start_pt, b if key(a) == key(start_pt) else a]
        while True:
            k = key(chain[-1])
            nxt = next((m for m in adjacency.get(k, ()) if not used[m]), None)
            if nxt is None:
                break
            used[nxt] = True
            a, b = segments[nxt]
            chain.append(b if key(a) == k else a)
        return chain

    # open chains first: start from endpoints that belong to a single segment
    for idx in range(len(segments)):
        if used[idx]:
            continue
        a, b = segments[idx]
        start = None
        if len(adjacency[key(a)]) == 1:
            start = a
        elif len(adjacency[key(b)]) == 1:
            start = b
        if start is not None:
            polylines.append(np.array(walk(idx, start)))
    for idx in range(len(segments)):  # leftover closed loops
        if not used[idx]:
            polylines.append(np.array(walk(idx, segments[idx][0])))
    return polylines


def _two_line_clearance(lines: list[LegLine], regular: list[int], point) -> float:
    """Distance from the intersection of two leg lines to a point; for
    (near-)parallel lines, the larger of the two point-line distances."""
    u1, u2 = lines[regular[0]].direction, lines[regular[1]].direction
    m1, m2 = lines[regular[0]].moment, lines[regular[1]].moment
    cross = u1[0] * u2[1] - u1[1] * u2[0]
    if abs(cross) < 1e-12:
        return max(lines[regular[0]].point_distance(point), lines[regular[1]].point_distance(point))
    # line i: -u_iy x + u_ix y + m_i = 0
    mat = np.array([[-u1[1], u1[0]], [-u2[1], u2[0]]])
    p = np.linalg.solve(mat, -np.array([m1, m2]))
    return float(np.hypot(p[0] - point[0], p[1] - point[1]))


def classify_configuration(geom: RobotGeometry, pose: Pose) -> ConfigurationClass:
    """Classify a pose as regular / parallel / serial / both.

    A leg counts as serially singular inside the loose 1e-6*L band.  At a
    serial pose the parallel test follows the line-through-the-coinciding-
    joint criterion with whatever legs remain regular (the two- and
    three-leg cases extrapolate the same test; the single-leg case is the
    generic one).
    """
    L = characteristic_scale(geom)
    _, dist = _leg_vectors(geom, pose)
    singular = [i for i in range(3) if dist[i] <= SERIAL_CLASSIFY_REL * L]

    if not singular:
        measure = parallel_singularity_measure(geom, pose, normalized=True)
        kind = "parallel_singular" if abs(measure) <= MEASURE_ZERO else "regular"
        return ConfigurationClass(kind, (), measure, None)

    lines = leg_lines(geom, pose)
    regular = [i for i in range(3) if i not in singular]
    measure = None
    if len(singular) == 1:
        clearance = _two_line_clearance(lines, regular, geom.base[singular[0]])
    elif len(singular) == 2:
        clearance = max(
            lines[regular[0]].point_distance(geom.base[i]) for i in singular
        ) if not lines[regular[0]].degenerate else 0.0
    else:
        clearance = 0.0  # platform pinned onto the base: nothing regular remains
    kind = "serial_and_parallel" if clearance <= SERIAL_CLASSIFY_REL * L else "serial_singular"
    return ConfigurationClass(kind, tuple(i + 1 for i in singular), measure, float(clearance))


def triangle_angles(points: np.ndarray) -> np.ndarray:
    """Unsigned interior angle at each vertex of a point triple (radians).

    A vertex with a coincident neighbour gets angle 0.
    """
    out = np.zeros(3)
    for i in range(3):
        e1 = points[(i + 1) % 3] - points[i]
        e2 = points[(i + 2) % 3] - points[i]
        n1, n2 = np.hypot(*e1), np.hypot(*e2)
        if n1 == 0.0 or n2 == 0.0:
            continue
        cross = e1[0] * e2[1] - e1[1] * e2[0]
        dot = e1 @ e2
        out[i] = abs(np.arctan2(cross, dot))
    return out


def is_architecturally_singular(geom: RobotGeometry) -> tuple[bool, str]:
    """Similar-triangle test for architectural singularity.

    True when base and platform triangles are similar under the leg-index
    correspondence (side ratios equal within 1e-9 relative), covering both
    direct and reflected similarity.  This is the classical example of an
    architecturally singular 3-RPR design; more exotic criteria are out of
    scope, with the conic fit's residual check acting as a runtime backstop.
    """
    a, b = geom.base, geom.platform
    sa = np.array([np.hypot(*(a[(i + 1) % 3] - a[(i + 2) % 3])) for i in range(3)])
    sb = np.array([np.hypot(*(b[(i + 1) % 3] - b[(i + 2) % 3])) for i in range(3)])
    for i in range(3):
        for j in range(i + 1, 3):
            lhs, rhs = sa[i] * sb[j], sa[j] * sb[i]
            if abs(lhs - rhs) > 1e-9 * max(lhs, rhs, 1e-300):
                return False, "base and platform triangles are not similar"
    ratio = float(np.sqrt(np.sum(sb**2) / np.sum(sa**2)))

    def signed_area(p):
        e1, e2 = p[1] - p[0], p[2] - p[0]
        return e1[0] * e2[1] - e1[1] * e2[0]

    area_a, area_b = signed_area(a), signed_area(b)
    if area_a == 0.0 or area_b == 0.0:
        orientation = "degenerate"
    elif (area_a > 0.0) == (area_b > 0.0):
        orientation = "direct"
    else:
        orientation = "reflected"
    return True, f"platform is a {orientation} similar copy of the base (ratio {ratio:.9g})"


def passage_safety(geom: RobotGeometry) -> np.ndarray:
    """Per-leg flag: True when the leg's serial point is never a parallel
    singularity, for any orientation.

    Leg i is unsafe exactly when the base angle at a_i equals the platform
    angle at b_i (within 1e-6 rad) -- the special designs where the two
    regular leg lines can pass through the coinciding joints.
    """
    ang_a = triangle_angles(geom.base)
    ang_b = triangle_angles(geom.platform)
    return np.abs(ang_a - ang_b) > 1e-6
