"""Non-circular rolling-joint contour synthesis.

A joint couples two stacked segments whose origins sit 2L apart when
straight.  On deflection by theta the centerline between the origins is an
arc of radius 2L/theta, so its length stays exactly 2L.  The two contact
points P_L(theta), P_R(theta) sit on the chord that perpendicularly bisects
that arc; their loci over the deflection sweep trace the joint contour.

Conventions (fixed throughout):
  * anticlockwise rotation is positive; positive theta bends toward -x,
  * the lower segment frame has its origin at the lower segment origin with
    +y along the straight axis; the contact chord center sits at (0, L),
  * the upper segment frame is carried by ``upper_segment_pose``.

The mating face of the upper segment is handled two ways.  The contact
contour itself (the conjugate image of the loci, obtained by mapping each
contact point through the inverse of the relative pose at its own sample
angle) is exposed for consistency checks and export.  For interference
checking the upper face is relieved by the region the lower head sweeps
through the upper frame across the design range: the fabricable clearance
cut that a closed contour admits.  A contour that never closes (no apex
crossing) admits no such relief and is checked against the unrelieved
conjugate face, so obstruction is reported for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import unary_union

from .geometry import ANGLE_EPS, bisect, cosm1_over, mirror_x, rot2, sinc

PAPER_REFERENCE_N = 0.60  # published normalization factor for L = 3.5 mm

# Overlap area at or below this is contact, not interference (mm^2).
TOUCH_AREA = 1e-9


@dataclass(frozen=True)
class JointDesign:
    """Scalar parameters of one rolling joint.

    L: half-pitch length, mm.  The straight per-joint centerline span is 2L.
    N: dimensionless chord normalization; the contact chord length is S = N*L.
    theta_max: largest per-joint deflection the design must support, rad.
    """

    L: float
    N: float
    theta_max: float = math.pi / 4

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not 0 < self.N < 2:
            raise ValueError(f"N must lie in (0, 2), got {self.N}")
        if not 0 < self.theta_max <= math.pi / 2:
            raise ValueError(f"theta_max must lie in (0, pi/2], got {self.theta_max}")

    @property
    def S(self) -> float:
        """Contact chord length, mm (exactly N*L)."""
        return self.N * self.L


@dataclass(frozen=True)
class CircularBaseline:
    """Kinematics of the conventional circular-joint design at one angle.

    The circular joint hinges at mid-span; the inner tube follows an arc of
    radius R = L / (2 tan(theta/2)) whose length falls short of the straight
    span L, which is the defect the non-circular contour removes.
    """

    R: float            # bend radius, mm (+inf when straight)
    arc_len: float      # deflected centerline arc length, mm
    tip: tuple          # upper origin (x, y), mm
    shortening: float   # L - arc_len, mm
    straight: bool      # True when |theta| < ANGLE_EPS


def circular_baseline(L: float, theta: float) -> CircularBaseline:
    """Circular-joint centerline at deflection theta.

    Raises ValueError for |theta| > pi/2.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if abs(theta) > math.pi / 2:
        raise ValueError(f"|theta| must not exceed pi/2, got {theta}")
    straight = abs(theta) < ANGLE_EPS
    if straight:
        R = math.inf
    else:
        R = L / (2.0 * math.tan(theta / 2.0))
    # arc = L*theta/(2 tan(theta/2)) = L * (theta/2)/tan(theta/2), even in theta
    h = theta / 2.0
    if straight:
        arc = L * (1.0 - h * h / 3.0)
    else:
        arc = L * h / math.tan(h)
    tip = (-(L / 2.0) * math.sin(theta), L * math.cos(h) ** 2)
    return CircularBaseline(R=R, arc_len=arc, tip=tip,
                            shortening=L - arc, straight=straight)


@dataclass(frozen=True)
class ContactPair:
    """Constant-arc construction at one deflection angle."""

    R_star: float       # 2L/theta, mm (+inf when straight)
    P_m: np.ndarray     # arc midpoint = chord center, mm
    P_L: np.ndarray     # left contact point, mm
    P_R: np.ndarray     # right contact point, mm


def arc_midpoint(L: float, theta: float) -> np.ndarray:
    """Chord center P_m = (2L/theta)(cos(theta/2) - 1, sin(theta/2))."""
    h = theta / 2.0
    return np.array([L * cosm1_over(h), L * sinc(h)])


def contact_pair(design: JointDesign, theta: float) -> ContactPair:
    """Contact points of the joint at deflection theta."""
    if abs(theta) > math.pi / 2:
        raise ValueError(f"|theta| must not exceed pi/2, got {theta}")
    L, S = design.L, design.S
    h = theta / 2.0
    pm = arc_midpoint(L, theta)
    u = np.array([math.cos(h), math.sin(h)])
    r_star = math.inf if abs(theta) < ANGLE_EPS else 2.0 * L / theta
    return ContactPair(R_star=r_star, P_m=pm,
                       P_L=pm - (S / 2.0) * u, P_R=pm + (S / 2.0) * u)


@dataclass(frozen=True)
class PlanarTransform:
    """Homogeneous planar map: rotation by theta/2, translation to P_m.

    Carries straight-state chord coordinates (relative to the chord center)
    to their deflected positions; (+-S/2, 0) map to P_R / P_L.
    """

    matrix: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:2, 2]

    def apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = pts @ self.rotation.T + self.translation
        return out[0] if out.shape[0] == 1 else out


def deflect_transform(L: float, theta: float) -> PlanarTransform:
    """Chord-frame rigid map at deflection theta (rotation theta/2)."""
    if abs(theta) > math.pi / 2:
        raise ValueError(f"|theta| must not exceed pi/2, got {theta}")
    h = theta / 2.0
    pm = arc_midpoint(L, theta)
    m = np.eye(3)
    m[:2, :2] = rot2(h)
    m[:2, 2] = pm
    return PlanarTransform(matrix=m)


@dataclass(frozen=True)
class PlanarPose:
    """Planar rigid pose: position and orientation."""

    position: np.ndarray
    orientation: float

    def apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = pts @ rot2(self.orientation).T + self.position
        return out[0] if out.shape[0] == 1 else out

    def inverse_apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = (pts - self.position) @ rot2(self.orientation)
        return out[0] if out.shape[0] == 1 else out


def upper_segment_pose(L: float, theta: float) -> PlanarPose:
    """Pose of the upper segment origin in the lower segment frame.

    Position (2L/theta)(cos(theta) - 1, sin(theta)), orientation theta; the
    centerline arc between the origins has length exactly 2L for every theta.
    """
    if abs(theta) > math.pi / 2:
        raise ValueError(f"|theta| must not exceed pi/2, got {theta}")
    pos = np.array([2.0 * L * cosm1_over(theta), 2.0 * L * sinc(theta)])
    return PlanarPose(position=pos, orientation=theta)


def centerline_span(design: JointDesign, theta: float) -> float:
    """Arc length between adjacent segment origins at deflection theta.

    2L identically: the audit evaluates R* * theta rather than returning the
    constant, so a regression in the pose formulas would surface here.
    """
    if abs(theta) > math.pi / 2:
        raise ValueError(f"|theta| must not exceed pi/2, got {theta}")
    if abs(theta) < ANGLE_EPS:
        return 2.0 * design.L
    return (2.0 * design.L / theta) * theta


def _branch_r_x(design: JointDesign, theta: float) -> float:
    h = theta / 2.0
    return design.L * cosm1_over(h) + (design.S / 2.0) * math.cos(h)


@dataclass
class JointProfile:
    """Sampled joint contour: the loci of both contact points.

    branch_R[i] = P_R(theta_samples[i]) and branch_L is its mirror image;
    theta_apex is the first positive angle at which branch_R crosses the
    segment axis (the two branches meet there and the contour closes).
    """

    design: JointDesign
    theta_samples: np.ndarray
    branch_R: np.ndarray
    branch_L: np.ndarray
    theta_apex: float | None
    closed: bool
    simple: bool
    theta_sweep: float
    _relief_cache: dict = field(default_factory=dict, repr=False,
                                compare=False)

    # -- derived contours -------------------------------------------------

    def head_contour(self) -> np.ndarray:
        """Lower head contour: branch_R from -sweep up to the apex, mirrored.

        Open contours (no apex) are truncated at the sweep end and closed
        across the gap.
        """
        d = self.design
        hi = self.theta_apex if self.theta_apex is not None else self.theta_sweep
        mask = self.theta_samples <= hi + 1e-15
        right = self.branch_R[mask]
        if self.theta_apex is not None:
            apex = np.array([0.0, _branch_y(d, self.theta_apex)])
            right = np.vstack([right, apex])
        left = mirror_x(right)[::-1]
        if self.theta_apex is not None:
            left = left[1:]  # drop duplicated apex
        return np.vstack([right, left])

    def mating_contour(self) -> np.ndarray:
        """Upper mating contour in the upper segment frame.

        Each contact point mapped through the inverse of the relative pose at
        its own sample angle; this is the vertical flip (x, -y) of the head
        contour.
        """
        head = self.head_contour()
        return np.column_stack([head[:, 0], -head[:, 1]])

    def lens_contour(self) -> np.ndarray:
        """Closed central contour: contact arcs plus their reflection.

        The pointed oval bounded above by the contact-point arcs between the
        straight contact points and the apex, below by their reflection
        across the chord height L; the interleaved tongue/slot cross-section.
        """
        d = self.design
        hi = self.theta_apex if self.theta_apex is not None else self.theta_sweep
        mask = (self.theta_samples >= -1e-15) & (self.theta_samples <= hi + 1e-15)
        arc_r = self.branch_R[mask]
        if self.theta_apex is not None:
            arc_r = np.vstack([arc_r, [0.0, _branch_y(d, self.theta_apex)]])
        arc_l = mirror_x(arc_r)[::-1][1:]
        top = np.vstack([arc_r, arc_l])                      # (S/2,L) .. (-S/2,L)
        bottom = np.column_stack([top[:, 0], 2 * d.L - top[:, 1]])[::-1][1:-1]
        return np.vstack([top, bottom])

    # -- polygons for interference checking --------------------------------

    def _head_polygon_points(self) -> np.ndarray:
        head = self.head_contour()
        x_end, y_end = head[0]
        base = max(y_end - self.design.L, 0.0)
        return np.vstack([
            [head[0][0], base],
            head,
            [head[-1][0], base],
        ])

    def head_polygon(self) -> Polygon:
        """Head contour closed with the segment body rectangle."""
        return Polygon(self._head_polygon_points())

    def _conjugate_polygon(self) -> Polygon:
        """Unrelieved mating polygon in the upper frame (conjugate face)."""
        pts = self._head_polygon_points()
        return Polygon(np.column_stack([pts[:, 0], -pts[:, 1]])[::-1])

    def _relieved_polygon(self, extra_theta: float, grid_step: float) -> Polygon:
        """Mating polygon with the swept-clearance relief cut.

        The relief is the union of the head polygon carried through the
        inverse relative pose over the design range; extra_theta is included
        in the sweep so querying at that angle carries no discretization
        residue.
        """
        key = (round(extra_theta, 12), grid_step)
        if key in self._relief_cache:
            return self._relief_cache[key]
        base = self._relief_cache.get(("base", grid_step))
        head_pts = self._head_polygon_points()
        if base is None:
            n = max(2, int(math.ceil(2 * self.design.theta_max / grid_step)) + 1)
            sweep = np.linspace(-self.design.theta_max, self.design.theta_max, n)
            members = [Polygon(upper_segment_pose(self.design.L, t).inverse_apply(head_pts))
                       for t in sweep]
            base = unary_union(members)
            self._relief_cache[("base", grid_step)] = base
        member = Polygon(upper_segment_pose(self.design.L, extra_theta)
                         .inverse_apply(head_pts))
        relief = unary_union([base, member])
        block = self._conjugate_polygon()
        relieved = block.difference(relief)
        self._relief_cache[key] = relieved
        return relieved

    def export_rows(self):
        """(theta, pl_x, pl_y, pr_x, pr_y) rows for CSV export."""
        for t, pl, pr in zip(self.theta_samples, self.branch_L, self.branch_R):
            yield t, pl[0], pl[1], pr[0], pr[1]


def _branch_y(design: JointDesign, theta: float) -> float:
    h = theta / 2.0
    return design.L * sinc(h) + (design.S / 2.0) * math.sin(h)


def generate_profile(design: JointDesign, theta_sweep: float = math.pi / 2,
                     n_samples: int = 256) -> JointProfile:
    """Sample the joint contour over a symmetric deflection sweep.

    Uniform grid over [-theta_sweep, +theta_sweep]; locates the apex by
    bracketing the sign change of branch_R's x coordinate and bisecting to
    1e-10 rad; evaluates the closure and simplicity flags.
    """
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    if theta_sweep < design.theta_max:
        raise ValueError("theta_sweep must cover the design deflection range")
    if n_samples % 2 == 0:
        n_samples += 1  # keep the straight sample on the grid
    thetas = np.linspace(-theta_sweep, theta_sweep, n_samples)
    branch_r = np.array([[_branch_r_x(design, t), _branch_y(design, t)]
                         for t in thetas])
    branch_l = mirror_x(branch_r[::-1])

    theta_apex = _find_apex(design, theta_sweep)
    simple = bool(LineString(branch_r).is_simple and LineString(branch_l).is_simple)

    profile = JointProfile(design=design, theta_samples=thetas,
                           branch_R=branch_r, branch_L=branch_l,
                           theta_apex=theta_apex, closed=False, simple=simple,
                           theta_sweep=theta_sweep)
    profile.closed = _closure_ok(profile)
    return profile


def _find_apex(design: JointDesign, theta_sweep: float,
               scan_points: int = 2048) -> float | None:
    """First positive root of branch_R.x; None when no sign change in sweep."""
    hi = min(theta_sweep, math.pi / 2)
    ts = np.linspace(1e-9, hi, scan_points)
    a = ts[0]
    fa = _branch_r_x(design, a)
    for b in ts[1:]:
        fb = _branch_r_x(design, b)
        if fa * fb <= 0:
            return bisect(lambda t: _branch_r_x(design, t), a, b, tol=1e-10)
        a, fa = b, fb
    return None


def _closure_ok(profile: JointProfile) -> bool:
    """Closure criterion: apex exists within (0, pi/2], the positive branch
    is simple and stays strictly on the positive-x side before the apex, and
    the closed head polygon is simple."""
    ta = profile.theta_apex
    if ta is None or not 0.0 < ta <= math.pi / 2:
        return False
    sel = (profile.theta_samples > 1e-12) & (profile.theta_samples < ta - 1e-12)
    if np.any(profile.branch_R[sel][:, 0] <= 0.0):
        return False
    upper = profile.branch_R[(profile.theta_samples >= 0)
                             & (profile.theta_samples <= ta + 1e-15)]
    if len(upper) >= 2 and not LineString(upper).is_simple:
        return False
    head = profile.head_polygon()
    return bool(head.is_valid)


@dataclass(frozen=True)
class InterferenceReport:
    """Outcome of a mating-interference query at one deflection angle."""

    theta: float
    overlap_area: float       # mm^2
    max_penetration: float    # mm
    structural_error: str | None = None

    @property
    def interferes(self) -> bool:
        return self.overlap_area > 1e-6


def check_interference(profile: JointProfile, theta: float,
                       relief_grid_step: float = math.radians(0.5)) -> InterferenceReport:
    """Overlap between the lower head and the placed upper mating polygon.

    Closed contours are checked against the swept-clearance relieved face
    and roll freely across the design range; contours that fail the closure
    criterion are checked against the unrelieved conjugate face, for which
    rotation is obstructed.  Self-intersecting construction polygons are a
    structural error, reported distinctly from interference.
    """
    if abs(theta) > profile.design.theta_max + 1e-12:
        raise ValueError("theta outside the profile's design deflection range")
    lower = profile.head_polygon()
    if not lower.is_valid:
        return InterferenceReport(theta=theta, overlap_area=math.nan,
                                  max_penetration=math.nan,
                                  structural_error="head polygon is self-intersecting")
    if profile.closed:
        upper = profile._relieved_polygon(theta, relief_grid_step)
        if upper.is_empty:
            return InterferenceReport(theta=theta, overlap_area=math.nan,
                                      max_penetration=math.nan,
                                      structural_error="relief consumes the mating body")
    else:
        upper = profile._conjugate_polygon()
    if not upper.is_valid:
        return InterferenceReport(theta=theta, overlap_area=math.nan,
                                  max_penetration=math.nan,
                                  structural_error="mating polygon is self-intersecting")
    pose = upper_segment_pose(profile.design.L, theta)
    placed = _transform_polygon(upper, pose)
    overlap = lower.intersection(placed)
    area = overlap.area
    pen = 0.0
    if area > TOUCH_AREA:
        pen = _max_penetration(lower, placed, overlap)
    return InterferenceReport(theta=theta, overlap_area=area, max_penetration=pen)


def _transform_polygon(poly: Polygon, pose: PlanarPose) -> Polygon:
    def tx(coords):
        return pose.apply(np.asarray(coords, dtype=float))
    shell = tx(poly.exterior.coords)
    holes = [tx(r.coords) for r in poly.interiors]
    return Polygon(shell, holes)


def _max_penetration(a: Polygon, b: Polygon, overlap) -> float:
    """Deepest that one boundary sits inside the other region, mm."""
    pen = 0.0
    geoms = getattr(overlap, "geoms", [overlap])
    for g in geoms:
        if g.is_empty or not hasattr(g, "exterior"):
            continue
        for x, y in g.exterior.coords:
            p = Point(x, y)
            pen = max(pen, max(a.exterior.distance(p), b.exterior.distance(p)))
    return pen


@dataclass(frozen=True)
class CriticalNResult:
    """Critical normalization factor search outcome."""

    n_star: float
    tolerance: float
    paper_reference: float
    theta_max: float
    L: float

    @property
    def deviation(self) -> float:
        return self.n_star - self.paper_reference

    def report(self) -> str:
        lines = [
            f"critical normalization factor N* = {self.n_star:.6f}"
            f" (tolerance {self.tolerance:g})",
            f"design: L = {self.L:g} mm, theta_max = "
            f"{math.degrees(self.theta_max):g} deg",
            f"published reference value: {self.paper_reference:.2f}",
            f"deviation from reference: {self.deviation:+.4f}",
            "criterion: largest N whose contour closes (apex crossing within"
            " (0, pi/2], simple positive branch staying on its own side,"
            " simple head polygon) and whose closed contour passes the"
            " swept-clearance interference check across +-theta_max.",
            "The reference value's selection criterion is not fully specified"
            " by its source; the deviation is reported, not forced to zero.",
        ]
        return "\n".join(lines)


def _n_is_valid(L: float, theta_max: float, n: float,
                n_samples: int = 192,
                interference_grid: float = math.radians(2.5)) -> bool:
    try:
        design = JointDesign(L=L, N=n, theta_max=theta_max)
    except ValueError:
        return False
    profile = generate_profile(design, theta_sweep=math.pi / 2,
                               n_samples=n_samples)
    if not profile.closed:
        return False
    steps = np.arange(0.0, theta_max + 1e-12, interference_grid)
    for t in steps:
        for sign in (1.0, -1.0) if t > 0 else (1.0,):
            rep = check_interference(profile, sign * t,
                                     relief_grid_step=interference_grid)
            if rep.structural_error is not None or rep.overlap_area > 1e-6:
                return False
    return True


def find_critical_n(L: float, theta_max: float = math.pi / 4,
                    tolerance: float = 1e-4) -> CriticalNResult:
    """Supremum of valid N in (0, 2) by bisection on the closure criterion.

    Raises ValueError when the bracket does not straddle validity.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if tolerance < 1e-6:
        raise ValueError("tolerance below 1e-6 is not supported")
    lo, hi = 0.05, 1.95
    if not _n_is_valid(L, theta_max, lo):
        raise ValueError("criterion never satisfied on (0, 2)")
    if _n_is_valid(L, theta_max, hi):
        raise ValueError("criterion always satisfied on (0, 2)")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if _n_is_valid(L, theta_max, mid):
            lo = mid
        else:
            hi = mid
    return CriticalNResult(n_star=0.5 * (lo + hi), tolerance=tolerance,
                           paper_reference=PAPER_REFERENCE_N,
                           theta_max=theta_max, L=L)
