"""Electrospinning jet geometry and aiming.

The jet is modeled as a right circular cone leaving the tip needle along
the tip frame's forward axis, restrained to a configured half-angle, with a
working range equal to the spun distance.  Deposition is purely geometric:
the footprint is the exact cone-plane conic, coverage metrics rasterize the
footprint union on the target plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ConfigState, ManipulatorSpec, Pose3, actuate, \
    forward_kinematics, section_config, section_tip_pose, steps_for_angles

GRAZING_MARGIN = 1e-6


@dataclass(frozen=True)
class SpinParams:
    """Process metadata carried into reports; no physics attached."""

    voltage_kv: float = 10.0
    feed_rate_ml_h: float = 0.5
    solution: str = "PVP 15 wt% in ethanol"
    spun_distance_mm: float = 120.0

    def __post_init__(self):
        if self.voltage_kv <= 0 or self.feed_rate_ml_h <= 0 or \
                self.spun_distance_mm <= 0:
            raise ValueError("spin parameters must be positive")


@dataclass(frozen=True)
class JetCone:
    """Jet cone anchored at the tip frame."""

    apex: np.ndarray       # tip position, mm
    axis: np.ndarray       # unit forward direction
    half_angle: float      # rad
    range_mm: float        # working spun distance

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        object.__setattr__(self, "apex", np.asarray(self.apex, dtype=float))
        object.__setattr__(self, "axis", ax / np.linalg.norm(ax))
        if not 0 < self.half_angle < math.pi / 2:
            raise ValueError("half_angle must lie in (0, pi/2)")
        if self.range_mm <= 0:
            raise ValueError("range must be positive")

    @staticmethod
    def from_tip(tip: Pose3, half_angle: float, range_mm: float) -> "JetCone":
        return JetCone(apex=tip.t, axis=tip.forward, half_angle=half_angle,
                       range_mm=range_mm)


@dataclass(frozen=True)
class TargetPlane:
    """Deposition plane with a fixed in-plane coordinate frame."""

    point: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @staticmethod
    def from_point_normal(point, normal) -> "TargetPlane":
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        ref = np.array([1.0, 0.0, 0.0])
        if abs(np.dot(ref, n)) > 0.999:
            ref = np.array([0.0, 1.0, 0.0])
        e1 = np.cross(n, ref)
        e1 = e1 / np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        return TargetPlane(point=np.asarray(point, dtype=float), normal=n,
                           e1=e1, e2=e2)

    def to_plane(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float)) - self.point
        return np.column_stack([pts @ self.e1, pts @ self.e2])

    def to_world(self, uv) -> np.ndarray:
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        out = self.point + uv[:, :1] * self.e1 + uv[:, 1:2] * self.e2
        return out[0] if out.shape[0] == 1 else out


@dataclass(frozen=True)
class FootprintConic:
    """Cone-plane intersection on the target plane."""

    kind: str              # "ellipse" or "point"
    center: np.ndarray     # plane coordinates, mm
    semi_major: float
    semi_minor: float
    major_dir: np.ndarray  # unit in-plane major-axis direction
    minor_dir: np.ndarray
    polygon: np.ndarray    # (n, 2) boundary in plane coordinates
    area: float
    axis_distance: float   # apex-to-plane distance along the cone axis

    def contains(self, uv) -> np.ndarray:
        """Vectorized inside test in plane coordinates."""
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        if self.kind == "point":
            return np.zeros(len(uv), dtype=bool)
        d = uv - self.center
        u = d @ self.major_dir
        v = d @ self.minor_dir
        return (u / self.semi_major) ** 2 + (v / self.semi_minor) ** 2 <= 1.0


def footprint(cone: JetCone, plane: TargetPlane, n_vertices: int = 128) -> FootprintConic:
    """Exact conic footprint of the jet cone on the target plane.

    Raises ValueError for a plane behind the apex, beyond the working range,
    or at grazing incidence (unbounded conic).
    """
    n = plane.normal if np.dot(plane.normal, cone.axis) > 0 else -plane.normal
    un = float(np.dot(cone.axis, n))
    if abs(un) < GRAZING_MARGIN:
        raise ValueError("grazing incidence: cone axis parallel to plane")
    t = float(np.dot(plane.point - cone.apex, n)) / un
    if t <= 0:
        raise ValueError("plane behind apex")
    if t > cone.range_mm * (1.0 + 1e-6):
        raise ValueError("plane beyond the jet working range")
    beta = math.acos(min(1.0, max(-1.0, un)))
    gamma = cone.half_angle
    if beta + gamma >= math.pi / 2 - GRAZING_MARGIN:
        raise ValueError("grazing incidence: footprint conic is unbounded")
    k = math.cos(gamma) ** 2 - math.sin(beta) ** 2
    a = t * math.sin(gamma) * math.cos(gamma) * math.cos(beta) / k
    b = t * math.sin(gamma) * math.cos(beta) / math.sqrt(k)
    pierce = cone.apex + t * cone.axis
    # major axis along the in-plane projection of the cone axis
    proj = cone.axis - un * n
    pn = np.linalg.norm(proj)
    if pn < 1e-12:
        major3 = plane.e1
    else:
        major3 = proj / pn
    center3 = pierce + (t * math.sin(beta) * math.sin(gamma) ** 2 / k) * major3
    center = plane.to_plane(center3)[0]
    major = np.array([np.dot(major3, plane.e1), np.dot(major3, plane.e2)])
    minor = np.array([-major[1], major[0]])
    ang = np.linspace(0.0, 2.0 * math.pi, max(n_vertices, 64), endpoint=False)
    poly = center + np.outer(np.cos(ang), a * major) + np.outer(np.sin(ang), b * minor)
    return FootprintConic(kind="ellipse", center=center, semi_major=a,
                          semi_minor=b, major_dir=major, minor_dir=minor,
                          polygon=poly, area=math.pi * a * b, axis_distance=t)


@dataclass(frozen=True)
class AimResult:
    config: ConfigState
    section_angles: tuple
    residual: float            # angle between tip axis and target ray, rad
    reachable: bool
    iterations: int


def _aim_residual(spec: ManipulatorSpec, alpha1: float, alpha2: float,
                  target: np.ndarray) -> float:
    tip = section_tip_pose(spec, alpha1, alpha2)
    ray = target - tip.t
    rn = np.linalg.norm(ray)
    if rn < 1e-12:
        raise ValueError("target coincides with the tip")
    c = float(np.dot(tip.forward, ray / rn))
    return math.acos(min(1.0, max(-1.0, c)))


def aim_at(spec: ManipulatorSpec, target, initial: ConfigState | None = None,
           residual_tol: float = 1e-4, max_iterations: int = 100) -> AimResult:
    """Point the tip axis at a target by damped Gauss-Newton on the two
    section angles (numeric central-difference Jacobian, step 1e-5 rad).

    Angles clamp to the configured section steering limit; a residual above
    1e-3 rad flags the target unreachable.
    """
    target = np.asarray(target, dtype=float)
    lim = spec.section_limit
    if initial is not None:
        initial.validate(spec)
        a = np.array(initial.section_angles(spec))
    else:
        # coarse warm start keeps the local solver off distant basins
        grid = np.linspace(-lim, lim, 5)
        best_key, best = None, (0.0, 0.0)
        for g1 in grid:
            for g2 in grid:
                key = (_aim_residual(spec, g1, g2, target),
                       abs(g1) + abs(g2), g1, g2)
                if best_key is None or key < best_key:
                    best_key, best = key, (g1, g2)
        a = np.array(best)
    h = 1e-5
    lam = 1e-6
    res = _aim_residual(spec, a[0], a[1], target)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        if res < residual_tol:
            break
        jac = np.empty(2)
        for i in range(2):
            ap, am = a.copy(), a.copy()
            ap[i] += h
            am[i] -= h
            jac[i] = (_aim_residual(spec, ap[0], ap[1], target)
                      - _aim_residual(spec, am[0], am[1], target)) / (2 * h)
        g2 = float(jac @ jac)
        if g2 < 1e-18:
            break
        step = -res * jac / (g2 + lam)
        trial = np.clip(a + step, -lim, lim)
        trial_res = _aim_residual(spec, trial[0], trial[1], target)
        if trial_res < res:
            a, res = trial, trial_res
            lam = max(lam * 0.3, 1e-9)
        else:
            lam = lam * 10.0
            if lam > 1e6:
                break
    reachable = res < 1e-3
    return AimResult(config=section_config(spec, a[0], a[1]),
                     section_angles=(float(a[0]), float(a[1])),
                     residual=float(res), reachable=reachable,
                     iterations=iterations)


@dataclass(frozen=True)
class ScheduleEntry:
    waypoint_id: int
    alpha1: float
    alpha2: float
    steps1: int
    steps2: int
    footprint: FootprintConic | None
    reachable: bool
    residual: float
    deposited_volume_ml: float


@dataclass(frozen=True)
class CoveragePlan:
    entries: tuple
    coverage_fraction: float
    overspray_area: float      # mm^2 outside the region
    union_area: float          # mm^2 of the footprint union
    cell_size: float
    params: SpinParams

    def csv_rows(self):
        for e in self.entries:
            fp = e.footprint
            yield (e.waypoint_id, e.alpha1, e.alpha2, str(e.steps1),
                   str(e.steps2),
                   fp.center[0] if fp else math.nan,
                   fp.center[1] if fp else math.nan,
                   fp.semi_major if fp else math.nan,
                   fp.semi_minor if fp else math.nan,
                   "1" if e.reachable else "0")


def _point_in_polygon(pts, poly) -> np.ndarray:
    """Vectorized even-odd rule point-in-polygon test."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    px, py = poly[:, 0], poly[:, 1]
    n = len(poly)
    j = n - 1
    for i in range(n):
        cond = ((py[i] > y) != (py[j] > y))
        xin = (px[j] - px[i]) * (y - py[i]) / (py[j] - py[i] + 1e-300) + px[i]
        inside ^= cond & (x < xin)
        j = i
    return inside


def plan_coverage(spec: ManipulatorSpec, targets, params: SpinParams,
                  plane: TargetPlane, region, half_angle: float,
                  dwell_s: float = 10.0, cell_size: float = 0.5) -> CoveragePlan:
    """Aim at each waypoint, quantize to motor steps, rasterize coverage.

    targets: (k, 3) waypoint positions on or near the plane.
    region: (m, 2) polygon in plane coordinates defining the intended area.

    The nominal spun distance is approximate; aiming tilts the tip, so the
    jet range carries a 25 percent margin when footprints are evaluated.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    region = np.atleast_2d(np.asarray(region, dtype=float))
    if len(targets) == 0:
        raise ValueError("targets must be non-empty")
    entries = []
    footprints = []
    for i, tgt in enumerate(targets):
        aim = aim_at(spec, tgt)
        k1, k2 = steps_for_angles(spec, *aim.section_angles)
        act = actuate(spec, (k1, k2))
        qa1, qa2 = act.section_angles
        fp = None
        if aim.reachable:
            fk = forward_kinematics(spec, act.config)
            cone = JetCone.from_tip(fk.tip, half_angle,
                                    1.25 * params.spun_distance_mm)
            try:
                fp = footprint(cone, plane)
                footprints.append(fp)
            except ValueError:
                fp = None
        entries.append(ScheduleEntry(
            waypoint_id=i, alpha1=qa1, alpha2=qa2, steps1=k1, steps2=k2,
            footprint=fp, reachable=aim.reachable, residual=aim.residual,
            deposited_volume_ml=params.feed_rate_ml_h * dwell_s / 3600.0))
    cover_frac, overspray, union_area = _raster_metrics(
        footprints, region, cell_size)
    return CoveragePlan(entries=tuple(entries), coverage_fraction=cover_frac,
                        overspray_area=overspray, union_area=union_area,
                        cell_size=cell_size, params=params)


def _raster_metrics(footprints, region, cell_size):
    """Raster the footprint union against the region polygon."""
    pts = [region]
    for fp in footprints:
        pts.append(fp.polygon)
    allpts = np.vstack(pts)
    lo = allpts.min(axis=0) - cell_size
    hi = allpts.max(axis=0) + cell_size
    nx = max(2, int(math.ceil((hi[0] - lo[0]) / cell_size)))
    ny = max(2, int(math.ceil((hi[1] - lo[1]) / cell_size)))
    xs = lo[0] + (np.arange(nx) + 0.5) * cell_size
    ys = lo[1] + (np.arange(ny) + 0.5) * cell_size
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    covered = np.zeros(len(cells), dtype=bool)
    for fp in footprints:
        covered |= fp.contains(cells)
    in_region = _point_in_polygon(cells, region)
    region_cells = int(np.count_nonzero(in_region))
    if region_cells == 0:
        cover_frac = 0.0
    else:
        cover_frac = float(np.count_nonzero(covered & in_region)) / region_cells
    overspray = float(np.count_nonzero(covered & ~in_region)) * cell_size ** 2
    union_area = float(np.count_nonzero(covered)) * cell_size ** 2
    return cover_frac, overspray, union_area
