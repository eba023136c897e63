"""Tubular-anatomy environment: clearance checks and batch auto-steering.

The lumen is a swept-sphere tube: a 3D polyline with a per-vertex radius,
linearly interpolated along each span.  The robot backbone is sampled
densely along its per-joint centerline arcs; clearance at a sample is the
local tube radius minus the distance to the centerline polyline minus the
robot's outer radius.  Negative clearance means collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ConfigState, ManipulatorSpec, Pose3, joint_transform, \
    section_config
from .geometry import cosm1_over, point_to_segments, sinc


@dataclass(frozen=True)
class LumenPath:
    """Tube centerline polyline with per-vertex radii (mm)."""

    vertices: np.ndarray   # (n, 3)
    radii: np.ndarray      # (n,)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        r = np.asarray(self.radii, dtype=float)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "radii", r)
        if len(v) < 2:
            raise ValueError("path needs at least two vertices")
        if len(r) != len(v):
            raise ValueError("one radius per vertex required")
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        if np.any(np.linalg.norm(np.diff(v, axis=0), axis=1) < 1e-12):
            raise ValueError("consecutive vertices must be distinct")

    @staticmethod
    def from_csv(path) -> "LumenPath":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return LumenPath(vertices=rows[:, :3], radii=rows[:, 3])

    def to_csv(self, path) -> None:
        from .exporters import write_csv
        write_csv(path, ["x_mm", "y_mm", "z_mm", "radius_mm"],
                  ((*v, r) for v, r in zip(self.vertices, self.radii)))


@dataclass(frozen=True)
class InsertionState:
    """Robot base advanced along the path's approach axis."""

    depth: float
    base: Pose3
    config: ConfigState


def _approach_frame(path: LumenPath) -> np.ndarray:
    """Rotation aligning local +z with the path's first-span tangent."""
    t = path.vertices[1] - path.vertices[0]
    t = t / np.linalg.norm(t)
    ref = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(ref, t)) > 0.999:
        ref = np.array([0.0, 1.0, 0.0])
    x = np.cross(ref, t)
    x = x / np.linalg.norm(x)
    y = np.cross(t, x)
    return np.column_stack([x, y, t])


def make_insertion(path: LumenPath, config: ConfigState, depth: float) -> InsertionState:
    """Base pose at arc-length depth along the approach axis."""
    if depth < 0:
        raise ValueError("insertion depth must be non-negative")
    R = _approach_frame(path)
    base = Pose3(R=R, t=path.vertices[0] + depth * R[:, 2])
    return InsertionState(depth=depth, base=base, config=config)


def backbone_points(spec: ManipulatorSpec, state: InsertionState,
                    samples_per_joint: int = 8) -> np.ndarray:
    """Dense centerline sample points of the inserted robot, world frame."""
    if samples_per_joint < 2:
        raise ValueError("samples_per_joint must be at least 2")
    cfg = state.config
    cfg.validate(spec)
    pose = state.base
    pts = [pose.t]
    L = spec.joint.L
    fracs = np.linspace(0.0, 1.0, samples_per_joint + 1)[1:]
    for j, theta in enumerate(cfg.joint_angles):
        section = spec.joint_section(j)
        d = np.array([0.0, 1.0, 0.0]) if section == 1 else np.array([1.0, 0.0, 0.0])
        for s in fracs:
            a = s * theta
            # partial-arc point: radius 2L/theta, swept angle s*theta
            trans = (2.0 * L * s) * (-cosm1_over(a) * d + sinc(a) * np.array([0.0, 0.0, 1.0]))
            pts.append(pose.apply(trans))
        pose = pose.compose(joint_transform(spec.joint, theta, section))
    if spec.rigid_extra > 0:
        pts.append(pose.apply(np.array([0.0, 0.0, spec.rigid_extra])))
    return np.array(pts)


@dataclass(frozen=True)
class ClearanceReport:
    min_clearance: float
    location: np.ndarray      # backbone point where the minimum occurs
    backbone_index: int

    @property
    def collides(self) -> bool:
        return self.min_clearance < 0.0


def clearance(path: LumenPath, spec: ManipulatorSpec, state: InsertionState,
              samples_per_joint: int = 8) -> ClearanceReport:
    """Minimum wall clearance along the inserted robot body."""
    pts = backbone_points(spec, state, samples_per_joint)
    a = path.vertices[:-1]
    b = path.vertices[1:]
    ra = path.radii[:-1]
    rb = path.radii[1:]
    best = math.inf
    best_i = 0
    best_p = pts[0]
    for i, p in enumerate(pts):
        dists, fracs = point_to_segments(p, a, b)
        k = int(np.argmin(dists))
        local_r = ra[k] + fracs[k] * (rb[k] - ra[k])
        c = local_r - dists[k] - spec.outer_diameter / 2.0
        if c < best:
            best, best_i, best_p = c, i, p
    return ClearanceReport(min_clearance=float(best), location=np.asarray(best_p),
                           backbone_index=best_i)


@dataclass(frozen=True)
class SteerRow:
    depth: float
    alpha1: float
    alpha2: float
    clearance: float
    passable: bool


@dataclass(frozen=True)
class SteerTrace:
    rows: tuple

    def csv_rows(self):
        for r in self.rows:
            yield (r.depth, r.alpha1, r.alpha2, r.clearance,
                   "1" if r.passable else "0")


def auto_steer(path: LumenPath, spec: ManipulatorSpec, depths,
               grid1=None, grid2=None, samples_per_joint: int = 6) -> SteerTrace:
    """Best section angles per insertion depth by exhaustive grid search.

    Maximizes minimum clearance; ties resolve to the smaller |angles| pair,
    then lexicographically, so the result is independent of grid order.
    """
    depths = list(depths)
    if any(b < a for a, b in zip(depths, depths[1:])):
        raise ValueError("depths must be ascending")
    if grid1 is None:
        grid1 = np.radians(np.arange(-30.0, 30.0 + 1e-9, 1.0))
    if grid2 is None:
        grid2 = np.radians(np.arange(-30.0, 30.0 + 1e-9, 1.0))
    grid1 = np.asarray(list(grid1), dtype=float)
    grid2 = np.asarray(list(grid2), dtype=float)
    if grid1.size == 0 or grid2.size == 0:
        raise ValueError("angle grids must be non-empty")
    rows = []
    for depth in depths:
        candidates = []
        for a1 in grid1:
            for a2 in grid2:
                st = make_insertion(path, section_config(spec, a1, a2), depth)
                rep = clearance(path, spec, st, samples_per_joint)
                candidates.append((-rep.min_clearance, abs(a1) + abs(a2),
                                   a1, a2))
        candidates.sort()
        negc, _, a1, a2 = candidates[0]
        rows.append(SteerRow(depth=depth, alpha1=a1, alpha2=a2,
                             clearance=-negc, passable=-negc >= 0.0))
    return SteerTrace(rows=tuple(rows))


def demo_path() -> LumenPath:
    """Bundled illustrative airway-like path: straight trunk, gentle elbow."""
    pts = [
        (0.0, 0.0, -20.0),
        (0.0, 0.0, 40.0),
        (0.0, 6.0, 70.0),
        (0.0, 16.0, 95.0),
    ]
    radii = [9.0, 8.0, 6.5, 5.5]
    return LumenPath(vertices=np.array(pts), radii=np.array(radii))
