"""Two-section tendon-driven manipulator kinematics.

The chain stacks segments coupled by identical rolling joints, each
contributing a constant 2L of centerline regardless of deflection.  Base
frame: +z along the straight axis.  Section 1 bends in the y-z plane
(positive angle tips the tip toward +y, labeled "up"); section 2 bends in
the x-z plane (positive toward +x, labeled "right").  Bending planes are
fixed to the robot body, so they rotate with any preceding deflection.

Four tendons run through guide holes at radius ``tendon_radius`` on every
segment cross-section: up (+y), down (-y), right (+x), left (-x).  The
up/down pair terminates at the last segment of section 1, the right/left
pair at the distal segment.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import bisect, cosm1_over, sinc
from .profile import JointDesign

TENDON_NAMES = ("up", "down", "left", "right")


@dataclass(frozen=True)
class ManipulatorSpec:
    """Architecture of the manipulator (counts, diameters, tendon layout)."""

    joint: JointDesign
    segment_count: int = 13
    section1_joints: tuple = tuple(range(0, 6))
    section2_joints: tuple = tuple(range(6, 12))
    outer_diameter: float = 5.0
    lumen_diameter: float = 1.2
    tendon_radius: float = 1.75
    rigid_extra: float = 0.0
    motor_step: float = math.radians(0.4)
    wheel_radius: float = 1.4323944878270578   # 0.01 mm tendon travel per step
    section_limit: float = math.radians(30.0)  # experimental steering bound

    def __post_init__(self):
        if self.segment_count < 2:
            raise ValueError("segment_count must be at least 2")
        j1, j2 = set(self.section1_joints), set(self.section2_joints)
        if j1 & j2:
            raise ValueError("section joint sets must be disjoint")
        if sorted(self.section1_joints) != list(self.section1_joints) or \
                sorted(self.section2_joints) != list(self.section2_joints):
            raise ValueError("section joint sets must be ordered")
        n_joints = self.segment_count - 1
        if j1 | j2 != set(range(n_joints)):
            raise ValueError("section joint sets must cover all joints")
        if not 0 < self.tendon_radius < self.outer_diameter / 2:
            raise ValueError("tendon_radius must lie within the wall")
        if self.rigid_extra < 0:
            raise ValueError("rigid_extra must be non-negative")
        if self.wheel_radius <= 0 or self.motor_step <= 0:
            raise ValueError("motor parameters must be positive")

    @property
    def joint_count(self) -> int:
        return self.segment_count - 1

    def joint_section(self, j: int) -> int:
        return 1 if j in self.section1_joints else 2

    def straight_length(self) -> float:
        return self.joint_count * 2.0 * self.joint.L + self.rigid_extra

    def section_angle_limit(self, section: int) -> float:
        """Geometric section limit: per-joint theta_max times joint count."""
        joints = self.section1_joints if section == 1 else self.section2_joints
        return len(joints) * self.joint.theta_max


@dataclass(frozen=True)
class ConfigState:
    """Per-joint deflection angles, one per inter-segment joint."""

    joint_angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "joint_angles", tuple(float(a) for a in self.joint_angles))

    def validate(self, spec: ManipulatorSpec) -> None:
        if len(self.joint_angles) != spec.joint_count:
            raise ValueError(
                f"config has {len(self.joint_angles)} angles, spec has "
                f"{spec.joint_count} joints")
        for j, a in enumerate(self.joint_angles):
            if abs(a) > spec.joint.theta_max + 1e-12:
                raise ValueError(f"joint {j} angle {a} exceeds theta_max")

    def section_angles(self, spec: ManipulatorSpec) -> tuple:
        a1 = sum(self.joint_angles[j] for j in spec.section1_joints)
        a2 = sum(self.joint_angles[j] for j in spec.section2_joints)
        return a1, a2


def section_config(spec: ManipulatorSpec, alpha1: float, alpha2: float) -> ConfigState:
    """Equal per-joint distribution of the two section angles."""
    angles = [0.0] * spec.joint_count
    for alpha, joints in ((alpha1, spec.section1_joints),
                          (alpha2, spec.section2_joints)):
        if not joints:
            if alpha != 0.0:
                raise ValueError("nonzero angle commanded for an empty section")
            continue
        for j in joints:
            angles[j] = alpha / len(joints)
    return ConfigState(joint_angles=tuple(angles))


@dataclass(frozen=True)
class Pose3:
    """Spatial rigid pose: 3x3 rotation and translation (mm)."""

    R: np.ndarray
    t: np.ndarray

    @staticmethod
    def identity() -> "Pose3":
        return Pose3(R=np.eye(3), t=np.zeros(3))

    def compose(self, other: "Pose3") -> "Pose3":
        return Pose3(R=self.R @ other.R, t=self.R @ other.t + self.t)

    def apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = pts @ self.R.T + self.t
        return out[0] if out.shape[0] == 1 else out

    @property
    def forward(self) -> np.ndarray:
        """Local +z axis in world coordinates."""
        return self.R[:, 2]


def _section_axes(section: int):
    """(transverse unit d, rotation axis m) for a bending section.

    Positive joint angle tips the distal side toward +d; the joint rotation
    acts about m = z x d, which carries z toward d.
    """
    if section == 1:
        d = np.array([0.0, 1.0, 0.0])
    else:
        d = np.array([1.0, 0.0, 0.0])
    m = np.cross(np.array([0.0, 0.0, 1.0]), d)
    return d, m


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = axis
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) * c + s * K + (1 - c) * np.outer(axis, axis)


def joint_transform(joint: JointDesign, theta: float, section: int) -> Pose3:
    """Local pose of the next segment origin across one joint.

    Embeds the planar constant-arc pose in the section's bending plane:
    translation 2L(-cosm1_over(theta) d + sinc(theta) z), rotation theta
    about d x z.
    """
    d, m = _section_axes(section)
    L = joint.L
    trans = 2.0 * L * (-cosm1_over(theta)) * d + 2.0 * L * sinc(theta) * np.array([0.0, 0.0, 1.0])
    return Pose3(R=_axis_rotation(m, theta), t=trans)


@dataclass(frozen=True)
class FKResult:
    poses: tuple          # one Pose3 per segment origin, base first
    tip: Pose3            # distal frame after rigid_extra
    centerline_length: float


def section_tip_pose(spec: ManipulatorSpec, alpha1: float, alpha2: float) -> Pose3:
    """Closed-form tip pose for equal per-joint section angles.

    A section of m joints bent alpha in total is a single arc of length
    2L*m, so the chain collapses to two arc transforms plus the rigid tip
    extension; identical to forward_kinematics over section_config (the
    constant-curvature equivalence checked in the tests) but much cheaper.
    Falls back to the full chain when the sections interleave.
    """
    if spec.section1_joints and spec.section2_joints and \
            max(spec.section1_joints) > min(spec.section2_joints):
        return forward_kinematics(
            spec, section_config(spec, alpha1, alpha2)).tip
    pose = Pose3.identity()
    for section, alpha, joints in ((1, alpha1, spec.section1_joints),
                                   (2, alpha2, spec.section2_joints)):
        if not joints:
            continue
        m = len(joints)
        arc = joint_transform(
            JointDesign(L=spec.joint.L * m, N=spec.joint.N,
                        theta_max=math.pi / 2), alpha, section)
        pose = pose.compose(arc)
    return pose.compose(Pose3(R=np.eye(3),
                              t=np.array([0.0, 0.0, spec.rigid_extra])))


def forward_kinematics(spec: ManipulatorSpec, config: ConfigState) -> FKResult:
    """Chain composition of the per-joint transforms."""
    config.validate(spec)
    pose = Pose3.identity()
    poses = [pose]
    length = 0.0
    for j, theta in enumerate(config.joint_angles):
        pose = pose.compose(joint_transform(spec.joint, theta, spec.joint_section(j)))
        poses.append(pose)
        # R* theta, series-safe: exactly 2L for every deflection
        length += (2.0 * spec.joint.L / theta) * theta if abs(theta) > 1e-12 \
            else 2.0 * spec.joint.L
    tip = pose.compose(Pose3(R=np.eye(3), t=np.array([0.0, 0.0, spec.rigid_extra])))
    length += spec.rigid_extra
    return FKResult(poses=tuple(poses), tip=tip, centerline_length=length)


@dataclass(frozen=True)
class AuditRow:
    config_id: int
    length: float
    deviation: float          # vs the straight non-circular length
    circular_length: float    # circular-joint robot, chord-L convention
    circular_deviation: float


@dataclass(frozen=True)
class AuditReport:
    rows: tuple
    max_deviation: float
    straight_length: float
    circular_straight_length: float

    def csv_rows(self):
        for r in self.rows:
            yield (r.config_id, r.length, r.circular_length, r.deviation)


def centerline_audit(spec: ManipulatorSpec, configs) -> AuditReport:
    """Centerline length per config, with the circular-joint comparison.

    The non-circular robot spans 2L per joint exactly; the circular-joint
    comparison evaluates the arc each joint's inner tube would follow under
    the legacy chord-L convention, so its shortening column shows the defect
    the contour removes.
    """
    L = spec.joint.L
    straight = spec.straight_length()
    circ_straight = spec.joint_count * L + spec.rigid_extra
    rows = []
    worst = 0.0
    for i, cfg in enumerate(configs):
        fk = forward_kinematics(spec, cfg)
        dev = fk.centerline_length - straight
        circ = spec.rigid_extra
        for theta in cfg.joint_angles:
            h = theta / 2.0
            circ += L * (1.0 - h * h / 3.0) if abs(theta) < 1e-8 \
                else L * h / math.tan(h)
        rows.append(AuditRow(config_id=i, length=fk.centerline_length,
                             deviation=dev, circular_length=circ,
                             circular_deviation=circ - circ_straight))
        worst = max(worst, abs(dev))
    return AuditReport(rows=tuple(rows), max_deviation=worst,
                       straight_length=straight,
                       circular_straight_length=circ_straight)


@dataclass(frozen=True)
class TendonState:
    lengths: dict        # tendon name -> path length, mm
    displacements: dict  # tendon name -> length - straight length, mm


_TENDON_OFFSETS = {
    "up": np.array([0.0, 1.0, 0.0]),
    "down": np.array([0.0, -1.0, 0.0]),
    "left": np.array([-1.0, 0.0, 0.0]),
    "right": np.array([1.0, 0.0, 0.0]),
}


def _tendon_anchor_segment(spec: ManipulatorSpec, name: str) -> int:
    joints = spec.section1_joints if name in ("up", "down") \
        else spec.section2_joints
    if not joints:
        return spec.segment_count - 1
    return max(joints) + 1


def _tendon_length(spec: ManipulatorSpec, poses, name: str) -> float:
    r = spec.tendon_radius
    off = _TENDON_OFFSETS[name] * r
    last = _tendon_anchor_segment(spec, name)
    pts = np.array([poses[k].apply(off) for k in range(last + 1)])
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@functools.lru_cache(maxsize=32)
def _straight_tendon_lengths(spec: ManipulatorSpec) -> dict:
    fk = forward_kinematics(spec, ConfigState((0.0,) * spec.joint_count))
    return {name: _tendon_length(spec, fk.poses, name)
            for name in TENDON_NAMES}


def tendon_lengths(spec: ManipulatorSpec, config: ConfigState) -> TendonState:
    """Chord-model tendon path lengths through the guide holes."""
    fk = forward_kinematics(spec, config)
    straight = _straight_tendon_lengths(spec)
    lengths, disp = {}, {}
    for name in TENDON_NAMES:
        ln = _tendon_length(spec, fk.poses, name)
        lengths[name] = ln
        disp[name] = ln - straight[name]
    return TendonState(lengths=lengths, displacements=disp)


# Pulling these tendons produces a positive section angle.
_PULL_TENDON = {1: "up", 2: "right"}


def _pull_displacement(spec: ManipulatorSpec, section: int, alpha1: float,
                       alpha2: float) -> float:
    """Shortening of the section's positive-direction tendon, mm."""
    cfg = section_config(spec, alpha1, alpha2)
    fk = forward_kinematics(spec, cfg)
    name = _PULL_TENDON[section]
    return _straight_tendon_lengths(spec)[name] - \
        _tendon_length(spec, fk.poses, name)


@dataclass(frozen=True)
class ActuationResult:
    config: ConfigState
    section_angles: tuple
    saturated: tuple      # per-section flags
    tendon_travel: tuple  # commanded travel per section, mm


def angles_for_travel(spec: ManipulatorSpec, travel1: float, travel2: float):
    """Section angles whose pull-tendon shortening equals the given travel.

    Monotone 1D bisection per section (section 1 first, then section 2 given
    section 1); clamps at the geometric limit and flags saturation.
    Returns ((alpha1, alpha2), (saturated1, saturated2)).
    """
    alphas = []
    saturated = []
    for section, tgt in ((1, travel1), (2, travel2)):
        lim = spec.section_angle_limit(section)
        a_prev = alphas[0] if section == 2 else 0.0

        def gap(alpha):
            if section == 1:
                return _pull_displacement(spec, 1, alpha, 0.0) - tgt
            return _pull_displacement(spec, 2, a_prev, alpha) - tgt

        if tgt == 0.0:
            alphas.append(0.0)
            saturated.append(False)
            continue
        if gap(-lim) > 0.0:
            alphas.append(-lim)
            saturated.append(True)
            continue
        if gap(lim) < 0.0:
            alphas.append(lim)
            saturated.append(True)
            continue
        alphas.append(bisect(gap, -lim, lim, tol=1e-12))
        saturated.append(False)
    return tuple(alphas), tuple(saturated)


def actuate(spec: ManipulatorSpec, steps_per_section) -> ActuationResult:
    """Joint angles produced by signed motor step counts.

    Travel per section = steps * motor_step * wheel_radius pulls the
    positive-direction tendon; the tendon model is inverted by
    ``angles_for_travel``.
    """
    k1, k2 = steps_per_section
    travel = (k1 * spec.motor_step * spec.wheel_radius,
              k2 * spec.motor_step * spec.wheel_radius)
    alphas, saturated = angles_for_travel(spec, travel[0], travel[1])
    cfg = section_config(spec, alphas[0], alphas[1])
    return ActuationResult(config=cfg, section_angles=alphas,
                           saturated=saturated, tendon_travel=travel)


def steps_for_angles(spec: ManipulatorSpec, alpha1: float, alpha2: float):
    """Nearest integer step counts reproducing the section angles."""
    per_step = spec.motor_step * spec.wheel_radius
    d1 = _pull_displacement(spec, 1, alpha1, 0.0)
    d2 = _pull_displacement(spec, 2, alpha1, alpha2)
    return int(round(d1 / per_step)), int(round(d2 / per_step))


@dataclass(frozen=True)
class WorkspaceResult:
    rows: np.ndarray   # columns alpha1, alpha2, tip x, y, z
    max_bend: dict     # per direction label, rad

    def csv_rows(self):
        for a1, a2, x, y, z in self.rows:
            yield (a1, a2, x, y, z)


def workspace(spec: ManipulatorSpec, grid1, grid2) -> WorkspaceResult:
    """Tip positions over the Cartesian product of section angle grids."""
    grid1 = np.asarray(sorted(grid1), dtype=float)
    grid2 = np.asarray(sorted(grid2), dtype=float)
    rows = []
    for a1 in grid1:
        for a2 in grid2:
            fk = forward_kinematics(spec, section_config(spec, a1, a2))
            rows.append((a1, a2, *fk.tip.t))
    rows = np.array(rows)
    max_bend = {
        "up": float(max(grid1.max(), 0.0)),
        "down": float(max(-grid1.min(), 0.0)),
        "right": float(max(grid2.max(), 0.0)),
        "left": float(max(-grid2.min(), 0.0)),
    }
    return WorkspaceResult(rows=rows, max_bend=max_bend)
