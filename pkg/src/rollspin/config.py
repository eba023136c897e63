"""Spec-file schema: one JSON document drives every command.

Units are fixed: lengths in mm (keys carry an ``_mm`` suffix), angles in
radians unless the key ends in ``_deg``, in which case the value converts
on load.  Unknown keys are rejected.  Validation gathers every violation
before failing so a bad file reports all its problems at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .chain import ManipulatorSpec
from .profile import JointDesign, find_critical_n
from .spin import SpinParams

SCHEMA_VERSION = 1

DEFAULT_DOCUMENT = {
    "version": 1,
    "joint": {
        "l_mm": 3.5,
        "n": 0.6,
        "theta_max_deg": 45.0,
    },
    "manipulator": {
        "segment_count": 13,
        "section1_joints": [0, 1, 2, 3, 4, 5],
        "section2_joints": [6, 7, 8, 9, 10, 11],
        "outer_diameter_mm": 5.0,
        "lumen_diameter_mm": 1.2,
        "tendon_radius_mm": 1.75,
        "rigid_extra_mm": 0.0,
        "motor_step_deg": 0.4,
        "wheel_radius_mm": 1.4323944878270578,
        "section_limit_deg": 30.0,
        "notes": "prototype total length 69.3 mm is shorter than the "
                 "12-joint 2L stack; fabricated joints nest inside each "
                 "other, which this rigid-span model does not subtract",
    },
    "spin": {
        "half_angle_deg": 5.0,
        "range_mm": 120.0,
        "voltage_kv": 10.0,
        "feed_rate_ml_h": 0.5,
        "solution": "PVP 15 wt% in ethanol",
    },
    "environment": {
        "path_file": None,
    },
}


class SpecValidationError(ValueError):
    """Carries every violation found in a spec document."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid spec document:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class SpinSettings:
    half_angle: float
    range_mm: float
    params: SpinParams


@dataclass(frozen=True)
class SpecDocument:
    version: int
    joint: JointDesign
    manipulator: ManipulatorSpec
    spin: SpinSettings
    path_file: str | None
    critical_n: bool   # True when the document requested n = critical


def _angle(block: dict, key: str, errors: list, path: str, default=None):
    """Fetch an angle given either '<key>' (rad) or '<key>_deg'."""
    plain, deg = key, key + "_deg"
    if plain in block and deg in block:
        errors.append(f"{path}.{plain}: give either {plain} or {deg}, not both")
        block.pop(deg)
        return block.pop(plain)
    if deg in block:
        v = block.pop(deg)
        return math.radians(v) if isinstance(v, (int, float)) else v
    if plain in block:
        return block.pop(plain)
    return default


def _number(block, key, errors, path, default=None, required=False):
    if key in block:
        v = block.pop(key)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            errors.append(f"{path}.{key}: expected a number")
            return default
        return v
    if required:
        errors.append(f"{path}.{key}: missing")
    return default


def _reject_unknown(block, path, errors):
    for k in block:
        errors.append(f"{path}.{k}: unknown key")


def parse_document(doc: dict) -> SpecDocument:
    """Validate a parsed JSON document; raises SpecValidationError."""
    errors: list[str] = []
    doc = dict(doc)
    version = doc.pop("version", None)
    if version != SCHEMA_VERSION:
        errors.append(f"version: expected {SCHEMA_VERSION}, got {version!r}")

    joint_raw = dict(doc.pop("joint", {}) or {})
    l_mm = _number(joint_raw, "l_mm", errors, "joint", required=True)
    n = joint_raw.pop("n", None)
    critical = joint_raw.pop("critical", False)
    theta_max = _angle(joint_raw, "theta_max", errors, "joint",
                       default=math.pi / 4)
    _reject_unknown(joint_raw, "joint", errors)
    if n is not None and critical:
        errors.append("joint: n and critical are mutually exclusive")
    if n is None and not critical:
        errors.append("joint: one of n or critical is required")
    if isinstance(n, str):
        if n == "critical":
            critical, n = True, None
        else:
            errors.append(f"joint.n: expected a number or \"critical\", got {n!r}")
            n = None
    if n is not None and not (isinstance(n, (int, float)) and 0 < n < 2):
        errors.append(f"joint.n: out of (0, 2): {n!r}")
        n = None
    if l_mm is not None and l_mm <= 0:
        errors.append(f"joint.l_mm: must be positive, got {l_mm}")
        l_mm = None
    if not isinstance(theta_max, (int, float)) or not 0 < theta_max <= math.pi / 2:
        errors.append(f"joint.theta_max: must lie in (0, pi/2], got {theta_max!r}")
        theta_max = math.pi / 4

    man_raw = dict(doc.pop("manipulator", {}) or {})
    man_notes = man_raw.pop("notes", "")
    seg = man_raw.pop("segment_count", 13)
    s1 = tuple(man_raw.pop("section1_joints", range(0, 6)))
    s2 = tuple(man_raw.pop("section2_joints", range(6, 12)))
    od = _number(man_raw, "outer_diameter_mm", errors, "manipulator", 5.0)
    lumen = _number(man_raw, "lumen_diameter_mm", errors, "manipulator", 1.2)
    tr = _number(man_raw, "tendon_radius_mm", errors, "manipulator", 1.75)
    rex = _number(man_raw, "rigid_extra_mm", errors, "manipulator", 0.0)
    mstep = _angle(man_raw, "motor_step", errors, "manipulator",
                   default=math.radians(0.4))
    wheel = _number(man_raw, "wheel_radius_mm", errors, "manipulator",
                    1.4323944878270578)
    slim = _angle(man_raw, "section_limit", errors, "manipulator",
                  default=math.radians(30.0))
    _reject_unknown(man_raw, "manipulator", errors)

    spin_raw = dict(doc.pop("spin", {}) or {})
    half = _angle(spin_raw, "half_angle", errors, "spin",
                  default=math.radians(5.0))
    rng = _number(spin_raw, "range_mm", errors, "spin", 120.0)
    kv = _number(spin_raw, "voltage_kv", errors, "spin", 10.0)
    feed = _number(spin_raw, "feed_rate_ml_h", errors, "spin", 0.5)
    solution = spin_raw.pop("solution", "PVP 15 wt% in ethanol")
    _reject_unknown(spin_raw, "spin", errors)

    env_raw = dict(doc.pop("environment", {}) or {})
    path_file = env_raw.pop("path_file", None)
    _reject_unknown(env_raw, "environment", errors)
    _reject_unknown(doc, "", errors)

    if errors:
        raise SpecValidationError(errors)

    if critical:
        n = find_critical_n(l_mm, theta_max).n_star
    try:
        joint = JointDesign(L=l_mm, N=n, theta_max=theta_max)
        manipulator = ManipulatorSpec(
            joint=joint, segment_count=int(seg),
            section1_joints=tuple(int(j) for j in s1),
            section2_joints=tuple(int(j) for j in s2),
            outer_diameter=od, lumen_diameter=lumen, tendon_radius=tr,
            rigid_extra=rex, motor_step=mstep, wheel_radius=wheel,
            section_limit=slim)
        spin = SpinSettings(half_angle=half, range_mm=rng,
                            params=SpinParams(voltage_kv=kv,
                                              feed_rate_ml_h=feed,
                                              solution=solution,
                                              spun_distance_mm=rng))
    except ValueError as exc:
        raise SpecValidationError([str(exc)]) from exc
    del man_notes
    return SpecDocument(version=SCHEMA_VERSION, joint=joint,
                        manipulator=manipulator, spin=spin,
                        path_file=path_file, critical_n=bool(critical))


def load_spec(path_or_default) -> SpecDocument:
    """Load and validate a spec file; 'default' loads the bundled document."""
    if path_or_default in (None, "default"):
        return parse_document(DEFAULT_DOCUMENT)
    with open(path_or_default) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecValidationError([f"not valid JSON: {exc}"]) from exc
    return parse_document(doc)


def serialize(doc: SpecDocument) -> str:
    """Canonical JSON form (radians, sorted keys)."""
    j = doc.joint
    m = doc.manipulator
    s = doc.spin
    out = {
        "version": doc.version,
        "joint": {
            "l_mm": j.L,
            **({"critical": True} if doc.critical_n else {"n": j.N}),
            "theta_max": j.theta_max,
        },
        "manipulator": {
            "segment_count": m.segment_count,
            "section1_joints": list(m.section1_joints),
            "section2_joints": list(m.section2_joints),
            "outer_diameter_mm": m.outer_diameter,
            "lumen_diameter_mm": m.lumen_diameter,
            "tendon_radius_mm": m.tendon_radius,
            "rigid_extra_mm": m.rigid_extra,
            "motor_step": m.motor_step,
            "wheel_radius_mm": m.wheel_radius,
            "section_limit": m.section_limit,
        },
        "spin": {
            "half_angle": s.half_angle,
            "range_mm": s.range_mm,
            "voltage_kv": s.params.voltage_kv,
            "feed_rate_ml_h": s.params.feed_rate_ml_h,
            "solution": s.params.solution,
        },
        "environment": {"path_file": doc.path_file},
    }
    return json.dumps(out, indent=2, sort_keys=True)
