"""Manipulator chain kinematics tests."""

import math

import numpy as np
import pytest

from rollspin.chain import (ConfigState, ManipulatorSpec, Pose3, actuate,
                            angles_for_travel, centerline_audit,
                            forward_kinematics, section_config,
                            steps_for_angles, tendon_lengths, workspace)
from rollspin.profile import JointDesign

SPEC = ManipulatorSpec(joint=JointDesign(L=3.5, N=0.6))
STRAIGHT = ConfigState((0.0,) * 12)


def _mp_arc_tip(L, m, theta):
    """Extended-precision single-arc composition: m equal joints of theta."""
    import mpmath as mp
    mp.mp.dps = 40
    L, theta = mp.mpf(L), mp.mpf(theta)
    Rs = 2 * L / theta
    return float(Rs * (mp.cos(m * theta) - 1)), float(Rs * mp.sin(m * theta))


def _single_section_spec(m):
    return ManipulatorSpec(joint=JointDesign(L=3.5, N=0.6),
                           segment_count=m + 1,
                           section1_joints=tuple(range(m)),
                           section2_joints=())


# ---------------------------------------------------------------------- FK

def test_fk_straight():
    fk = forward_kinematics(SPEC, STRAIGHT)
    np.testing.assert_allclose(fk.tip.t, [0, 0, SPEC.straight_length()],
                               atol=0)
    assert fk.centerline_length == SPEC.straight_length()
    assert len(fk.poses) == SPEC.segment_count


def test_fk_equal_angle_section_matches_arc_chain():
    rng = np.random.default_rng(11)
    for _ in range(50):
        m = int(rng.integers(1, 13))
        theta = float(rng.uniform(-math.pi / 4, math.pi / 4))
        if abs(theta) < 1e-3:
            theta = 0.05
        spec = _single_section_spec(m)
        fk = forward_kinematics(spec, ConfigState((theta,) * m))
        x, y = _mp_arc_tip(3.5, m, theta)
        # section 1 bends toward +y: planar x maps to -y... positive theta
        # tips toward +y, so the planar bend coordinate is -x
        np.testing.assert_allclose(fk.tip.t, [0.0, -x, y], atol=1e-9)
        # orientation: rotation by m*theta about the -x axis equivalent
        assert fk.tip.forward[1] == pytest.approx(math.sin(m * theta),
                                                  abs=1e-9)
        assert fk.tip.forward[2] == pytest.approx(math.cos(m * theta),
                                                  abs=1e-9)


def test_section_tip_pose_matches_full_chain():
    from rollspin.chain import section_tip_pose
    rng = np.random.default_rng(23)
    for _ in range(25):
        a1, a2 = rng.uniform(-math.pi / 3, math.pi / 3, 2)
        fk = forward_kinematics(SPEC, section_config(SPEC, a1, a2))
        tip = section_tip_pose(SPEC, a1, a2)
        np.testing.assert_allclose(tip.t, fk.tip.t, atol=1e-9)
        np.testing.assert_allclose(tip.R, fk.tip.R, atol=1e-12)


def test_fk_plane_decoupling():
    fk1 = forward_kinematics(SPEC, section_config(SPEC, math.radians(25), 0))
    assert fk1.tip.t[0] == 0.0
    assert fk1.tip.t[1] > 0.0
    fk2 = forward_kinematics(SPEC, section_config(SPEC, 0, math.radians(25)))
    assert fk2.tip.t[1] == 0.0
    assert fk2.tip.t[0] > 0.0


def test_fk_composition_prefix_suffix():
    cfg = section_config(SPEC, math.radians(18), math.radians(-9))
    fk = forward_kinematics(SPEC, cfg)
    # composing the first six joints then the rest equals the full chain
    mid = fk.poses[6]
    spec_tail = ManipulatorSpec(joint=SPEC.joint, segment_count=7,
                                section1_joints=(),
                                section2_joints=tuple(range(6)))
    tail_cfg = ConfigState(cfg.joint_angles[6:])
    fk_tail = forward_kinematics(spec_tail, tail_cfg)
    np.testing.assert_allclose(mid.compose(fk_tail.poses[-1]).t,
                               fk.poses[-1].t, atol=1e-12)


def test_fk_rotation_orthonormal():
    cfg = section_config(SPEC, math.radians(30), math.radians(-20))
    fk = forward_kinematics(SPEC, cfg)
    for p in fk.poses:
        np.testing.assert_allclose(p.R @ p.R.T, np.eye(3), atol=1e-13)
        assert np.linalg.det(p.R) == pytest.approx(1.0, abs=1e-13)


def test_fk_config_size_mismatch():
    with pytest.raises(ValueError):
        forward_kinematics(SPEC, ConfigState((0.0,) * 5))
    with pytest.raises(ValueError):
        forward_kinematics(SPEC, ConfigState((1.0,) * 12))  # over theta_max


# ------------------------------------------------------------------- audit

def test_audit_constancy_and_circular_columns():
    rng = np.random.default_rng(3)
    configs = [ConfigState(tuple(rng.uniform(-math.pi / 4, math.pi / 4, 12)))
               for _ in range(100)]
    rep = centerline_audit(SPEC, configs)
    assert rep.max_deviation <= 1e-9
    # circular-joint comparison: 6 joints at 5 degrees shorten by
    # 0.0133287039391176 mm (frozen mpmath value)
    bent = section_config(SPEC, math.radians(30), 0.0)
    rep2 = centerline_audit(SPEC, [bent])
    assert rep2.rows[0].deviation == pytest.approx(0.0, abs=1e-9)
    assert -rep2.rows[0].circular_deviation == pytest.approx(
        0.0133287039391176, abs=1e-6)
    # one joint at 30 degrees shortens by 0.0803298417010133 mm
    one = ConfigState((math.pi / 6,) + (0.0,) * 11)
    rep3 = centerline_audit(SPEC, [one])
    assert -rep3.rows[0].circular_deviation == pytest.approx(
        0.0803298417010133, abs=1e-9)


# ------------------------------------------------------------------ tendon

def test_tendon_straight_zero():
    ts = tendon_lengths(SPEC, STRAIGHT)
    assert all(v == 0.0 for v in ts.displacements.values())


def test_tendon_pull_release_and_antisymmetry():
    alpha = math.radians(30)
    ts_pos = tendon_lengths(SPEC, section_config(SPEC, alpha, 0.0))
    ts_neg = tendon_lengths(SPEC, section_config(SPEC, -alpha, 0.0))
    assert ts_pos.displacements["up"] < 0 < ts_pos.displacements["down"]
    # exact antisymmetry of the mirrored chain
    assert ts_pos.displacements["up"] == ts_neg.displacements["down"]
    assert ts_pos.displacements["down"] == ts_neg.displacements["up"]


def test_tendon_small_angle_first_order():
    # per joint, |dl| approaches tendon_radius * theta; frozen chord-model
    # values at one degree: +0.0304540278351737 (release side),
    # -0.0306317206534438 (pull side)
    m = len(SPEC.section1_joints)
    theta = math.radians(1.0)
    ts = tendon_lengths(SPEC, section_config(SPEC, m * theta, 0.0))
    per_joint_release = ts.displacements["down"] / m
    per_joint_pull = ts.displacements["up"] / m
    first_order = SPEC.tendon_radius * theta      # 0.0305432619099008
    assert per_joint_release == pytest.approx(0.0304540278351737, abs=1e-9)
    assert per_joint_pull == pytest.approx(-0.0306317206534438, abs=1e-9)
    assert abs(per_joint_release) == pytest.approx(first_order, rel=0.05)
    assert abs(per_joint_pull) == pytest.approx(first_order, rel=0.05)


def test_tendon_monotone_in_section_angle():
    alphas = np.radians(np.arange(-30, 31, 2.0))
    lengths = [tendon_lengths(SPEC, section_config(SPEC, a, 0.0))
               .lengths["down"] for a in alphas]
    assert all(b > a for a, b in zip(lengths, lengths[1:]))


# ----------------------------------------------------------------- actuate

def test_actuate_zero_steps():
    res = actuate(SPEC, (0, 0))
    assert res.config.joint_angles == (0.0,) * 12
    assert res.saturated == (False, False)


def test_actuate_inverse_round_trip():
    for a1, a2 in ((0.31, -0.22), (-0.45, 0.1), (0.05, 0.5)):
        d1 = -tendon_lengths(SPEC, section_config(SPEC, a1, 0.0)) \
            .displacements["up"]
        d2 = -tendon_lengths(SPEC, section_config(SPEC, a1, a2)) \
            .displacements["right"]
        back, sat = angles_for_travel(SPEC, d1, d2)
        assert back[0] == pytest.approx(a1, abs=1e-9)
        assert back[1] == pytest.approx(a2, abs=1e-9)
        assert sat == (False, False)


def test_actuate_plus_minus_returns_straight():
    res = actuate(SPEC, (150 - 150, 80 - 80))
    assert all(abs(a) <= 1e-9 for a in res.config.joint_angles)


def test_actuate_saturation():
    res = actuate(SPEC, (100000, -100000))
    lim1 = SPEC.section_angle_limit(1)
    lim2 = SPEC.section_angle_limit(2)
    assert res.saturated == (True, True)
    assert res.section_angles[0] == pytest.approx(lim1)
    assert res.section_angles[1] == pytest.approx(-lim2)
    for j, a in enumerate(res.config.joint_angles):
        assert abs(a) <= SPEC.joint.theta_max + 1e-12


def test_steps_round_trip():
    res = actuate(SPEC, (175, -60))
    k1, k2 = steps_for_angles(SPEC, *res.section_angles)
    assert (k1, k2) == (175, -60)


# --------------------------------------------------------------- workspace

def test_workspace_single_point():
    ws = workspace(SPEC, [0.0], [0.0])
    assert ws.rows.shape == (1, 5)
    np.testing.assert_allclose(ws.rows[0, 2:], [0, 0, 84.0], atol=0)


def test_workspace_grid_order_independent():
    lim = math.radians(30)
    grid = np.linspace(-lim, lim, 5)
    rng = np.random.default_rng(9)
    ws_a = workspace(SPEC, grid, grid)
    ws_b = workspace(SPEC, rng.permutation(grid), rng.permutation(grid))
    np.testing.assert_array_equal(ws_a.rows, ws_b.rows)


def test_workspace_limits_and_symmetry():
    lim = math.radians(30)
    grid = np.linspace(-lim, lim, 5)
    ws = workspace(SPEC, grid, grid)
    assert ws.max_bend["up"] == pytest.approx(lim)
    assert ws.max_bend["down"] == pytest.approx(lim)
    assert ws.max_bend["left"] == pytest.approx(lim)
    assert ws.max_bend["right"] == pytest.approx(lim)
    # mirror symmetry of the cloud under each section reflection
    rows = {(round(a1, 12), round(a2, 12)): (x, y, z)
            for a1, a2, x, y, z in ws.rows}
    for (a1, a2), (x, y, z) in rows.items():
        mx, my, mz = rows[(round(-a1, 12), round(a2, 12))]
        assert my == pytest.approx(-y, abs=1e-12)
        assert mx == pytest.approx(x, abs=1e-9)
        assert mz == pytest.approx(z, abs=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        ManipulatorSpec(joint=SPEC.joint, section1_joints=(0, 1),
                        section2_joints=(1, 2))
    with pytest.raises(ValueError):
        ManipulatorSpec(joint=SPEC.joint, tendon_radius=3.0)
    with pytest.raises(ValueError):
        ManipulatorSpec(joint=SPEC.joint, segment_count=1)


def test_pose3_identity_compose():
    p = Pose3.identity()
    q = p.compose(p)
    np.testing.assert_allclose(q.R, np.eye(3), atol=0)
    np.testing.assert_allclose(q.t, np.zeros(3), atol=0)
