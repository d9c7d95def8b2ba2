import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import L1, L2, L3, fk_homogeneous, jacobian_central

from uam_landing.kinematics import (
    ArmParams,
    JointConfig,
    SingularConfigurationError,
    UnreachableTargetError,
    differential_ik,
    ee_position,
    forward_kinematics,
    inverse_kinematics,
    inverse_kinematics_all,
    jacobian,
    sample_workspace,
    singularity_threshold,
    write_workspace_csv,
)

LEFT, RIGHT = ArmParams(side="left"), ArmParams(side="right")
REACH = L1 + L2 + L3

q1s = st.floats(-math.pi, math.pi, allow_nan=False)
q2s = st.floats(-math.pi / 2, math.pi / 2, allow_nan=False)
q3s = st.floats(-2.6, 2.6, allow_nan=False)


def test_zero_configuration_points_down():
    assert np.allclose(ee_position(LEFT, (0, 0, 0)), [0, 0, REACH], atol=1e-15)
    assert math.isclose(REACH, 0.721)


def test_pivot_quarter_turn():
    assert np.allclose(ee_position(LEFT, (math.pi / 2, 0, 0)), [0, -REACH, 0], atol=1e-15)


def test_wrist_quarter_turn_side_convention():
    assert np.allclose(ee_position(LEFT, (0, 0, math.pi / 2)), [0, -L3, L1 + L2], atol=1e-15)
    assert np.allclose(ee_position(RIGHT, (0, 0, math.pi / 2)), [0, L3, L1 + L2], atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(q1s, q2s, q3s)
def test_fk_matches_homogeneous_chain(a, b, c):
    for arm in (LEFT, RIGHT):
        assert np.allclose(ee_position(arm, (a, b, c)), fk_homogeneous((a, b, c), arm.side),
                           atol=1e-14)


def test_forward_kinematics_pose_frames():
    P = forward_kinematics(RIGHT, JointConfig(0.2, 0.1, -0.3))
    assert (P.from_frame, P.to_frame) == ("body", "ee_right")
    assert np.allclose(P.translation, fk_homogeneous((0.2, 0.1, -0.3), "right"), atol=1e-14)


def test_jacobian_zero_config_first_column():
    J = jacobian(LEFT, (0, 0, 0))
    assert np.allclose(J[:, 0], [0, -REACH, 0], atol=1e-15)


def test_stretched_arm_is_singular():
    assert abs(np.linalg.det(jacobian(LEFT, (0.4, 0.0, 0.0)))) < 1e-9


@settings(max_examples=200, deadline=None)
@given(q1s, q2s, q3s)
def test_mirror_symmetry(a, b, c):
    pl = ee_position(LEFT, (a, b, c))
    pr = ee_position(LEFT.mirrored(), (a, b, c))
    assert np.allclose(pr, pl * [1, -1, 1], atol=1e-14)


@settings(max_examples=300, deadline=None)
@given(q1s, q2s, q3s)
def test_reach_bound(a, b, c):
    assert np.linalg.norm(ee_position(LEFT, (a, b, c))) <= REACH + 1e-12


def test_ik_straight_down_contains_zero():
    sols = inverse_kinematics(LEFT, [0, 0, REACH])
    assert any(np.max(np.abs(s.as_array())) < 1e-9 for s in sols)


def test_ik_unreachable():
    with pytest.raises(UnreachableTargetError):
        inverse_kinematics(LEFT, [0, 0, REACH + 0.01])


def test_ik_orders_elbow_down_first():
    target = [0.1, -0.2, 0.4]
    res = inverse_kinematics_all(LEFT, target)
    assert len(res.solutions) >= 2
    elbows = [math.cos(s.q1) * (L1 + L2 * math.cos(s.q2)) for s in res.solutions]
    assert elbows == sorted(elbows, reverse=True)
    for s in res.solutions:
        assert s.validated
        assert np.allclose(ee_position(LEFT, s), target, atol=1e-9)


def test_ik_out_of_limit_solutions_are_rejected_not_returned():
    tight = ArmParams(joint_limits=((-0.5, 0.5), (-0.2, 0.2), (0.9, 2.6)))
    target = fk_homogeneous((0.1, 0.1, -0.8), "left")
    with pytest.raises(UnreachableTargetError):
        inverse_kinematics(tight, target)
    assert len(inverse_kinematics_all(tight, target).rejected) == 2


def test_differential_ik_examples():
    q = (0.3, 0.4, -0.9)
    assert np.array_equal(differential_ik(LEFT, q, [0, 0, 0]).as_array(), np.zeros(3))
    v = jacobian(LEFT, q) @ [0.1, 0.2, -0.1]
    assert np.allclose(differential_ik(LEFT, q, v).as_array(), [0.1, 0.2, -0.1], atol=1e-12)


def test_differential_ik_near_singular():
    with pytest.raises(SingularConfigurationError) as info:
        differential_ik(LEFT, (0.0, 0.3, 1e-9), [0, 0, 0.1])
    assert abs(info.value.det) < singularity_threshold(LEFT)


def test_jacobian_fd_with_mount_offset():
    arm = ArmParams(side="right", mount_offset=(0.05, -0.02, 0.01))
    q = np.array([0.7, -0.3, 1.1])
    J = jacobian_central(lambda x: ee_position(arm, x), q)
    assert np.allclose(jacobian(arm, q), J, atol=1e-8)


def test_workspace_counts_and_bounds(tmp_path):
    ws = sample_workspace(LEFT, 2)
    assert len(ws.points) == 8
    ws = sample_workspace(LEFT, 25)
    assert len(ws.points) == 15625
    assert np.all(np.linalg.norm(ws.points, axis=1) <= REACH + 1e-12)
    radial_yz = np.max(np.linalg.norm(ws.hull_yz, axis=1))
    assert radial_yz == pytest.approx(REACH, abs=1e-12)
    out = tmp_path / "w.csv"
    write_workspace_csv(ws, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "q1,q2,q3,x,y,z" and len(lines) == 15626


def test_workspace_resolution_checked():
    with pytest.raises(ValueError):
        sample_workspace(LEFT, 1)


def test_arm_params_validated():
    with pytest.raises(ValueError):
        ArmParams(L1=0.0)
    with pytest.raises(ValueError):
        ArmParams(joint_limits=((1, 0), (0, 1), (0, 1)))
    with pytest.raises(ValueError):
        ArmParams(side="middle")
