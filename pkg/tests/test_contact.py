import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uam_landing.contact import (
    ArmMotionSnapshot,
    ContactDetector,
    DegenerateTorqueError,
    DetectionConfig,
    NoCandidateArmError,
    StationaryArmError,
    detect,
    localize,
    virtual_force,
    virtual_torque,
)
from uam_landing.kinematics import (
    ArmParams,
    JointConfig,
    JointVelocity,
    differential_ik,
    inverse_kinematics,
    jacobian,
)
from uam_landing.se3 import Pose

BODY = Pose(np.eye(3), np.zeros(3), "world", "body")


def snapshot(side, target, v, pose=BODY):
    arm = ArmParams(side=side)
    q = inverse_kinematics(arm, target)[0]
    qd = differential_ik(arm, q, v)
    return ArmMotionSnapshot(arm, q, qd, pose)


def test_detect_examples():
    cfg = DetectionConfig(threshold=0.2, timeout=0.5)
    assert detect([0.3, 0, 0], cfg, 1.0, None)
    assert not detect([0.3, 0, 0], cfg, 1.0, 0.7)
    assert not detect([0.3, 0, 0], DetectionConfig(0.2, 0.5, armed=False), 1.0, None)
    assert not detect([0.2, 0, 0], cfg, 1.0, None)  # strictly above
    assert detect([0.0, -0.3, 0], cfg, 1.0, None)  # per-axis magnitude


def test_detection_config_validated():
    with pytest.raises(ValueError):
        DetectionConfig(threshold=0)
    with pytest.raises(ValueError):
        DetectionConfig(timeout=-1)


def test_virtual_force_opposes_motion():
    s = snapshot("left", [0, -0.4, 0.3], [0, 0, 0.1])
    assert np.allclose(virtual_force(s), [0, 0, -1], atol=1e-12)
    v = jacobian(s.params, s.q) @ s.qd.as_array()
    assert float(virtual_force(s) @ v) == pytest.approx(-np.linalg.norm(v), rel=1e-12)


def test_stationary_arm():
    arm = ArmParams()
    s = ArmMotionSnapshot(arm, JointConfig(0.2, 0.3, 0.4), JointVelocity(0, 0, 0), BODY)
    with pytest.raises(StationaryArmError):
        virtual_force(s)


def test_virtual_torque_hand_cross_products():
    left = snapshot("left", [0, -0.4, 0.3], [0, 0, 0.1])
    right = snapshot("right", [0, 0.4, 0.3], [0, 0, 0.1])
    assert np.allclose(virtual_torque(left), [0.4, 0, 0], atol=1e-12)
    assert np.allclose(virtual_torque(right), [-0.4, 0, 0], atol=1e-12)


def test_degenerate_torque():
    s = snapshot("left", [0, 0, 0.5], [0, 0, 0.1])  # motion along its own lever
    with pytest.raises(DegenerateTorqueError):
        virtual_torque(s)


def test_localize_hand_angle():
    left = snapshot("left", [0, -0.4, 0.3], [0, 0, 0.1])
    right = snapshot("right", [0, 0.4, 0.3], [0, 0, 0.1])
    tau = np.array([0.35, 0.02, -0.01])
    ev = localize(tau, [left, right], 2.0)
    expected = math.acos(0.35 * 0.4 / (0.4 * math.sqrt(0.35**2 + 0.02**2 + 0.01**2)))
    assert ev.arm_id == 1
    assert ev.match_angle == pytest.approx(expected, abs=1e-12)


def test_localize_exact_match_and_contact_point():
    pose = Pose(np.eye(3), [1, 2, -3], "world", "body")
    left = snapshot("left", [0, -0.4, 0.3], [0, 0, 0.1], pose)
    right = snapshot("right", [0, 0.4, 0.3], [0, 0, 0.1], pose)
    ev = localize(virtual_torque(right), [left, right])
    assert ev.arm_id == 2 and ev.match_angle == 0.0
    ev = localize([0.4, 0, 0], [left, right])
    assert np.allclose(ev.p_c_world, [1, 1.6, -2.7], atol=1e-12)


def test_tie_lowest_index_wins(caplog):
    a = snapshot("left", [0, -0.4, 0.3], [0, 0, 0.1])
    with caplog.at_level(logging.WARNING):
        ev = localize([0.4, 0, 0], [a, a])
    assert ev.arm_id == 1 and ev.tie
    assert "ambiguous" in caplog.text


def test_no_candidates():
    arm = ArmParams()
    s = ArmMotionSnapshot(arm, JointConfig(0.2, 0.3, 0.4), JointVelocity(0, 0, 0), BODY)
    with pytest.raises(NoCandidateArmError):
        localize([0.3, 0, 0], [s, s])


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_scale_invariance(scale, a, b, c):
    tau = np.array([a, b, c])
    if np.linalg.norm(tau) < 1e-3:
        return
    left = snapshot("left", [0.1, -0.4, 0.3], [0, 0.02, 0.1])
    right = snapshot("right", [-0.05, 0.4, 0.35], [0.01, 0, 0.1])
    assert localize(tau, [left, right]).arm_id == localize(scale * tau, [left, right]).arm_id


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.booleans()), min_size=1, max_size=400),
       st.floats(0.01, 1.0))
def test_detector_never_fires_disarmed_or_inside_window(script, timeout):
    det = ContactDetector(DetectionConfig(0.15, timeout))
    fired = []
    for k, (mag, armed) in enumerate(script):
        det.armed = armed
        if det.check([mag, 0, 0], k * 0.004):
            assert armed and mag > 0.15
            fired.append(k * 0.004)
    assert all(b - a > timeout for a, b in zip(fired, fired[1:]))
