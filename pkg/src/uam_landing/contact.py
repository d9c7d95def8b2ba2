"""Contact detection and attribution of a detected contact to an arm."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .kinematics import ArmParams, JointConfig, JointVelocity, ee_position, jacobian
from .se3 import Pose

log = logging.getLogger(__name__)

MOTION_EPS = 1e-9
TIE_EPS = 1e-6


class StationaryArmError(ValueError):
    pass


class DegenerateTorqueError(ValueError):
    pass


class NoCandidateArmError(ValueError):
    pass


@dataclass(frozen=True)
class DetectionConfig:
    threshold: float = 0.15  # N m, on the largest torque component
    timeout: float = 0.5  # s
    armed: bool = True

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class ArmMotionSnapshot:
    params: ArmParams
    q: JointConfig
    qd: JointVelocity
    body_pose: Pose  # H^w_b

    @property
    def p_e(self) -> np.ndarray:
        return ee_position(self.params, self.q)


@dataclass(frozen=True)
class ContactEvent:
    time: float
    arm_id: int  # 1-based index into the arm list
    p_c_world: tuple
    tau_observed: tuple
    match_angle: float
    tie: bool = False


def detect(tau_hat, config: DetectionConfig, clock: float, last_event_time: float | None) -> bool:
    if not config.armed:
        return False
    if float(np.max(np.abs(tau_hat))) <= config.threshold:
        return False
    return last_event_time is None or clock - last_event_time > config.timeout


def virtual_force(arm: ArmMotionSnapshot) -> np.ndarray:
    """Unit force opposing the end-effector's current velocity."""
    v = jacobian(arm.params, arm.q) @ arm.qd.as_array()
    n = float(np.linalg.norm(v))
    if n <= MOTION_EPS:
        raise StationaryArmError(f"{arm.params.side} arm is not moving")
    return -v / n


def virtual_torque(arm: ArmMotionSnapshot) -> np.ndarray:
    f = virtual_force(arm)
    p = arm.p_e
    tau = np.cross(p, f)
    if float(np.linalg.norm(tau)) <= MOTION_EPS * max(1.0, float(np.linalg.norm(p))):
        raise DegenerateTorqueError(f"{arm.params.side} arm moves along its own lever")
    return tau


def angle_between(a, b) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = float(a @ b) / (float(np.linalg.norm(a)) * float(np.linalg.norm(b)))
    return math.acos(min(1.0, max(-1.0, c)))


def localize(tau_hat, arms: list, time: float = 0.0) -> ContactEvent:
    """Pick the arm whose virtual torque points closest to the observed torque."""
    tau_hat = np.asarray(tau_hat, float)
    if not float(np.linalg.norm(tau_hat)) > 0:
        raise ValueError("observed torque is zero")
    angles = []
    for j, arm in enumerate(arms):
        try:
            tv = virtual_torque(arm)
        except (StationaryArmError, DegenerateTorqueError) as exc:
            log.debug("arm %d excluded: %s", j + 1, exc)
            continue
        angles.append((angle_between(tau_hat, tv), j))
    if not angles:
        raise NoCandidateArmError("no moving arm can explain the torque")
    best = min(a for a, _ in angles)
    close = [(j, a) for a, j in angles if a - best < TIE_EPS]
    j, best = min(close)
    tie = len(close) > 1
    if tie:
        log.warning("ambiguous contact match (angle %.3g rad); taking arm %d", best, j + 1)
    arm = arms[j]
    p_c = arm.body_pose.apply(arm.p_e)
    return ContactEvent(float(time), j + 1, tuple(float(v) for v in p_c),
                        tuple(float(v) for v in tau_hat), best, tie)


class ContactDetector:
    """Stateful threshold + debounce + arming wrapper around :func:`detect`."""

    def __init__(self, config: DetectionConfig):
        self.config = config
        self.armed = config.armed
        self.last_event_time: float | None = None

    def check(self, tau_hat, clock: float) -> bool:
        cfg = DetectionConfig(self.config.threshold, self.config.timeout, self.armed)
        if detect(tau_hat, cfg, clock, self.last_event_time):
            self.last_event_time = clock
            return True
        return False
