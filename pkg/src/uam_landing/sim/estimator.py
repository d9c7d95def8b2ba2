"""Onboard estimation chain: observer, gated detection, localization, plane fit.

Consumes telemetry rows only, so a recorded log replays to the same events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..contact import (
    ArmMotionSnapshot,
    ContactDetector,
    ContactEvent,
    DetectionConfig,
    NoCandidateArmError,
    localize,
)
from ..kinematics import JointConfig, JointVelocity
from ..observer import AllocationMap, BodyInertia, GyroSample, observer_step, reset
from ..se3 import EulerRPY, Pose, rpy_to_rot
from ..surface import PlaneEstimate, plane_from_three, plane_from_two

ARMED_PHASES = ("Probe",)


@dataclass(frozen=True)
class TelemetryInput:
    t: float
    p: tuple
    rpy: tuple
    omega: tuple
    u: tuple
    q: tuple  # per arm, 3 values each
    qd: tuple
    phase: str


class ContactEstimator:
    def __init__(self, inertia: BodyInertia, alloc: AllocationMap, arms, dt: float,
                 gain: float, detection: DetectionConfig):
        self.inertia = inertia
        self.alloc = alloc
        self.arms = tuple(arms)
        self.state = reset(dt, gain)
        self.detector = ContactDetector(detection)
        self.events: list[ContactEvent] = []
        self.body_x: list[np.ndarray] = []

    def process(self, row: TelemetryInput) -> tuple[np.ndarray, ContactEvent | None]:
        self.state, tau = observer_step(self.state, self.inertia, self.alloc,
                                        GyroSample(row.omega, row.u, row.t))
        self.detector.armed = row.phase in ARMED_PHASES
        if not self.detector.check(tau, row.t):
            return tau, None
        R = rpy_to_rot(EulerRPY(*row.rpy))
        pose = Pose(R, row.p, "world", "body")
        snaps = [ArmMotionSnapshot(a, JointConfig(*q), JointVelocity(*qd), pose)
                 for a, q, qd in zip(self.arms, row.q, row.qd)]
        try:
            ev = localize(tau, snaps, row.t)
        except NoCandidateArmError:
            return tau, None
        self.events.append(ev)
        self.body_x.append(R[:, 0].copy())
        return tau, ev

    def plane(self, n_points: int) -> PlaneEstimate | None:
        if len(self.events) < n_points:
            return None
        pts = [np.asarray(e.p_c_world) for e in self.events[:n_points]]
        if n_points == 3:
            return plane_from_three(*pts)
        return plane_from_two(pts[0], pts[1], self.body_x[1])
