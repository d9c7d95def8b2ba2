"""Quasi-static vehicle plant.

Translation tracks the commanded velocity through a first-order lag (position
control is treated as solved). Rotation integrates Euler's equation with rotor
moments and contact torques. Arms follow commanded joint rates exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kinematics import ee_position, jacobian
from ..se3 import hat, orthonormalize, rot_x, rot_y, rot_z, so3_exp
from .config import WorldPlane


@dataclass(frozen=True)
class ContactResult:
    torque: np.ndarray  # world frame, about the body origin
    force: np.ndarray  # world frame
    in_contact: bool
    penetration: float


def contact_model(ee_world, ee_velocity_world, world: WorldPlane, body_position,
                  stiffness: float = 2000.0, damping: float = 10.0) -> ContactResult:
    """Penalty contact of a point against the (finite) world plane.

    Normal force k*d + c*d_dot along the upward normal, never pulling.
    """
    p = np.asarray(ee_world, float)
    h = world.height_above(p)
    if h >= 0.0 or not world.contains_xy(p):
        return ContactResult(np.zeros(3), np.zeros(3), False, 0.0)
    n = world.true_normal
    depth = -h
    depth_rate = -float(np.asarray(ee_velocity_world, float) @ n)
    mag = max(0.0, stiffness * depth + damping * depth_rate)
    F = mag * n
    tau = np.cross(p - np.asarray(body_position, float), F)
    return ContactResult(tau, F, True, depth)


@dataclass
class VehicleState:
    p: np.ndarray
    v: np.ndarray
    R: np.ndarray
    omega: np.ndarray
    q: list  # per-arm joint arrays
    qd: list
    phase: str = "Approach"
    tau_ext: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body frame, last step
    contacts: tuple = ()  # per-arm ground-truth contact flags, last step

    def copy(self) -> VehicleState:
        return VehicleState(self.p.copy(), self.v.copy(), self.R.copy(), self.omega.copy(),
                            [q.copy() for q in self.q], [qd.copy() for qd in self.qd],
                            self.phase, self.tau_ext.copy(), self.contacts)


@dataclass(frozen=True)
class PlantInputs:
    v_cmd: np.ndarray  # world m/s
    u: np.ndarray  # rotor thrusts (N)
    qd_cmd: tuple  # per-arm joint rates


@dataclass(frozen=True)
class PlantModel:
    inertia: np.ndarray  # true plant inertia
    N_O: np.ndarray
    arms: tuple
    vel_lag: float = 0.02
    stiffness: float = 2000.0
    damping: float = 10.0


def ee_world_state(model: PlantModel, state: VehicleState, arm_idx: int, qd=None):
    """World position and velocity of one end-effector."""
    arm = model.arms[arm_idx]
    pe = ee_position(arm, state.q[arm_idx])
    qd = state.qd[arm_idx] if qd is None else qd
    ve = jacobian(arm, state.q[arm_idx]) @ np.asarray(qd, float)
    pw = state.p + state.R @ pe
    vw = state.v + state.R @ (np.cross(state.omega, pe) + ve)
    return pw, vw


def contact_torques(model: PlantModel, state: VehicleState, world: WorldPlane, qd_cmd):
    tau_w = np.zeros(3)
    flags = []
    for j in range(len(model.arms)):
        pw, vw = ee_world_state(model, state, j, qd_cmd[j])
        c = contact_model(pw, vw, world, state.p, model.stiffness, model.damping)
        tau_w += c.torque
        flags.append(c.in_contact)
    return state.R.T @ tau_w, tuple(flags)


def step_plant(state: VehicleState, inputs: PlantInputs, world: WorldPlane, dt: float,
               model: PlantModel, tau_extra=None) -> VehicleState:
    """Advance one fixed step.

    Angular rate uses a linearly implicit update,
    (I - dt [L_k]x) w_{k+1} = L_k + dt (N_O u + tau_ext),
    whose gyroscopic work w_{k+1} . (w_{k+1} x L_k) vanishes, so torque-free
    kinetic energy can only decrease.
    """
    tau_ext, flags = contact_torques(model, state, world, inputs.qd_cmd)
    if tau_extra is not None:
        tau_ext = tau_ext + np.asarray(tau_extra, float)
    I = model.inertia
    L = I @ state.omega
    M = model.N_O @ np.asarray(inputs.u, float) + tau_ext
    omega = np.linalg.solve(I - dt * hat(L), L + dt * M)
    R = state.R @ so3_exp(omega * dt)
    if not np.allclose(R @ R.T, np.eye(3), atol=1e-12, rtol=0):
        R = orthonormalize(R)
    a = min(1.0, dt / model.vel_lag) if model.vel_lag > 0 else 1.0
    v = state.v + a * (np.asarray(inputs.v_cmd, float) - state.v)
    p = state.p + v * dt
    q = [qi + np.asarray(qdi, float) * dt for qi, qdi in zip(state.q, inputs.qd_cmd)]
    qd = [np.asarray(qdi, float).copy() for qdi in inputs.qd_cmd]
    return VehicleState(p, v, R, omega, q, qd, state.phase, tau_ext, flags)


def rotational_energy(I, omega) -> float:
    return 0.5 * float(omega @ (np.asarray(I) @ omega))


@dataclass(frozen=True)
class AttitudeController:
    """PD attitude loop on the SO(3) error with per-axis gains from the nominal inertia."""

    inertia: np.ndarray
    natural_freq: float = 30.0
    damping: float = 1.0

    def moment(self, R: np.ndarray, R_ref: np.ndarray, omega_meas) -> np.ndarray:
        Id = np.diag(self.inertia)
        kp = Id * self.natural_freq ** 2
        kd = Id * 2.0 * self.damping * self.natural_freq
        E = R_ref.T @ R - R.T @ R_ref
        e_R = 0.5 * np.array([E[2, 1], E[0, 2], E[1, 0]])
        return -kp * e_R - kd * np.asarray(omega_meas, float)


def tilt_reference(yaw: float, accel_world, g: float = 9.81) -> np.ndarray:
    """Attitude a multirotor takes to produce a horizontal acceleration at given yaw."""
    ax, ay = float(accel_world[0]), float(accel_world[1])
    c, s = math.cos(yaw), math.sin(yaw)
    fwd = c * ax + s * ay
    right = -s * ax + c * ay
    pitch = -math.atan2(fwd, g)
    roll = math.atan2(right, g)
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)
