"""Momentum-based external torque observer for the vehicle body.

Only the body's angular momentum is tracked (arm momenta are neglected), and
the residual is formed against gyroscopic and rotor moments:

    tau_hat(d) = K * ( I w(d) - L0 + h(d) dt + sum_{i<d} (h(i) - tau_hat(i)) dt )
    h = w x I w - N_O u

With K = 1 this is exactly the textbook discretization; K sets the
estimator bandwidth in 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .se3 import rot_x, rot_y

# platform geometry and masses
BODY_LENGTH = 0.352
BODY_WIDTH = 0.110
ROTOR_ARM = 0.160
BODY_MASS = 1.287
BATTERY_MASS = 0.828
LINK_MASSES = (0.236, 0.304, 0.061)

# Assumed: stack height of the body box and rotor drag/thrust ratio.
BODY_HEIGHT = 0.08
YAW_COEFF = 0.016
DEFAULT_GAIN = 25.0


class NonFiniteInputError(ValueError):
    pass


@dataclass(frozen=True)
class BodyInertia:
    I: np.ndarray

    def __post_init__(self):
        I = np.array(self.I, dtype=float).reshape(3, 3)
        if np.max(np.abs(I - I.T)) > 1e-12:
            raise ValueError("inertia must be symmetric")
        if np.min(np.linalg.eigvalsh(I)) <= 0:
            raise ValueError("inertia must be positive definite")
        I.setflags(write=False)
        object.__setattr__(self, "I", I)

    @classmethod
    def box(cls, mass: float, lx: float, ly: float, lz: float) -> BodyInertia:
        return cls(np.diag([
            mass / 12.0 * (ly * ly + lz * lz),
            mass / 12.0 * (lx * lx + lz * lz),
            mass / 12.0 * (lx * lx + ly * ly),
        ]))

    @classmethod
    def default(cls) -> BodyInertia:
        """Box over the rotor footprint carrying body plus both batteries."""
        reach = 2.0 * ROTOR_ARM * math.cos(math.pi / 4)
        return cls.box(BODY_MASS + 2 * BATTERY_MASS, BODY_LENGTH + reach, BODY_WIDTH + reach, BODY_HEIGHT)

    def scaled(self, factor: float) -> BodyInertia:
        return BodyInertia(self.I * factor)


@dataclass(frozen=True)
class AllocationMap:
    """Rotor thrusts (N, along body -z) to body moments (N m).

    Rotors sit at the body corners pushed out diagonally by the rotor arm
    length; order is front-right, rear-left, front-left, rear-right with spin
    directions (+1 = CCW seen from above) giving the usual X layout.
    """

    N_O: np.ndarray
    positions: np.ndarray
    spins: tuple

    @classmethod
    def x_quad(cls, body_length=BODY_LENGTH, body_width=BODY_WIDTH, rotor_arm=ROTOR_ARM,
               yaw_coeff=YAW_COEFF) -> AllocationMap:
        d = rotor_arm * math.cos(math.pi / 4)
        ax, ay = body_length / 2 + d, body_width / 2 + d
        pos = np.array([[ax, ay, 0.0], [-ax, -ay, 0.0], [ax, -ay, 0.0], [-ax, ay, 0.0]])
        spins = (1, 1, -1, -1)
        N = np.zeros((3, 4))
        for i, (p, sp) in enumerate(zip(pos, spins)):
            # thrust F = (0, 0, -u): moment p x F; CCW rotor reacts with +z (down) yaw torque in FRD
            N[0, i] = -p[1]
            N[1, i] = p[0]
            N[2, i] = sp * yaw_coeff
        N.setflags(write=False)
        return cls(N, pos, spins)

    def full(self) -> np.ndarray:
        """4x4 map from thrusts to (total thrust, moments)."""
        return np.vstack([np.ones((1, 4)), self.N_O])

    def thrusts_for(self, thrust: float, moment) -> np.ndarray:
        return np.linalg.solve(self.full(), np.concatenate([[thrust], np.asarray(moment, float)]))


@dataclass(frozen=True)
class GyroSample:
    omega: tuple
    u: tuple
    timestamp: float


@dataclass(frozen=True)
class ObserverState:
    tau_hat: tuple = (0.0, 0.0, 0.0)
    running_sum: tuple = (0.0, 0.0, 0.0)
    t_d: int = 0
    dt: float = 0.004
    gain: float = DEFAULT_GAIN
    initial_momentum: tuple = (0.0, 0.0, 0.0)
    last_timestamp: float = -math.inf


def reset(dt: float, gain: float = DEFAULT_GAIN, initial_momentum=(0.0, 0.0, 0.0)) -> ObserverState:
    """Fresh estimator; the vehicle is assumed at rest, so L(t0) = 0 by default."""
    if not dt > 0 or not math.isfinite(dt):
        raise ValueError(f"dt must be positive, got {dt}")
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    return ObserverState(dt=float(dt), gain=float(gain),
                         initial_momentum=tuple(float(v) for v in initial_momentum))


def observer_step(state: ObserverState, inertia: BodyInertia, alloc: AllocationMap,
                  sample: GyroSample) -> tuple[ObserverState, np.ndarray]:
    w = tuple(float(v) for v in sample.omega)
    u = tuple(float(v) for v in sample.u)
    if not all(math.isfinite(v) for v in w + u + (sample.timestamp,)):
        raise NonFiniteInputError(f"non-finite gyro sample at t={sample.timestamp}")
    if sample.timestamp < state.last_timestamp:
        raise ValueError(f"sample at {sample.timestamp} precedes {state.last_timestamp}")
    tau, rsum = kernels.observer_update(
        inertia.I.ravel(), alloc.N_O.ravel(), w, u, state.dt, state.gain,
        state.initial_momentum, state.running_sum,
    )
    new = ObserverState(tau, rsum, state.t_d + 1, state.dt, state.gain,
                        state.initial_momentum, float(sample.timestamp))
    return new, np.array(tau)


def run_observer(inertia: BodyInertia, alloc: AllocationMap, omega, u, dt: float,
                 gain: float = DEFAULT_GAIN, initial_momentum=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Batch form over whole (N, 3) gyro and (N, 4) rotor streams."""
    return kernels.observer_run(inertia.I, alloc.N_O, omega, u, dt, gain, initial_momentum)


def _link_midpoints(arm, q) -> np.ndarray:
    s = arm.sign
    mount = np.asarray(arm.mount_offset)
    Ra = rot_x(s * q[0])
    Rb = Ra @ rot_y(q[1])
    Rc = Rb @ rot_x(s * q[2])
    z = np.array([0.0, 0.0, 1.0])
    elbow0 = Ra @ (arm.L1 * z)
    elbow1 = elbow0 + Rb @ (arm.L2 * z)
    return np.array([
        mount + 0.5 * elbow0,
        mount + elbow0 + Rb @ (0.5 * arm.L2 * z),
        mount + elbow1 + Rc @ (0.5 * arm.L3 * z),
    ])


def dropped_arm_momentum(arm, q, qd, link_masses=LINK_MASSES, h: float = 1e-7) -> float:
    """Size of the arm angular momentum the observer neglects (diagnostic).

    Links are point masses at their midpoints: returns |sum m_i p_i x v_i|.
    """
    q = np.asarray(q, float)
    qd = np.asarray(qd, float)
    p = _link_midpoints(arm, q)
    v = (_link_midpoints(arm, q + h * qd) - _link_midpoints(arm, q - h * qd)) / (2 * h)
    total = sum(m * np.cross(pi, vi) for m, pi, vi in zip(link_masses, p, v))
    return float(np.linalg.norm(total))
