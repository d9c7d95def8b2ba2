"""Rigid-body geometry: rotations, Z-Y-X Euler angles and frame-labelled poses.

Frames follow NED (world) and FRD (body), so +z points down in both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Compositions allowed before a pose's rotation is re-orthonormalized.
REORTHO_EVERY = 100
GIMBAL_EPS = 1e-9


class FrameMismatchError(ValueError):
    pass


class GimbalLockError(ValueError):
    pass


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector: {a}")
    return a


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def hat(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(W: np.ndarray) -> np.ndarray:
    return 0.5 * np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]])


def so3_exp(w) -> np.ndarray:
    """Rodrigues formula for a rotation vector."""
    w = np.asarray(w, dtype=float)
    th = math.sqrt(float(w @ w))
    W = hat(w)
    if th < 1e-8:
        return np.eye(3) + W + 0.5 * (W @ W)
    return np.eye(3) + (math.sin(th) / th) * W + ((1.0 - math.cos(th)) / (th * th)) * (W @ W)


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Closest rotation in the Frobenius sense (polar factor via SVD)."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] *= -1.0
        Q = U @ Vt
    return Q


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(np.max(np.abs(R @ R.T - np.eye(3))) <= tol and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True)
class EulerRPY:
    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.roll, self.pitch, self.yaw)):
            raise ValueError("non-finite Euler angle")
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise GimbalLockError(f"pitch {self.pitch} outside (-pi/2, pi/2)")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.roll, self.pitch, self.yaw)


def rpy_to_rot(e: EulerRPY) -> np.ndarray:
    """Z-Y-X intrinsic: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(e.roll), math.sin(e.roll)
    cp, sp = math.cos(e.pitch), math.sin(e.pitch)
    cy, sy = math.cos(e.yaw), math.sin(e.yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def rot_to_rpy(R: np.ndarray) -> EulerRPY:
    R = np.asarray(R, dtype=float)
    if abs(R[2, 0]) >= 1.0 - GIMBAL_EPS:
        raise GimbalLockError(f"R[2,0]={R[2, 0]} at gimbal lock")
    pitch = math.asin(-R[2, 0])
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return EulerRPY(roll, pitch, yaw)


@dataclass(frozen=True)
class Pose:
    """Pose of frame ``to_frame`` expressed in frame ``from_frame``.

    ``Pose(R, t, "world", "body")`` is H^w_b, mapping body coordinates into
    world coordinates: p_world = R @ p_body + t.
    """

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: str = "world"
    to_frame: str = "body"
    _count: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = as_vec3(self.translation).copy()
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls, from_frame: str = "world", to_frame: str = "world") -> Pose:
        return cls(np.eye(3), np.zeros(3), from_frame, to_frame)

    @classmethod
    def from_rpy(cls, rpy: EulerRPY, t, from_frame="world", to_frame="body") -> Pose:
        return cls(rpy_to_rot(rpy), t, from_frame, to_frame)

    def apply(self, p) -> np.ndarray:
        return self.rotation @ as_vec3(p) + self.translation

    def inverse(self) -> Pose:
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation, self.to_frame, self.from_frame)

    def matrix(self) -> np.ndarray:
        H = np.eye(4)
        H[:3, :3] = self.rotation
        H[:3, 3] = self.translation
        return H

    def __matmul__(self, other: Pose) -> Pose:
        return compose(self, other)


def compose(a: Pose, b: Pose, check: bool = True) -> Pose:
    """Chain H^x_y (a) with H^y_z (b) into H^x_z. Requires a.to_frame == b.from_frame."""
    if check and a.to_frame != b.from_frame:
        raise FrameMismatchError(
            f"cannot chain {a.from_frame}->{a.to_frame} with {b.from_frame}->{b.to_frame}"
        )
    R = a.rotation @ b.rotation
    count = max(a._count, b._count) + 1
    if count >= REORTHO_EVERY:
        R = orthonormalize(R)
        count = 0
    t = a.rotation @ b.translation + a.translation
    return Pose(R, t, a.from_frame, b.to_frame, count)
