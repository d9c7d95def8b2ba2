"""Position kinematics of one 3R arm on the pivot joint.

Convention (all tests are written against it):

* joint 1 (pivot) rotates about the body x-axis;
* at q = (0, 0, 0) the arm hangs straight down (+z, FRD) with collinear links;
* joint 2 tilts the distal chain out of the pivot plane (about the local y-axis);
* joint 3 (elbow) is parallel to joint 1 when q2 = 0.

The chain is ``Rx(s*q1) Tz(L1) Ry(q2) Tz(L2) Rx(s*q3) Tz(L3)`` plus the mount
offset, where s = +1 for the left arm and -1 for the right arm. A positive
pivot angle therefore swings either arm outward, and the two arms are
y-mirror images of each other for equal joint vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import kernels
from .se3 import Pose, rot_x, rot_y

# link lengths (m)
L1_DEFAULT = 0.118
L2_DEFAULT = 0.330
L3_DEFAULT = 0.273

DEFAULT_LIMITS = ((-math.pi, math.pi), (-math.pi / 2, math.pi / 2), (-2.6, 2.6))


class UnreachableTargetError(ValueError):
    pass


class SingularConfigurationError(ValueError):
    def __init__(self, det: float, threshold: float):
        super().__init__(f"|det(J)| = {abs(det):.3e} below threshold {threshold:.3e}")
        self.det = det
        self.threshold = threshold


@dataclass(frozen=True)
class ArmParams:
    L1: float = L1_DEFAULT
    L2: float = L2_DEFAULT
    L3: float = L3_DEFAULT
    joint_limits: tuple = DEFAULT_LIMITS
    side: str = "left"
    mount_offset: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.L1, self.L2, self.L3) <= 0:
            raise ValueError("link lengths must be positive")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        lims = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
        if len(lims) != 3 or any(lo >= hi for lo, hi in lims):
            raise ValueError(f"bad joint limits {self.joint_limits}")
        object.__setattr__(self, "joint_limits", lims)
        object.__setattr__(self, "mount_offset", tuple(float(v) for v in self.mount_offset))

    @property
    def sign(self) -> float:
        return 1.0 if self.side == "left" else -1.0

    @property
    def reach(self) -> float:
        return self.L1 + self.L2 + self.L3

    def mirrored(self) -> ArmParams:
        mx, my, mz = self.mount_offset
        return ArmParams(
            self.L1, self.L2, self.L3, self.joint_limits,
            "right" if self.side == "left" else "left", (mx, -my, mz),
        )


@dataclass(frozen=True)
class JointConfig:
    q1: float
    q2: float
    q3: float
    validated: bool = field(default=False, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3])

    @classmethod
    def from_array(cls, q, validated: bool = False) -> JointConfig:
        return cls(float(q[0]), float(q[1]), float(q[2]), validated)


@dataclass(frozen=True)
class JointVelocity:
    qd1: float
    qd2: float
    qd3: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.qd1, self.qd2, self.qd3)):
            raise ValueError("non-finite joint velocity")

    def as_array(self) -> np.ndarray:
        return np.array([self.qd1, self.qd2, self.qd3])


def within_limits(params: ArmParams, q, tol: float = 0.0) -> bool:
    q = np.asarray(q.as_array() if isinstance(q, JointConfig) else q, dtype=float)
    return all(lo - tol <= v <= hi + tol for v, (lo, hi) in zip(q, params.joint_limits))


def _q(q) -> tuple[float, float, float]:
    if isinstance(q, JointConfig):
        return q.q1, q.q2, q.q3
    return float(q[0]), float(q[1]), float(q[2])


def ee_position(params: ArmParams, q) -> np.ndarray:
    """End-effector position in the body frame (m)."""
    q1, q2, q3 = _q(q)
    x, y, z = kernels.fk(params.L1, params.L2, params.L3, params.sign, q1, q2, q3)
    m = params.mount_offset
    return np.array([x + m[0], y + m[1], z + m[2]])


def forward_kinematics(params: ArmParams, q) -> Pose:
    """H^b_e: the end-effector frame expressed in the body frame."""
    q1, q2, q3 = _q(q)
    s = params.sign
    R = rot_x(s * q1) @ rot_y(q2) @ rot_x(s * q3)
    return Pose(R, ee_position(params, q), "body", f"ee_{params.side}")


def jacobian(params: ArmParams, q) -> np.ndarray:
    q1, q2, q3 = _q(q)
    J = kernels.jacobian(params.L1, params.L2, params.L3, params.sign, q1, q2, q3)
    return np.array(J).reshape(3, 3)


def singularity_threshold(params: ArmParams) -> float:
    return 1e-6 * params.L2 * params.L3


def differential_ik(params: ArmParams, q, v) -> JointVelocity:
    """Joint rates producing body-frame end-effector velocity ``v``."""
    J = jacobian(params, q)
    det = float(np.linalg.det(J))
    thr = singularity_threshold(params)
    if abs(det) < thr:
        raise SingularConfigurationError(det, thr)
    qd = np.linalg.solve(J, np.asarray(v, dtype=float))
    return JointVelocity(float(qd[0]), float(qd[1]), float(qd[2]))


def _wrap(a: float) -> float:
    a = math.remainder(a, 2.0 * math.pi)
    return math.pi if a == -math.pi else a


def _elbow_z(params: ArmParams, q) -> float:
    q1, q2, _ = _q(q)
    return math.cos(params.sign * q1) * (params.L1 + params.L2 * math.cos(q2))


@dataclass
class IKResult:
    solutions: list
    rejected: list  # out-of-limit solutions, kept for diagnostics


def _ik_candidates(params: ArmParams, p: np.ndarray) -> list:
    L1, L2, L3 = params.L1, params.L2, params.L3
    s = params.sign
    px, py, pz = p
    r2 = px * px + py * py + pz * pz
    K = r2 - L1 * L1 - L2 * L2 - L3 * L3
    # (K - 2 L2 L3 C)^2 = 4 L1^2 ((L2 + L3 C)^2 - px^2),  C = cos(elbow)
    qa = 4.0 * L3 * L3 * (L2 * L2 - L1 * L1)
    qb = -4.0 * K * L2 * L3 - 8.0 * L1 * L1 * L2 * L3
    qc = K * K - 4.0 * L1 * L1 * L2 * L2 + 4.0 * L1 * L1 * px * px
    roots = []
    if abs(qa) < 1e-14:
        if abs(qb) > 1e-14:
            roots.append(-qc / qb)
    else:
        disc = qb * qb - 4.0 * qa * qc
        scale = qb * qb + abs(4.0 * qa * qc)
        if disc < 0.0 and disc > -1e-9 * scale:
            disc = 0.0
        if disc >= 0.0:
            sq = math.sqrt(disc)
            # numerically stable pair
            t = -0.5 * (qb + math.copysign(sq, qb))
            if t != 0.0:
                roots += [t / qa, qc / t]
            else:
                roots.append(-qb / (2.0 * qa))
    out = []
    for C in roots:
        if C < -1.0 - 1e-9 or C > 1.0 + 1e-9:
            continue
        C = min(1.0, max(-1.0, C))
        A = L2 + L3 * C
        if abs(A) < 1e-12:
            continue
        B = (K - 2.0 * L2 * L3 * C) / (2.0 * L1)
        q2 = math.atan2(px, B) if A > 0 else math.atan2(-px, -B)
        for c in {math.acos(C), -math.acos(C)}:
            vy = -L3 * math.sin(c)
            vz = L1 + A * math.cos(q2)
            a = math.atan2(pz, py) - math.atan2(vz, vy)
            out.append(np.array([_wrap(s * a), q2, s * c]))
    return out


def _polish(params: ArmParams, q: np.ndarray, target: np.ndarray, iters: int = 4) -> np.ndarray:
    """Newton refinement of an algebraic IK solution against the FK residual."""
    best = q
    best_err = float(np.linalg.norm(ee_position(params, q) - target))
    for _ in range(iters):
        if best_err < 1e-15:
            break
        J = jacobian(params, best)
        try:
            dq = np.linalg.solve(J, target - ee_position(params, best))
        except np.linalg.LinAlgError:
            break
        cand = best + dq
        err = float(np.linalg.norm(ee_position(params, cand) - target))
        if err >= best_err:
            break
        best, best_err = cand, err
    best = best.copy()
    best[0] = _wrap(best[0])
    return best


def inverse_kinematics_all(params: ArmParams, target, tol: float = 1e-9) -> IKResult:
    p = np.asarray(target, dtype=float) - np.asarray(params.mount_offset)
    dist = float(np.linalg.norm(p))
    if dist > params.reach + tol:
        raise UnreachableTargetError(f"target at {dist:.4f} m beyond reach {params.reach:.4f} m")
    sols = []
    for q in _ik_candidates(params, p):
        q = _polish(params, q, p + np.asarray(params.mount_offset))
        if np.linalg.norm(ee_position(params, q) - (p + params.mount_offset)) > tol:
            continue
        if any(np.max(np.abs(q - o)) < 1e-7 for o in sols):
            continue
        sols.append(q)
    if not sols:
        raise UnreachableTargetError(f"no solution for target {np.asarray(target)}")
    # elbow-down (elbow lowest, largest z) first
    sols.sort(key=lambda q: -_elbow_z(params, q))
    good = [JointConfig.from_array(q, True) for q in sols if within_limits(params, q)]
    bad = [JointConfig.from_array(q) for q in sols if not within_limits(params, q)]
    return IKResult(good, bad)


def inverse_kinematics(params: ArmParams, target, tol: float = 1e-9) -> list:
    """All in-limit joint solutions reaching ``target`` (body frame), elbow-down first."""
    res = inverse_kinematics_all(params, target, tol)
    if not res.solutions:
        raise UnreachableTargetError(
            f"target {np.asarray(target)} only reachable outside joint limits"
        )
    return res.solutions


@dataclass
class Workspace:
    configs: np.ndarray  # (N, 3)
    points: np.ndarray  # (N, 3) body frame
    hull_yz: np.ndarray  # closed outline, (M, 2) columns (y, z)
    hull_xz: np.ndarray  # closed outline, (M, 2) columns (x, z)


def _outline(pts2: np.ndarray) -> np.ndarray:
    try:
        hull = ConvexHull(pts2)
    except Exception:  # degenerate (collinear) projection
        return pts2[[0, -1]]
    v = pts2[hull.vertices]
    return np.vstack([v, v[:1]])


def sample_workspace(params: ArmParams, resolution: int) -> Workspace:
    """Grid-sample the joint space within limits (resolution per joint)."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in params.joint_limits]
    Q = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    P = kernels.fk_batch(params.L1, params.L2, params.L3, params.sign, Q)
    P = P + np.asarray(params.mount_offset)
    return Workspace(Q, P, _outline(P[:, [1, 2]]), _outline(P[:, [0, 2]]))


def write_workspace_csv(ws: Workspace, path) -> None:
    with open(path, "w") as f:
        f.write("q1,q2,q3,x,y,z\n")
        for q, p in zip(ws.configs, ws.points):
            f.write(",".join(repr(float(v)) for v in (*q, *p)) + "\n")
