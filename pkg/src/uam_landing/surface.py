"""Landing-plane estimation from contact points and slope-matched landing plans."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import UnreachableTargetError, inverse_kinematics

E3 = np.array([0.0, 0.0, 1.0])


class DegeneratePointsError(ValueError):
    pass


class InclineTooSteepError(ValueError):
    pass


class SetpointUnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class PlaneEstimate:
    centroid: tuple
    normal: tuple  # unit, pointing up (negative z in NED)
    heading: float
    incline: float
    source: str  # "2-point" or "3-point"

    @property
    def incline_deg(self) -> float:
        return math.degrees(self.incline)


def canonicalize(n) -> np.ndarray:
    n = np.asarray(n, float)
    n = n / np.linalg.norm(n)
    if n[2] > 0 or (n[2] == 0 and (n[1], n[0]) < (0, 0)):
        n = -n
    return n


def surface_heading(n) -> float:
    """Heading from the normal's y and z components, two-argument arctangent."""
    return math.atan2(n[1], n[2])


def incline_angle(n) -> float:
    n = np.asarray(n, float)
    return math.acos(min(1.0, abs(float(n @ -E3)) / float(np.linalg.norm(n))))


def heading_and_incline(n) -> tuple[float, float]:
    return surface_heading(n), incline_angle(n)


def _plane(centroid, normal, source) -> PlaneEstimate:
    psi, alpha = heading_and_incline(normal)
    return PlaneEstimate(tuple(float(v) for v in centroid), tuple(float(v) for v in normal),
                         psi, alpha, source)


def plane_from_three(p1, p2, p3) -> PlaneEstimate:
    p1, p2, p3 = (np.asarray(p, float) for p in (p1, p2, p3))
    r1 = p1 - p2
    r2 = p1 - p3
    c = np.cross(r1, r2)
    if float(np.linalg.norm(c)) <= 1e-9 * float(np.linalg.norm(r1)) * float(np.linalg.norm(r2)):
        raise DegeneratePointsError("contact points are collinear")
    return _plane((p1 + p2 + p3) / 3.0, canonicalize(c), "3-point")


def plane_from_two(p1, p2, body_x_world) -> PlaneEstimate:
    """Plane through two points that also contains the body x direction."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    ex = np.asarray(body_x_world, float)
    ex = ex / np.linalg.norm(ex)
    u = p1 - p2
    nu = float(np.linalg.norm(u))
    if nu == 0 or math.asin(min(1.0, float(np.linalg.norm(np.cross(u / nu, ex))))) <= 1e-6:
        raise DegeneratePointsError("contact difference is parallel to the body x-axis")
    return _plane((p1 + p2) / 2.0, canonicalize(np.cross(u, ex)), "2-point")


@dataclass(frozen=True)
class LandingPlan:
    approach_point: tuple  # world, body origin target
    target_yaw: float
    ee_setpoints: tuple  # ((x, y, z) left, (x, y, z) right), body frame
    ee_configs: tuple  # matching joint configurations
    rear_gear_offset: tuple
    descent_velocity: float
    incline: float


def target_yaw(normal, current_yaw: float = 0.0) -> float:
    """Yaw putting the downhill direction along body +y."""
    nx, ny = float(normal[0]), float(normal[1])
    if math.hypot(nx, ny) < 1e-12:
        return current_yaw
    return math.atan2(-nx, ny)


def landing_geometry(plane: PlaneEstimate, preset_xy, rear_gear_offset, arms: list,
                     clearance: float = 0.5, descent_velocity: float = 0.2,
                     max_incline: float = math.radians(35.0),
                     current_yaw: float = 0.0) -> LandingPlan:
    """End-effector setpoints so that arm tips and rear gear share the slope.

    ``preset_xy`` is (x, |y|) of the end-effector stance; the left arm takes
    -|y| and the right arm +|y|. The body is yawed so the slope falls along +y.
    """
    alpha = plane.incline
    if alpha >= max_incline:
        raise InclineTooSteepError(
            f"incline {math.degrees(alpha):.2f} deg exceeds {math.degrees(max_incline):.2f} deg"
        )
    gear = np.asarray(rear_gear_offset, float)
    x_e, y_e = float(preset_xy[0]), abs(float(preset_xy[1]))
    tan_a = math.tan(alpha)
    setpoints, configs = [], []
    for arm, y in zip(arms, (-y_e, y_e)):
        # downhill is +y in the body: the surface drops (z grows) with y
        z = gear[2] + (y - gear[1]) * tan_a
        p = (x_e, y, z)
        try:
            q = inverse_kinematics(arm, p)[0]
        except UnreachableTargetError as exc:
            raise SetpointUnreachableError(f"{arm.side} stance {p} unreachable: {exc}") from exc
        setpoints.append(p)
        configs.append(q)
    c = np.asarray(plane.centroid)
    return LandingPlan(
        tuple(float(v) for v in c - clearance * E3),
        target_yaw(plane.normal, current_yaw),
        tuple(setpoints),
        tuple(configs),
        tuple(float(v) for v in gear),
        float(descent_velocity),
        alpha,
    )


def stance_points(plan: LandingPlan) -> np.ndarray:
    """Rear gear tip and both arm tips in the body frame."""
    return np.array([plan.rear_gear_offset, *plan.ee_setpoints])
