import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import incline_normal, world_plane

from uam_landing.kinematics import ArmParams, ee_position
from uam_landing.se3 import rot_z
from uam_landing.surface import (
    DegeneratePointsError,
    InclineTooSteepError,
    PlaneEstimate,
    SetpointUnreachableError,
    canonicalize,
    heading_and_incline,
    incline_angle,
    landing_geometry,
    plane_from_three,
    plane_from_two,
    stance_points,
    surface_heading,
    target_yaw,
)

ARMS = [ArmParams(side="left"), ArmParams(side="right")]


def test_flat_three_points():
    pl = plane_from_three((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert np.allclose(pl.normal, (0, 0, -1)) and pl.incline == 0.0 and pl.source == "3-point"


def test_constructed_incline_three_points():
    pl = plane_from_three((0, 0, 0), (1, 0, 0), (0, 1, -math.tan(math.radians(30.5))))
    assert abs(pl.incline - math.radians(30.5)) < 1e-9


def test_collinear_rejected():
    with pytest.raises(DegeneratePointsError):
        plane_from_three((0, 0, 0), (1, 1, 1), (2, 2, 2))


def test_two_point_example_and_cross_check():
    pl = plane_from_two((0, 0.5, 0), (0, -0.5, 0.373), (1, 0, 0))
    assert pl.incline == pytest.approx(math.atan(0.373), abs=1e-12)
    ref = plane_from_three((0, 0.5, 0), (0, -0.5, 0.373), (1, 0.5, 0))
    assert np.allclose(pl.normal, ref.normal, atol=1e-12)
    assert math.degrees(pl.incline) == pytest.approx(20.45, abs=0.01)


def test_two_point_degenerate_and_level():
    with pytest.raises(DegeneratePointsError):
        plane_from_two((0, 0, 0), (1, 0, 0), (1, 0, 0))
    assert plane_from_two((0, 0.3, -1), (0, -0.3, -1), (1, 0, 0)).incline == 0.0


def test_incline_examples():
    assert heading_and_incline((0, 0, -1))[1] == 0.0
    for deg in (11.3, 20.6, 30.5):
        assert incline_angle(incline_normal(math.radians(deg))) == pytest.approx(
            math.radians(deg), abs=1e-12)


def test_heading_uses_y_and_z_components():
    n = np.array([0.1, 0.3, -0.9])
    assert surface_heading(n) == math.atan2(0.3, -0.9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 45), st.floats(0, 360), st.integers(0, 10**6))
def test_three_point_permutation_invariant(inc, head, seed):
    rng = np.random.default_rng(seed)
    n, _ = world_plane(inc, head)
    e1 = np.cross(n, [0.3, -0.7, 0.2])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    pts = [a * e1 + b * e2 for a, b in rng.uniform(-1, 1, (3, 2))]
    if np.linalg.norm(np.cross(pts[1] - pts[0], pts[2] - pts[0])) < 1e-3:
        return
    normals = [plane_from_three(*p).normal for p in itertools.permutations(pts)]
    for m in normals:
        assert np.allclose(m, normals[0], atol=1e-12)
        assert np.allclose(m, n, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_incline_sign_invariant(a, b, c):
    v = np.array([a, b, c])
    if np.linalg.norm(v) < 1e-6:
        return
    assert incline_angle(v) == incline_angle(-v)
    assert canonicalize(v)[2] <= 0


def _plane(deg, yaw=0.0):
    n = rot_z(yaw) @ incline_normal(math.radians(deg))
    psi, alpha = heading_and_incline(n)
    return PlaneEstimate((0.0, 0.0, 0.0), tuple(n), psi, alpha, "2-point")


def test_level_stance():
    plan = landing_geometry(_plane(0.0), (0.15, 0.30), (-0.17, 0.0, 0.20), ARMS)
    assert all(sp[2] == 0.20 for sp in plan.ee_setpoints)


def test_height_difference_over_point_six_metres():
    plan = landing_geometry(_plane(30.5), (0.0, 0.6), (-0.17, 0.0, 0.0), ARMS)
    dz = plan.ee_setpoints[1][2] - plan.rear_gear_offset[2]
    assert dz == pytest.approx(0.6 * math.tan(math.radians(30.5)), abs=1e-12)


@pytest.mark.parametrize("deg", [0.0, 11.3, 20.6, 30.5])
@pytest.mark.parametrize("yaw", [0.0, 0.7, -2.0])
def test_stance_points_share_incline(deg, yaw):
    plane = _plane(deg, yaw)
    plan = landing_geometry(plane, (0.15, 0.30), (-0.17, 0.0, 0.20), ARMS)
    # the ee setpoints are reached by the chosen configurations
    for arm, q, sp in zip(ARMS, plan.ee_configs, plan.ee_setpoints):
        assert np.allclose(ee_position(arm, q), sp, atol=1e-9)
    # level body at the target yaw: stance points in world lie on a plane of incline alpha
    R = rot_z(plan.target_yaw)
    pts = [R @ p for p in stance_points(plan)]
    fit = plane_from_three(*pts)
    assert abs(fit.incline - plane.incline) < 1e-9
    if deg > 0:
        assert np.allclose(fit.normal, plane.normal, atol=1e-9)
    assert plan.approach_point == pytest.approx((0.0, 0.0, -0.5))


def test_target_yaw_puts_downhill_on_body_y():
    n = rot_z(1.1) @ incline_normal(0.4)
    b = rot_z(target_yaw(n)).T @ n
    assert abs(b[0]) < 1e-12 and b[1] > 0
    assert target_yaw((0, 0, -1), current_yaw=0.3) == 0.3


def test_landing_errors():
    with pytest.raises(InclineTooSteepError):
        landing_geometry(_plane(60.0), (0.15, 0.30), (-0.17, 0, 0.2), ARMS, max_incline=math.radians(35))
    with pytest.raises(SetpointUnreachableError):
        landing_geometry(_plane(10.0), (0.7, 0.6), (-0.17, 0, 0.2), ARMS)
