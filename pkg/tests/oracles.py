"""Reference computations built independently of the package internals.

Rotations come from scipy's Rotation class, transforms are plain 4x4
homogeneous products, and planes are written out by hand.
"""

import math

import numpy as np
from scipy.spatial.transform import Rotation

L1, L2, L3 = 0.118, 0.330, 0.273


def _h(rot=None, t=(0.0, 0.0, 0.0)):
    H = np.eye(4)
    if rot is not None:
        H[:3, :3] = rot.as_matrix()
    H[:3, 3] = t
    return H


def fk_homogeneous(q, side="left", lengths=(L1, L2, L3)):
    """Chain Rx(s q1) Tz(L1) Ry(q2) Tz(L2) Rx(s q3) Tz(L3) as 4x4 products."""
    s = 1.0 if side == "left" else -1.0
    a, b, c = lengths
    H = (_h(Rotation.from_rotvec([s * q[0], 0, 0])) @ _h(t=(0, 0, a))
         @ _h(Rotation.from_rotvec([0, q[1], 0])) @ _h(t=(0, 0, b))
         @ _h(Rotation.from_rotvec([s * q[2], 0, 0])) @ _h(t=(0, 0, c)))
    return H[:3, 3]


def jacobian_central(f, q, h=1e-6):
    q = np.asarray(q, float)
    J = np.zeros((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        J[:, k] = (f(q + e) - f(q - e)) / (2 * h)
    return J


def rpy_matrix(roll, pitch, yaw):
    """Z-Y-X intrinsic via scipy (uppercase = intrinsic)."""
    return Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()


def incline_normal(theta):
    """Upward normal (NED) of a plane falling along +y by theta."""
    return np.array([0.0, math.sin(theta), -math.cos(theta)])


def world_plane(incline_deg, downhill_deg):
    """(upward unit normal, downhill unit vector) written out by hand."""
    a, h = math.radians(incline_deg), math.radians(downhill_deg)
    d = np.array([-math.sin(h), math.cos(h), 0.0])
    # the surface rises against d: z (down) grows with distance along d
    t = d + np.array([0.0, 0.0, math.tan(a)])
    side = np.cross(np.array([0.0, 0.0, 1.0]), d)
    n = np.cross(t, side)
    n = n / np.linalg.norm(n)
    return (n if n[2] < 0 else -n), d


def box_inertia(m, lx, ly, lz):
    return np.diag([m * (ly**2 + lz**2), m * (lx**2 + lz**2), m * (lx**2 + ly**2)]) / 12.0
