"""Proprioceptive contact detection, slope estimation and slope landing for a
dual-arm aerial manipulator, with a deterministic closed-loop simulator."""

from .contact import ContactEvent, DetectionConfig, detect, localize
from .kernels import BACKEND
from .kinematics import (
    ArmParams,
    JointConfig,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
)
from .observer import BodyInertia, ObserverState, observer_step, reset
from .surface import (
    LandingPlan,
    PlaneEstimate,
    landing_geometry,
    plane_from_three,
    plane_from_two,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ArmParams", "JointConfig", "forward_kinematics", "inverse_kinematics", "jacobian",
    "BodyInertia", "ObserverState", "observer_step", "reset", "ContactEvent", "DetectionConfig",
    "detect", "localize", "LandingPlan", "PlaneEstimate", "landing_geometry", "plane_from_three",
    "plane_from_two",
]
