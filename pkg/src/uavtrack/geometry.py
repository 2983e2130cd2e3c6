"""Coordinate frames and spatial-angle conversions.

Three frames are used throughout:

* n-frame: fixed navigation frame, x/y horizontal in meters, h up.
* u-frame: UAV-carried frame, axes parallel to the n-frame, origin at the
  UAV antenna center.
* a-frame: UAV body frame, rotated from the u-frame by yaw, pitch and roll.

The ground station's planar array sees the UAV under the direction cosines
(u, v); the UAV's linear array sees the ground station under the departure
cosine u_a measured from the body x-axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Position3",
    "Attitude",
    "SpatialAngles",
    "rotation_matrix",
    "arrival_angles",
    "departure_angle",
    "position_from_angles",
]


@dataclass(frozen=True)
class Position3:
    """Point in the n-frame: horizontal x, y and height h, all in meters."""

    x: float
    y: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.h], dtype=float)


@dataclass(frozen=True)
class Attitude:
    """Body attitude in radians: yaw about h, pitch about y, roll about x."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0


@dataclass(frozen=True)
class SpatialAngles:
    """Direction cosines (u, v) at the planar array, optionally the
    departure cosine u_a at the linear array."""

    u: float
    v: float
    u_a: float | None = None


def _t1(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _t2(pitch: float) -> np.ndarray:
    c, s = math.cos(pitch), math.sin(pitch)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _t3(roll: float) -> np.ndarray:
    c, s = math.cos(roll), math.sin(roll)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def rotation_matrix(att: Attitude) -> np.ndarray:
    """Direction cosine matrix from the u-frame to the a-frame.

    Composed as roll @ pitch @ yaw, each factor a single-axis rotation
    applied to column vectors of u-frame coordinates.

    Parameters
    ----------
    att : Attitude
        Yaw, pitch, roll in radians.

    Returns
    -------
    np.ndarray, shape (3, 3)
        Orthonormal with determinant +1.
    """
    return _t3(att.roll) @ _t2(att.pitch) @ _t1(att.yaw)


def arrival_angles(uav_pos: Position3, gs_pos: Position3) -> SpatialAngles:
    """Direction cosines of the UAV as seen by the ground station array.

    u = dx / r and v = dy / r with r = sqrt(dx^2 + dy^2 + dh^2), where
    (dx, dy, dh) is the UAV position relative to the ground station. The
    height difference dh keeps u^2 + v^2 strictly below one whenever the
    UAV flies above (or below) the array.

    Parameters
    ----------
    uav_pos, gs_pos : Position3
        Both in the n-frame.

    Returns
    -------
    SpatialAngles
        With u_a left unset.
    """
    dx = uav_pos.x - gs_pos.x
    dy = uav_pos.y - gs_pos.y
    dh = uav_pos.h - gs_pos.h
    r2 = dx * dx + dy * dy + dh * dh
    if r2 == 0.0:
        raise ValueError("UAV and ground station positions coincide")
    r = math.sqrt(r2)
    return SpatialAngles(u=dx / r, v=dy / r)


def departure_angle(gs_pos_u: Position3, heading: float, att: Attitude = Attitude()) -> float:
    """Departure cosine u_a of the ground station from the UAV body array.

    The body x-axis is rotated from the u-frame by the heading angle plus
    yaw. The azimuth of the ground station is taken as the two-quadrant
    arctangent of the horizontal u-frame coordinates, so pitch and roll do
    not perturb u_a; for a body-axis linear array only the azimuth offset
    is observable.

    Parameters
    ----------
    gs_pos_u : Position3
        Ground station position expressed in the u-frame.
    heading : float
        Course angle of the velocity vector, radians.
    att : Attitude
        Body attitude; only yaw contributes.

    Returns
    -------
    float
        u_a = cos(azimuth + heading + yaw), in [-1, 1].
    """
    gx, gy = gs_pos_u.x, gs_pos_u.y
    if gx == 0.0 and gy == 0.0:
        raise ValueError("ground station projects onto the a-frame origin")
    if gx < 0.0:
        gx, gy = -gx, -gy
    phi = math.atan2(gy, gx)
    return math.cos(phi + heading + att.yaw)


def position_from_angles(u: float, v: float, delta_h: float) -> Position3:
    """Invert arrival_angles for a known height difference.

    x = u * dh / w and y = v * dh / w with w = sqrt(1 - u^2 - v^2). The
    returned position is relative to the ground station, so its h field
    equals delta_h.

    Parameters
    ----------
    u, v : float
        Direction cosines with u^2 + v^2 < 1.
    delta_h : float
        UAV height above the ground station, meters, nonzero.

    Returns
    -------
    Position3
        Offsets (x, y, delta_h) from the ground station.
    """
    s = u * u + v * v
    if s >= 1.0:
        raise ValueError(f"u^2 + v^2 = {s:.6f} is not inside the unit disk")
    if delta_h == 0.0:
        raise ValueError("height difference must be nonzero to invert the projection")
    w = math.sqrt(1.0 - s)
    return Position3(x=u * delta_h / w, y=v * delta_h / w, h=delta_h)
