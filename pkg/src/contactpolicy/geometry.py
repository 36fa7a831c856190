"""Planar rigid transforms and signed-distance primitives for the T block."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.fmod(theta, TWO_PI)
    if t > math.pi:
        t -= TWO_PI
    elif t <= -math.pi:
        t += TWO_PI
    return t


@dataclass(frozen=True)
class Pose2:
    """Planar rigid pose (x, y, theta); theta is kept in (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def to_world(self, pts: np.ndarray) -> np.ndarray:
        """Map local points (..., 2) into the world frame."""
        return pts @ self.rotation().T + self.xy

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        """Map world points (..., 2) into this pose's local frame."""
        return (pts - self.xy) @ self.rotation()

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(a) -> "Pose2":
        return Pose2(float(a[0]), float(a[1]), float(a[2]))


# T-block geometry, local frame centered on the area centroid.
# Horizontal bar 120x30 on top of a 30x120 stem.
BAR_HALF = np.array([60.0, 15.0])
BAR_CENTER = np.array([0.0, 37.5])
STEM_HALF = np.array([15.0, 60.0])
STEM_CENTER = np.array([0.0, -37.5])

# Outline, counter-clockwise from the bar's top-left corner.
BLOCK_POLYGON = np.array(
    [
        [-60.0, 52.5],
        [-60.0, 22.5],
        [-15.0, 22.5],
        [-15.0, -97.5],
        [15.0, -97.5],
        [15.0, 22.5],
        [60.0, 22.5],
        [60.0, 52.5],
    ]
)

# Fixed observation template: 4 bar corners, 2 stem bottom corners,
# bar center, bar/stem junction, centroid.
KEYPOINT_TEMPLATE = np.array(
    [
        [-60.0, 52.5],
        [60.0, 52.5],
        [60.0, 22.5],
        [-60.0, 22.5],
        [-15.0, -97.5],
        [15.0, -97.5],
        [0.0, 37.5],
        [0.0, 22.5],
        [0.0, 0.0],
    ]
)

BLOCK_CIRCUMRADIUS = float(np.max(np.linalg.norm(BLOCK_POLYGON, axis=1)))
BLOCK_AREA = 2.0 * (2 * BAR_HALF[0]) * (2 * BAR_HALF[1])  # bar and stem have equal area


def box_sdf(p: np.ndarray, center: np.ndarray, half: np.ndarray):
    """Signed distance from point p to an axis-aligned box.

    Returns (distance, closest boundary point, outward unit normal).
    Negative distance means p is inside.
    """
    q = p - center
    d = np.abs(q) - half
    if d[0] > 0.0 or d[1] > 0.0:
        closest = center + np.clip(q, -half, half)
        diff = p - closest
        dist = float(np.linalg.norm(diff))
        if dist < 1e-12:
            # On the boundary; fall through to the interior normal rule.
            pass
        else:
            return dist, closest, diff / dist
    # Inside (or exactly on the boundary): project onto the nearest face.
    if d[0] >= d[1]:
        sx = 1.0 if q[0] >= 0.0 else -1.0
        closest = center + np.array([sx * half[0], q[1]])
        normal = np.array([sx, 0.0])
        dist = float(d[0])
    else:
        sy = 1.0 if q[1] >= 0.0 else -1.0
        closest = center + np.array([q[0], sy * half[1]])
        normal = np.array([0.0, sy])
        dist = float(d[1])
    return dist, closest, normal


def block_sdf_local(p: np.ndarray):
    """Signed distance from a local-frame point to the T (union of two boxes)."""
    da = box_sdf(p, BAR_CENTER, BAR_HALF)
    db = box_sdf(p, STEM_CENTER, STEM_HALF)
    return da if da[0] <= db[0] else db


def point_in_block_local(pts: np.ndarray) -> np.ndarray:
    """Vectorized membership test for local-frame points (..., 2)."""
    qa = np.abs(pts - BAR_CENTER) <= BAR_HALF
    qb = np.abs(pts - STEM_CENTER) <= STEM_HALF
    return (qa[..., 0] & qa[..., 1]) | (qb[..., 0] & qb[..., 1])


def block_sdf_world(p: np.ndarray, pose: Pose2):
    """Signed distance from a world point to the block at the given pose.

    Returns (distance, closest boundary point in world, outward world normal).
    """
    local = pose.to_local(np.asarray(p, dtype=float))
    dist, closest, normal = block_sdf_local(local)
    rot = pose.rotation()
    return dist, rot @ closest + pose.xy, rot @ normal


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    """z-component of the 2D cross product a x b."""
    return float(a[0] * b[1] - a[1] * b[0])
