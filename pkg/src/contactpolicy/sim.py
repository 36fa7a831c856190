"""Deterministic quasi-static Push-T environment.

A circular effector pushes a T-shaped block toward a fixed goal pose on a
square workspace. Penetration is resolved by a position-based projection
solver, so identical (state, command) pairs always produce identical
successors.  Score is goal-area coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    BLOCK_POLYGON,
    KEYPOINT_TEMPLATE,
    Pose2,
    block_sdf_world,
    cross2,
    point_in_block_local,
    wrap_angle,
)


@dataclass(frozen=True)
class SimConfig:
    workspace_size: float = 512.0
    effector_diameter: float = 30.0
    max_speed: float = 8.0
    contact_eps: float = 0.5
    goal: tuple = (256.0, 256.0, math.pi / 4)
    rotation_gain: float = 0.01  # rad per (lever * depth) unit^2
    solver_iters: int = 4
    raster_step: float = 1.0
    # Spawn the block this far inside the walls: flush against a boundary,
    # some faces sit in pockets no circular pusher can enter.
    reset_margin: float = 40.0

    @property
    def effector_radius(self) -> float:
        return self.effector_diameter / 2.0

    @property
    def goal_pose(self) -> Pose2:
        return Pose2(*self.goal)


@dataclass(frozen=True)
class ContactStatus:
    """Whether the effector touches the block, and where on its boundary."""

    in_contact: bool
    point: np.ndarray  # zero vector when not in contact

    def as_tuple(self):
        return self.in_contact, (float(self.point[0]), float(self.point[1]))


@dataclass(frozen=True)
class SimState:
    block: Pose2
    effector: np.ndarray
    goal: Pose2
    step_index: int = 0


def keypoints(block: Pose2) -> np.ndarray:
    """The 9 canonical T keypoints rigidly transformed by the block pose."""
    return block.to_world(KEYPOINT_TEMPLATE)


def observation(state: SimState) -> np.ndarray:
    """Per-step observation frame: 9 keypoints + effector position (20 dims)."""
    return np.concatenate([keypoints(state.block).ravel(), state.effector])


class PushTSim:
    """Stateless stepping functions bound to one SimConfig."""

    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()

    # -- episode setup -----------------------------------------------------

    def reset(self, seed: int) -> SimState:
        cfg = self.config
        rng = np.random.default_rng(seed)
        w, m = cfg.workspace_size, cfg.reset_margin
        block = None
        for _ in range(100):
            pose = Pose2(
                rng.uniform(0.0, w),
                rng.uniform(0.0, w),
                wrap_angle(rng.uniform(-math.pi, math.pi)),
            )
            verts = pose.to_world(BLOCK_POLYGON)
            if np.all(verts >= m) and np.all(verts <= w - m):
                block = pose
                break
        if block is None:
            block = Pose2(w / 4, w / 4, 0.0)
        effector = None
        for _ in range(100):
            cand = rng.uniform(0.0, w, size=2)
            dist, _, _ = block_sdf_world(cand, block)
            if dist >= cfg.effector_radius + 5.0:
                effector = cand
                break
        if effector is None:
            corners = np.array([[m, m], [m, w - m], [w - m, m], [w - m, w - m]])
            effector = corners[int(np.argmax(np.linalg.norm(corners - block.xy, axis=1)))]
        return SimState(block=block, effector=effector.astype(float), goal=cfg.goal_pose)

    # -- dynamics ----------------------------------------------------------

    def step(self, state: SimState, command: np.ndarray) -> SimState:
        cfg = self.config
        command = np.asarray(command, dtype=float)
        if command.shape != (2,) or not np.all(np.isfinite(command)):
            raise ValueError(f"command must be a finite 2-vector, got {command!r}")
        target = np.clip(command, 0.0, cfg.workspace_size)
        delta = target - state.effector
        norm = float(np.linalg.norm(delta))
        if norm > cfg.max_speed:
            delta = delta * (cfg.max_speed / norm)
        effector = state.effector + delta

        block = state.block
        r = cfg.effector_radius
        for _ in range(cfg.solver_iters):
            dist, closest, normal = block_sdf_world(effector, block)
            depth = r - dist
            if depth <= 0.0:
                break
            # The block yields: translate it out of the effector, then rotate
            # about its centroid by the lever-arm torque heuristic.
            push_dir = -normal
            lever = closest - block.xy
            new_xy = block.xy + push_dir * depth
            dtheta = cfg.rotation_gain * cross2(lever, push_dir) * depth
            block = Pose2(new_xy[0], new_xy[1], block.theta + dtheta)
        # Final translation-only pass so the post-step penetration is ~0 even
        # when the last iteration's rotation re-intruded slightly.
        dist, _, normal = block_sdf_world(effector, block)
        depth = r - dist
        if depth > 0.0:
            new_xy = block.xy - normal * depth
            block = Pose2(new_xy[0], new_xy[1], block.theta)
        block = Pose2(
            float(np.clip(block.x, 0.0, cfg.workspace_size)),
            float(np.clip(block.y, 0.0, cfg.workspace_size)),
            block.theta,
        )
        return SimState(
            block=block,
            effector=effector,
            goal=state.goal,
            step_index=state.step_index + 1,
        )

    def apply_perturbation(self, state: SimState, dx: float, dy: float, dtheta: float) -> SimState:
        """Externally displace the block (robustness testing hook)."""
        cfg = self.config
        block = Pose2(
            float(np.clip(state.block.x + dx, 0.0, cfg.workspace_size)),
            float(np.clip(state.block.y + dy, 0.0, cfg.workspace_size)),
            state.block.theta + dtheta,
        )
        return replace(state, block=block)

    # -- sensing and scoring -------------------------------------------------

    def contact_status(self, state: SimState) -> ContactStatus:
        cfg = self.config
        dist, closest, _ = block_sdf_world(state.effector, state.block)
        if dist - cfg.effector_radius <= cfg.contact_eps:
            return ContactStatus(True, closest)
        return ContactStatus(False, np.zeros(2))

    def coverage(self, block: Pose2, goal: Pose2 | None = None) -> float:
        goal = goal or self.config.goal_pose
        return coverage(block, goal, self.config.raster_step)


def coverage(block: Pose2, goal: Pose2, raster_step: float = 1.0) -> float:
    """Fraction of the goal footprint overlapped by the block.

    Raster sampling on a fixed grid over the goal's bounding box; the grid is
    anchored to integer multiples of the step so results are deterministic.
    """
    verts = goal.to_world(BLOCK_POLYGON)
    lo = np.floor(verts.min(axis=0))
    hi = np.ceil(verts.max(axis=0))
    xs = np.arange(lo[0] + raster_step / 2, hi[0], raster_step)
    ys = np.arange(lo[1] + raster_step / 2, hi[1], raster_step)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    in_goal = point_in_block_local(goal.to_local(pts))
    if not np.any(in_goal):
        return 0.0
    in_block = point_in_block_local(block.to_local(pts[in_goal]))
    return float(np.count_nonzero(in_block)) / float(np.count_nonzero(in_goal))
