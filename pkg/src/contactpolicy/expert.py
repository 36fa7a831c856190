"""Scripted multimodal Push-T expert.

Generates demonstrations with natural contact-phase structure: approach a
chosen face, push, release, re-plan.  Among near-equivalent push strategies
the choice is random, so a fixed initial state yields multimodal data.  A
misoperation (grazing touch or overshoot-and-correct) can be injected to
give the labeler realistic input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import BLOCK_CIRCUMRADIUS, Pose2, block_sdf_world, cross2, wrap_angle
from .sim import PushTSim, SimState, observation


@dataclass(frozen=True)
class Face:
    """One flat segment of the T outline, local frame, outward normal."""

    name: str
    normal: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def tangent(self) -> np.ndarray:
        t = self.b - self.a
        return t / np.linalg.norm(t)

    def axis_point(self) -> np.ndarray | None:
        """Point on the face whose push line passes through the centroid.

        Pushing there produces (near) zero torque.  None if the centroid's
        projection falls outside the segment.
        """
        t = self.tangent
        s = -float(np.dot(self.a, t))  # param of the centroid projection
        if 0.0 <= s <= float(np.linalg.norm(self.b - self.a)):
            return self.a + s * t
        return None

    def clamp_param(self, s: float, margin: float = 5.0) -> float:
        length = float(np.linalg.norm(self.b - self.a))
        return min(max(s, margin), length - margin)

    def point_at(self, s: float) -> np.ndarray:
        return self.a + s * self.tangent


FACES = [
    Face("bar_top", np.array([0.0, 1.0]), np.array([-60.0, 52.5]), np.array([60.0, 52.5])),
    Face("bar_bot_l", np.array([0.0, -1.0]), np.array([-60.0, 22.5]), np.array([-15.0, 22.5])),
    Face("bar_bot_r", np.array([0.0, -1.0]), np.array([15.0, 22.5]), np.array([60.0, 22.5])),
    Face("bar_left", np.array([-1.0, 0.0]), np.array([-60.0, 22.5]), np.array([-60.0, 52.5])),
    Face("bar_right", np.array([1.0, 0.0]), np.array([60.0, 22.5]), np.array([60.0, 52.5])),
    Face("stem_left", np.array([-1.0, 0.0]), np.array([-15.0, -97.5]), np.array([-15.0, 22.5])),
    Face("stem_right", np.array([1.0, 0.0]), np.array([15.0, -97.5]), np.array([15.0, 22.5])),
    Face("stem_bot", np.array([0.0, -1.0]), np.array([-15.0, -97.5]), np.array([15.0, -97.5])),
]
AXIS_FACES = [f for f in FACES if f.axis_point() is not None]


@dataclass
class ExpertConfig:
    hold_pos_tol: float = 2.2
    hold_ang_tol: float = 0.021
    pos_first_above: float = 10.0  # fix position before angle when far
    standoff: float = 6.0
    push_depth: float = 6.0
    min_phase_disp: float = 3.4    # every push phase moves the block at least this far
    min_phase_rot: float = 0.019   # or rotates at least this much (> 1 deg)
    rot_cross: float = 20.0        # preferred lever for rotation pushes
    rot_step_cap: float = 0.1      # max block rotation per sim step
    min_step_rot: float = 0.022    # min rotation per contact step before phase clears tau_r
    max_push_steps: int = 70
    approach_patience: int = 22    # approach steps without progress before abandoning
    max_approach_steps: int = 90
    second_choice_prob: float = 0.4


APPROACH, PUSH, RETREAT = 0, 1, 2


@dataclass
class Plan:
    kind: str                      # translate | rotate | graze
    face: Face
    point_local: np.ndarray        # contact point on the face, local frame
    stage: int = APPROACH
    steps: int = 0
    push_steps: int = 0
    start_xy: np.ndarray | None = None
    start_theta: float = 0.0
    u0: np.ndarray | None = None   # translate: world direction at plan time
    stop_err: float = 0.0          # translate: remaining-error stop threshold
    rot_sign: float = 0.0          # rotate: desired rotation sign
    stop_ang: float = 0.0
    rot_target: float | None = None  # rotate: absolute target heading
    cross: float = 0.0             # rotate: lever at the contact point
    graze_hold: int = 0
    lost_contact: int = 0
    nav_dir: float = 0.0           # committed detour direction, +1 CCW / -1 CW
    nav_flips: int = 0
    best_approach: float = float("inf")
    no_progress: int = 0


class ScriptedExpert:
    """Closed-loop scripted policy over full simulator state."""

    def __init__(
        self,
        sim: PushTSim,
        config: ExpertConfig | None = None,
        rng: np.random.Generator | None = None,
        force_choice: int | None = None,
    ):
        self.sim = sim
        self.cfg = config or ExpertConfig()
        self.rng = rng or np.random.default_rng(0)
        self.force_choice = force_choice  # 0 -> best candidate, 1 -> runner-up
        self.plan: Plan | None = None
        self.plans_completed = 0
        self.chosen_faces: list[str] = []
        self.pending_misop: str | None = None
        self.misop_after: int = 0
        self.misop_done: str | None = None
        self._cached_u: np.ndarray | None = None
        self._cached_face: Face | None = None
        self._stalls: dict[str, int] = {}

    # -- public ------------------------------------------------------------

    def done(self, state: SimState) -> bool:
        dist, ang = self._errors(state)
        return dist < self.cfg.hold_pos_tol and abs(ang) < self.cfg.hold_ang_tol

    def plan_push(self, state: SimState) -> np.ndarray:
        if self.plan is None:
            if self.done(state):
                return state.effector.copy()
            self.plan = self._make_plan(state)
        cmd, finished = self._advance(state, self.plan)
        if finished:
            self.plans_completed += 1
            if self.plan.kind == "graze":
                self.misop_done = "graze"
            elif self.plan.start_xy is not None:
                moved = float(np.linalg.norm(state.block.xy - self.plan.start_xy))
                turned = abs(wrap_angle(state.block.theta - self.plan.start_theta))
                if moved >= 1.0 or turned >= 0.01:
                    self._stalls.clear()  # productive plan; forget old stalls
            self.plan = None
        return np.clip(cmd, 0.0, self.sim.config.workspace_size)

    def schedule_misop(self, kind: str, after_plans: int):
        self.pending_misop = kind
        self.misop_after = after_plans

    # -- planning ----------------------------------------------------------

    def _errors(self, state: SimState):
        dp = state.goal.xy - state.block.xy
        return float(np.linalg.norm(dp)), wrap_angle(state.goal.theta - state.block.theta)

    def _make_plan(self, state: SimState) -> Plan:
        cfg = self.cfg
        if self.pending_misop == "graze" and self.plans_completed >= self.misop_after:
            self.pending_misop = None
            return self._graze_plan(state)
        dist, ang = self._errors(state)
        clear_of_walls = not self._block_near_wall(state, margin=45.0)
        if abs(ang) >= 0.25 and (clear_of_walls or dist < cfg.pos_first_above):
            # Coarse angle first: translations preserve heading, so the big
            # rotation never needs redoing.  Near a wall, translate inward
            # first so the rotation cannot wedge the block into a corner.
            return self._rotate_plan(state, ang)
        if dist >= cfg.pos_first_above:
            return self._translate_plan(state, dist)
        if abs(ang) >= cfg.hold_ang_tol:
            return self._rotate_plan(state, ang)
        return self._translate_plan(state, dist)

    def _pick(self, scored: list) -> tuple:
        """Choose among (score, payload) candidates.

        Only near-ties count as alternatives: taking a clearly worse push
        strategy wastes steps and can shove the block off course.
        """
        scored.sort(key=lambda it: -it[0])
        if len(scored) > 1 and scored[1][0] > 0.8 * scored[0][0]:
            if self.force_choice is not None:
                return scored[min(self.force_choice, 1)]
            if self.rng.random() < self.cfg.second_choice_prob:
                return scored[1]
        elif self.force_choice == 1 and len(scored) > 1:
            return scored[1]
        return scored[0]

    def _reachable(self, state: SimState, point_world: np.ndarray) -> bool:
        m = 2.0
        w = self.sim.config.workspace_size
        return bool(np.all(point_world >= m) and np.all(point_world <= w - m))

    def _pocketed(self, state: SimState, staging: np.ndarray, n_w: np.ndarray) -> bool:
        """Staging sits in a wall pocket the effector cannot enter."""
        w = self.sim.config.workspace_size
        probe = staging + n_w * 35.0
        outside = bool(np.any(probe < 0.0) or np.any(probe > w))
        return outside and self._block_near_wall(state, margin=50.0)

    def _pushing_into_wall(self, state: SimState, push_dir: np.ndarray, margin: float = 30.0) -> bool:
        """True when the push would jam the block centroid against a boundary.

        Only the centroid is clamped by the sim, so vertex protrusion past a
        wall is allowed; jamming the centroid stalls progress and flusters the
        solver.
        """
        w = self.sim.config.workspace_size
        c = state.block.xy
        for axis in (0, 1):
            if c[axis] < margin and push_dir[axis] < -0.05:
                return True
            if c[axis] > w - margin and push_dir[axis] > 0.05:
                return True
        return False

    def _block_near_wall(self, state: SimState, margin: float) -> bool:
        from .geometry import BLOCK_POLYGON

        verts = state.block.to_world(BLOCK_POLYGON)
        w = self.sim.config.workspace_size
        return bool(np.any(verts < margin) or np.any(verts > w - margin))

    def _translate_plan(self, state: SimState, dist: float) -> Plan:
        cfg = self.cfg
        block = state.block
        u = (state.goal.xy - block.xy) / max(dist, 1e-9)
        rot = block.rotation()
        reuse = (
            self._cached_face is not None
            and self._cached_u is not None
            and float(np.dot(u, self._cached_u)) > 0.6
            and -float(np.dot(rot @ self._cached_face.normal, u)) > 0.6
        )
        if reuse:
            face = self._cached_face
        else:
            scored = []
            raw_best = 0.0
            for f in AXIS_FACES:
                n_w = rot @ f.normal
                score = -float(np.dot(n_w, u))
                if score < 0.25:
                    continue
                raw_best = max(raw_best, score)
                if self._stalls.get(f.name, 0) >= 2:
                    continue  # both detour directions failed; face is sealed off
                staging = block.to_world(f.axis_point()) + n_w * (
                    self.sim.config.effector_radius + cfg.standoff
                )
                if not self._reachable(state, staging) or self._pocketed(state, staging, n_w):
                    continue
                score *= 0.5 ** self._stalls.get(f.name, 0)
                # Prefer pushes the effector can reach quickly.
                score -= 0.3 * min(float(np.linalg.norm(staging - state.effector)) / 300.0, 1.0)
                scored.append((score, f))
            if not scored or raw_best < 0.3:
                # No workable push face (typically wedged near a wall with the
                # useful staging pocket sealed off): rotate to free it.
                self._stalls.clear()
                ang = wrap_angle(state.goal.theta - block.theta)
                if abs(ang) < 0.15:
                    ang = 0.5 if self.rng.random() < 0.5 else -0.5
                    return self._rotate_plan(state, ang, target=block.theta + ang, from_translate=True)
                return self._rotate_plan(state, ang, from_translate=True)
            score, face = self._pick(scored)
            self.chosen_faces.append(face.name)
        self._cached_face = face
        self._cached_u = u
        push_dir = -(rot @ face.normal)
        proj0 = float(np.dot(state.goal.xy - block.xy, push_dir))
        stop_err = min(0.8, proj0 - cfg.min_phase_disp - 0.2)
        plan = Plan(
            kind="translate",
            face=face,
            point_local=face.axis_point(),
            u0=u,
            stop_err=stop_err,
            start_xy=block.xy.copy(),
            start_theta=block.theta,
        )
        if self.pending_misop == "overshoot" and self.plans_completed >= self.misop_after:
            self.pending_misop = None
            self.misop_done = "overshoot"
            plan.stop_err = stop_err - float(self.rng.uniform(14.0, 22.0))
        return plan

    def _rotate_plan(
        self, state: SimState, ang: float, target: float | None = None, from_translate: bool = False
    ) -> Plan:
        cfg = self.cfg
        block = state.block
        sign = 1.0 if ang > 0 else -1.0
        rot = block.rotation()
        scored = []
        for f in FACES:
            t = f.tangent
            length = float(np.linalg.norm(f.b - f.a))
            axis = f.axis_point()
            if axis is not None:
                base = float(np.dot(axis - f.a, t))
            else:
                base = -float(np.dot(f.a, t))  # projection param, off-segment
            # cross(point, -n) is linear in the tangential offset; find the
            # offset giving the desired sign with lever near rot_cross.
            unit_cross = cross2(t, -f.normal)
            for offs in (cfg.rot_cross, -cfg.rot_cross):
                s = f.clamp_param(base + offs)
                p = f.point_at(s)
                c = cross2(p, -f.normal)
                if c * sign <= 4.0:  # wrong sign or too weak
                    continue
                lever = abs(c)
                score = 1.0 / (1.0 + abs(lever - cfg.rot_cross) / cfg.rot_cross)
                if self._stalls.get(f.name, 0) >= 2:
                    continue
                n_w = rot @ f.normal
                staging = block.to_world(p) + n_w * (
                    self.sim.config.effector_radius + cfg.standoff
                )
                if not self._reachable(state, staging) or self._pocketed(state, staging, n_w):
                    continue
                score *= 0.5 ** self._stalls.get(f.name, 0)
                if f.name in ("bar_bot_l", "bar_bot_r"):
                    score *= 0.5  # concave pocket, awkward approach
                score -= 0.2 * min(float(np.linalg.norm(staging - state.effector)) / 250.0, 1.0)
                scored.append((score, (f, p, c)))
        if not scored:
            if from_translate:
                # Nothing workable either way; drift and retry shortly.
                self._stalls.clear()
                return Plan(kind="wait", face=FACES[0], point_local=FACES[0].a)
            # Every rotation staging is pocketed; nudge the block inward with
            # whatever translate is available and retry later.
            return self._translate_plan(state, self._errors(state)[0])
        score, (face, p, c) = self._pick(scored)
        self.chosen_faces.append(face.name)
        stop_ang = min(0.005, abs(ang) - self.cfg.min_phase_rot)
        return Plan(
            kind="rotate",
            face=face,
            point_local=p,
            rot_sign=sign,
            stop_ang=max(stop_ang, 0.002),
            rot_target=target,
            cross=c,
            start_xy=block.xy.copy(),
            start_theta=block.theta,
        )

    def _graze_plan(self, state: SimState) -> Plan:
        idx = int(self.rng.integers(0, len(AXIS_FACES)))
        face = AXIS_FACES[idx]
        return Plan(kind="graze", face=face, point_local=face.axis_point(), graze_hold=2)

    # -- plan execution ----------------------------------------------------

    def _advance(self, state: SimState, plan: Plan):
        plan.steps += 1
        stalled = False
        if plan.stage == APPROACH:
            d = float(np.linalg.norm(state.effector - self._staging(state, plan)))
            if d < plan.best_approach - 2.0:
                plan.best_approach = d
                plan.no_progress = 0
            else:
                plan.no_progress += 1
            stalled = (
                plan.no_progress > self.cfg.approach_patience
                or plan.steps - plan.push_steps > self.cfg.max_approach_steps
            )
        if stalled:
            # Abandon an unreachable approach; deprioritise this face and try
            # the other way around next time.
            self._stalls[plan.face.name] = self._stalls.get(plan.face.name, 0) + 1
            self._cached_face = None
            return self._retreat_cmd(state, plan)[0], True
        if plan.kind == "translate":
            return self._advance_translate(state, plan)
        if plan.kind == "rotate":
            return self._advance_rotate(state, plan)
        if plan.kind == "wait":
            w = self.sim.config.workspace_size
            drift = state.effector + (np.array([w / 2, w / 2]) - state.effector) * 0.1
            return drift, plan.steps >= 6
        return self._advance_graze(state, plan)

    def _contact_goal(self, state: SimState, plan: Plan):
        block = state.block
        n_w = block.rotation() @ plan.face.normal
        q_w = block.to_world(plan.point_local)
        return q_w, n_w

    def _staging(self, state: SimState, plan: Plan):
        q_w, n_w = self._contact_goal(state, plan)
        return q_w + n_w * (self.sim.config.effector_radius + self.cfg.standoff)

    def _retreat_cmd(self, state: SimState, plan: Plan):
        q_w, n_w = self._contact_goal(state, plan)
        dist, _, normal = block_sdf_world(state.effector, state.block)
        out = state.effector + normal * 8.0
        released = dist >= self.sim.config.effector_radius + 4.0
        return out, released

    def _advance_translate(self, state: SimState, plan: Plan):
        cfg = self.cfg
        q_w, n_w = self._contact_goal(state, plan)
        if plan.stage == APPROACH:
            staging = self._staging(state, plan)
            if float(np.linalg.norm(state.effector - staging)) <= 2.0:
                plan.stage = PUSH
            else:
                return self._navigate(state, staging, plan), False
        if plan.stage == PUSH:
            plan.push_steps += 1
            push_dir = -n_w
            err = state.goal.xy - state.block.xy
            # Ride this face to the foot of the perpendicular: productive
            # while the goal keeps a positive component along the push.
            proj = float(np.dot(err, push_dir))
            moved = float(np.linalg.norm(state.block.xy - plan.start_xy))
            give_up = plan.push_steps > cfg.max_push_steps or self._pushing_into_wall(
                state, push_dir
            )
            reached = proj <= plan.stop_err and moved >= cfg.min_phase_disp
            if reached or give_up:
                plan.stage = RETREAT
            else:
                remaining = proj - plan.stop_err
                depth = float(np.clip(remaining * 0.7, 0.6, cfg.push_depth))
                return q_w + n_w * (self.sim.config.effector_radius - depth), False
        return self._retreat_cmd(state, plan)

    def _advance_rotate(self, state: SimState, plan: Plan):
        cfg = self.cfg
        q_w, n_w = self._contact_goal(state, plan)
        if plan.stage == APPROACH:
            staging = self._staging(state, plan)
            if float(np.linalg.norm(state.effector - staging)) <= 2.0:
                plan.stage = PUSH
            else:
                return self._navigate(state, staging, plan), False
        if plan.stage == PUSH:
            plan.push_steps += 1
            target = plan.rot_target if plan.rot_target is not None else state.goal.theta
            rem = wrap_angle(target - state.block.theta)
            rotated = abs(wrap_angle(state.block.theta - plan.start_theta))
            reached = plan.rot_sign * rem <= plan.stop_ang and rotated >= cfg.min_phase_rot
            sdf, _, _ = block_sdf_world(state.effector, state.block)
            if sdf > self.sim.config.effector_radius + 3.0 and plan.push_steps > 3:
                plan.lost_contact += 1
            else:
                plan.lost_contact = 0
            if plan.lost_contact > 2 and rotated < cfg.min_phase_rot and plan.nav_flips < 3:
                # Keep the phase alive: re-approach rather than releasing with
                # a sub-threshold rotation the labeler would read as a graze.
                plan.stage = APPROACH
                plan.lost_contact = 0
                plan.nav_flips += 1
                return self._navigate(state, self._staging(state, plan), plan), False
            if reached or plan.push_steps > cfg.max_push_steps or plan.lost_contact > 2:
                plan.stage = RETREAT
            else:
                k_rot = self.sim.config.rotation_gain
                lever = max(abs(plan.cross), 4.0)
                want = max(plan.rot_sign * rem, cfg.min_phase_rot - rotated)
                # Until the phase clears the labeler's angle threshold, every
                # contact step must rotate by more than that threshold.
                floor = cfg.min_step_rot / (k_rot * lever) if rotated < cfg.min_phase_rot else 0.05
                cap = cfg.rot_step_cap / (k_rot * lever)
                depth = float(np.clip(want / (k_rot * lever), floor, min(2.0, cap)))
                # Anticipate where the contact lands after this step's twist
                # so the effector does not momentarily lose the face.
                dtheta = k_rot * plan.cross * depth
                c, s = math.cos(dtheta), math.sin(dtheta)
                rel = q_w - state.block.xy
                q_next = state.block.xy + np.array(
                    [c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]]
                ) - n_w * depth
                n_next = np.array([c * n_w[0] - s * n_w[1], s * n_w[0] + c * n_w[1]])
                return q_next + n_next * (self.sim.config.effector_radius - depth), False
        return self._retreat_cmd(state, plan)

    def _advance_graze(self, state: SimState, plan: Plan):
        q_w, n_w = self._contact_goal(state, plan)
        touch = q_w + n_w * (self.sim.config.effector_radius + 0.2)
        if plan.stage == APPROACH:
            staging = self._staging(state, plan)
            if float(np.linalg.norm(state.effector - staging)) <= 2.0:
                plan.stage = PUSH
            else:
                return self._navigate(state, staging, plan), False
        if plan.stage == PUSH:
            # Touch without penetrating: contact flag on, block unmoved.
            if float(np.linalg.norm(state.effector - touch)) <= 0.1:
                plan.graze_hold -= 1
            if plan.graze_hold <= 0:
                plan.stage = RETREAT
            else:
                return touch, False
        return self._retreat_cmd(state, plan)

    # -- navigation --------------------------------------------------------

    def _segment_clear(self, p: np.ndarray, q: np.ndarray, block: Pose2) -> bool:
        r = self.sim.config.effector_radius
        n = max(2, int(np.linalg.norm(q - p) / 6.0) + 1)
        for i in range(n + 1):
            pt = p + (q - p) * (i / n)
            dist, _, _ = block_sdf_world(pt, block)
            if dist < r + 1.5:
                return False
        return True

    def _navigate(self, state: SimState, target: np.ndarray, plan: Plan) -> np.ndarray:
        """Head for target; when blocked, circle the block in a direction
        committed once per plan (re-evaluating both sides each step causes
        limit cycles near ties)."""
        block = state.block
        eff = state.effector
        if self._segment_clear(eff, target, block):
            return target
        w = self.sim.config.workspace_size
        r = self.sim.config.effector_radius
        v = eff - block.xy
        rad = float(np.linalg.norm(v))
        base = math.atan2(v[1], v[0])
        to_t = target - block.xy
        phi_t = math.atan2(to_t[1], to_t[0])
        if plan.nav_dir == 0.0:
            d = wrap_angle(phi_t - base)
            plan.nav_dir = math.copysign(1.0, d) if d != 0.0 else 1.0
            if self._stalls.get(plan.face.name, 0) % 2 == 1:
                plan.nav_dir = -plan.nav_dir  # retry the other way around
        # Straight run to the committed-side tangent point of an inflated
        # circle; the segment check validates, so smaller radii are tried too.
        for ring in (BLOCK_CIRCUMRADIUS + r + 5.0, 90.0, 65.0):
            if rad <= ring + 1.0:
                continue
            a = base + plan.nav_dir * math.acos(ring / rad)
            tp = block.xy + ring * np.array([math.cos(a), math.sin(a)])
            if np.all(tp >= 2.0) and np.all(tp <= w - 2.0) and self._segment_clear(
                eff, tp, block
            ):
                return tp
        # Slide around the block at the current radius.
        turn = plan.nav_dir * min(14.0 / max(rad, 30.0), 0.3)
        c, s = math.cos(turn), math.sin(turn)
        wp = block.xy + np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])
        wp = np.clip(wp, 2.0, w - 2.0)
        dist, closest, normal = block_sdf_world(wp, block)
        if dist < r + 2.5:
            wp = np.clip(closest + normal * (r + 3.5), 2.0, w - 2.0)
            dist, _, _ = block_sdf_world(wp, block)
        if dist >= r + 2.0 and float(np.linalg.norm(wp - eff)) > 3.0:
            return wp
        if plan.nav_flips < 1:
            # Pinched against a wall: go around the other way.
            plan.nav_dir = -plan.nav_dir
            plan.nav_flips += 1
            return eff.copy()
        # Boxed in; step radially outward and let the stall guard re-plan.
        return np.clip(eff + v / max(rad, 1e-9) * 10.0, 2.0, w - 2.0)


# -- episode recording -------------------------------------------------------


@dataclass
class DemoEpisode:
    """Index-aligned per-step records; action[i] was commanded from state[i]."""

    seed: int
    observations: np.ndarray   # (L, 20)
    actions: np.ndarray        # (L, 2)
    poses: np.ndarray          # (L, 3) block pose
    contact_flags: np.ndarray  # (L,)
    contact_points: np.ndarray # (L, 2)
    coverage: float            # terminal coverage
    success: bool
    injected_misop: str | None = None

    @property
    def length(self) -> int:
        return int(self.observations.shape[0])


def record_episode(
    sim: PushTSim,
    seed: int,
    misop_rate: float = 0.3,
    max_steps: int = 300,
    coverage_target: float = 0.95,
    force_choice: int | None = None,
) -> DemoEpisode:
    """Run the scripted expert from reset(seed) until coverage or step cap."""
    if not 0.0 <= misop_rate <= 0.5:
        raise ValueError("misop_rate must lie in [0, 0.5]")
    state = sim.reset(seed)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2024)))
    expert = ScriptedExpert(sim, rng=rng, force_choice=force_choice)
    if rng.random() < misop_rate:
        kind = "graze" if rng.random() < 0.5 else "overshoot"
        expert.schedule_misop(kind, after_plans=1)

    obs, acts, poses, cflags, cpoints = [], [], [], [], []
    cov = sim.coverage(state.block)
    for _ in range(max_steps):
        contact = sim.contact_status(state)
        cmd = expert.plan_push(state)
        obs.append(observation(state))
        acts.append(cmd.copy())
        poses.append(state.block.as_array())
        cflags.append(1.0 if contact.in_contact else 0.0)
        cpoints.append(contact.point.copy())
        state = sim.step(state, cmd)
        cov = sim.coverage(state.block)
        if cov >= coverage_target:
            break
    return DemoEpisode(
        seed=seed,
        observations=np.array(obs),
        actions=np.array(acts),
        poses=np.array(poses),
        contact_flags=np.array(cflags),
        contact_points=np.array(cpoints),
        coverage=float(cov),
        success=bool(cov >= coverage_target),
        injected_misop=expert.misop_done,
    )
