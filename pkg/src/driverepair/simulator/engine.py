"""Fixed-step kinematic replay: scripted world, parameterized ego planner.

The ego runs a 1.5-D model: arc length along the route plus a lateral lane
offset for borrow maneuvers. Each tick the planner picks the lowest of the
applicable speed targets (cruise, light stop, sign stop, obstacle stop or
follow, yield hold) and tracks it with bounded acceleration. Rule programs
rewrite planner parameters live through the same scene the emitted frame
describes, so replaying the record reproduces every decision input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import obb_corners, obb_overlap, segment_hits_aabb
from ..mudrive.catalog import PlannerParams
from ..mudrive.grammar import MuDriveProgram
from ..mudrive.runtime import RuleStates, step_rules
from ..trace_model import (
    EGO_HALF_LEN,
    EGO_HALF_WID,
    EgoPose,
    MapContext,
    Obstacle,
    RawRecordFrame,
    TrafficLightState,
    scene_from_frame,
)
from .scenarios import ScenarioScript

DT = 0.1
STOPLINE_STANDOFF = 4.0     # stop this far before a stop line or sign
CRUISE_MARGIN_KMH = 0.5     # planner keeps this much under the cruise setting
BASE_ACCEL = 3.0            # m/s^2 at obstacle_decrease_ratio 1
CORRIDOR_HALF_WIDTH = 2.0
STANDSTILL = 0.139          # m/s, matches the 0.5 km/h stopped threshold
BORROW_OFFSET = 3.0
BORROW_SLEW = 1.5           # m/s lateral
BLOCKED_BEFORE_BORROW_S = 5.0
PREDICTION_HORIZON_S = 3.0
MOVING_NPC_KMH = 3.0

OUTCOME_REACHED = "reached_destination"
OUTCOME_COLLIDED = "collided"
OUTCOME_TIMEOUT = "timed_out"


@dataclass
class _SignState:
    waited: float = 0.0
    served: bool = False


def _stop_profile(a_max: float, run: float) -> float:
    return math.sqrt(2.0 * a_max * max(0.0, run))


def _round4(x: float) -> float:
    return round(x + 0.0, 4)


class _World:
    def __init__(self, script: ScenarioScript):
        self.script = script
        self.t = 0.0
        self.s = 0.0
        self.v = script.start_speed_kmh / 3.6   # m/s
        self.prev_v = self.v
        self.offset = 0.0
        self.offset_goal = 0.0
        self.borrow_phase = "none"      # none | out | pass | back
        self.borrow_past_s = 0.0
        self.blocked_time = 0.0
        self.signs = [_SignState() for _ in script.stop_signs]

    # -- frame emission -----------------------------------------------------

    def current_light(self):
        for light in self.script.lights:
            if self.s <= light.release_s:
                return light
        return None

    def emit_frame(self) -> RawRecordFrame:
        script = self.script
        obstacles = []
        for npc in script.npcs:
            x, y, heading, speed = npc.state_at(self.t)
            obstacles.append(Obstacle(
                id=npc.id, kind=npc.kind,
                x=_round4(x), y=_round4(y), heading=_round4(heading),
                speed=_round4(speed),
                half_len=npc.half_len, half_wid=npc.half_wid,
                predicted=tuple((_round4(p[0]), _round4(p[1]), _round4(p[2]))
                                for p in npc.predicted(self.t)),
            ))

        light = self.current_light()
        light_state = None
        if light is not None:
            light_state = TrafficLightState(
                color=light.color_at(self.t),
                dist_to_stopline=_round4(light.stopline_s - self.s))

        signs_ahead = [s for s in script.stop_signs if s >= self.s - 1.0]
        dist_sign = min(signs_ahead) - self.s if signs_ahead else 9999.0

        steering = 0.0
        if abs(self.offset_goal - self.offset) > 1e-9:
            steering = 6.0 if self.offset_goal > self.offset else -6.0

        accel = (self.v - self.prev_v) / DT

        return RawRecordFrame(
            t=_round4(self.t),
            ego=EgoPose(x=_round4(self.s), y=_round4(self.offset), heading=0.0,
                        speed=_round4(self.v * 3.6), accel=_round4(accel),
                        steering=_round4(steering), gear="drive"),
            obstacles=tuple(obstacles),
            traffic_light=light_state,
            weather=script.weather,
            map_ctx=MapContext(
                in_junction=script.junction_at(self.s) is not None,
                dist_to_junction=_round4(script.dist_to_junction(self.s)),
                lane_kind=script.lane_kind_at(self.s),
                dist_to_dest=_round4(max(0.0, script.route_len_m - self.s)),
                dist_to_stop_sign=_round4(max(0.0, dist_sign)),
                is_changing_lane=abs(self.offset_goal - self.offset) > 1e-9,
            ),
        )

    # -- planner ------------------------------------------------------------

    def _corridor_ahead(self, frame):
        """Obstacles in the ego lane corridor ahead: (gap, speed_ms, obstacle)."""
        found = []
        for ob in frame.obstacles:
            lon = ob.x - self.s
            lat = ob.y - self.offset
            if lon > 0.5 and abs(lat) < CORRIDOR_HALF_WIDTH:
                gap = lon - ob.half_len - EGO_HALF_LEN
                found.append((gap, ob.speed / 3.6, ob))
        return sorted(found, key=lambda item: item[0])

    def _yield_conflict(self, frame, yield_dist: float) -> bool:
        """Crossing traffic whose predicted path cuts the corridor close ahead."""
        for ob in frame.obstacles:
            if ob.speed < MOVING_NPC_KMH:
                continue
            lon = ob.x - self.s
            lat = ob.y - self.offset
            if lon > 0.5 and abs(lat) < CORRIDOR_HALF_WIDTH:
                continue  # already a follow/stop case
            if math.hypot(ob.x - self.s, ob.y - self.offset) > 2.5 * yield_dist:
                continue
            band = CORRIDOR_HALF_WIDTH + ob.half_wid
            pts = [(ob.x, ob.y)] + [(px, py) for _, px, py in ob.predicted]
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                if segment_hits_aabb(x0 - self.s, y0 - self.offset,
                                     x1 - self.s, y1 - self.offset,
                                     0.5, yield_dist, -band, band):
                    return True
        return False

    def _oncoming_gap_clear(self, frame, overtake_dist: float) -> bool:
        for ob in frame.obstacles:
            if ob.speed < MOVING_NPC_KMH:
                continue
            lon = ob.x - self.s
            lat = ob.y - self.offset
            if lon > 0 and 0.5 <= lat <= 5.5 and lon <= overtake_dist + 20.0:
                return False
        return True

    def plan(self, frame, scene, params: PlannerParams):
        a_max = BASE_ACCEL * max(params.obstacle_decrease_ratio, 0.1)
        targets = [max(0.0, params.cruise_speed_kmh - CRUISE_MARGIN_KMH) / 3.6]

        # red / yellow light: brake once the stopline is within the
        # engagement distance, aiming at a fixed standoff before the line
        light = frame.traffic_light
        if (light is not None and light.color in ("red", "yellow")
                and 0.0 <= light.dist_to_stopline <= params.traffic_light_stop_dist_m):
            targets.append(_stop_profile(
                a_max, light.dist_to_stopline - STOPLINE_STANDOFF))

        # stop signs: always anticipated; wait, then proceed
        for sign_s, state in zip(self.script.stop_signs, self.signs):
            if state.served:
                continue
            ds = sign_s - self.s
            if ds < -1.0:
                state.served = True
                continue
            targets.append(_stop_profile(a_max, ds - STOPLINE_STANDOFF))
            if self.v < STANDSTILL and ds - STOPLINE_STANDOFF <= 1.0:
                state.waited += DT
                if state.waited >= params.stop_sign_wait_s:
                    state.served = True

        # obstacles ahead in the corridor: stop behind static ones, follow
        # moving ones
        corridor = self._corridor_ahead(frame)
        blocked = False
        blocker = None
        if corridor:
            gap, lead_v, ob = corridor[0]
            if lead_v * 3.6 < MOVING_NPC_KMH:
                targets.append(_stop_profile(a_max, gap - params.obstacle_stop_dist_m))
                if gap <= params.obstacle_stop_dist_m + 4.0:
                    blocked = True
                    blocker = ob
            elif gap <= 1.5 * params.follow_dist_m:
                targets.append(max(0.0, lead_v + 0.5 * (gap - params.follow_dist_m)))

        if self._yield_conflict(frame, params.yield_dist_m):
            targets.append(0.0)

        # lane borrow state machine
        if self.borrow_phase == "none":
            if blocked and self.v < STANDSTILL:
                self.blocked_time += DT
            else:
                self.blocked_time = 0.0
            if (params.lane_borrow_enabled and blocker is not None
                    and self.blocked_time > BLOCKED_BEFORE_BORROW_S
                    and self._oncoming_gap_clear(frame, params.overtake_dist_m)):
                self.borrow_phase = "out"
                self.offset_goal = BORROW_OFFSET
                self.borrow_past_s = (blocker.x + blocker.half_len
                                      + EGO_HALF_LEN + 3.0)
        elif self.borrow_phase == "out":
            if self.offset >= BORROW_OFFSET - 0.1:
                self.borrow_phase = "pass"
        elif self.borrow_phase == "pass":
            if self.s > self.borrow_past_s:
                self.borrow_phase = "back"
                self.offset_goal = 0.0
        elif self.borrow_phase == "back":
            if abs(self.offset) <= 0.05:
                self.borrow_phase = "none"
                self.blocked_time = 0.0

        return min(targets), a_max

    def integrate(self, target: float, a_max: float):
        self.prev_v = self.v
        dv = max(-a_max * DT, min(a_max * DT, target - self.v))
        self.v = max(0.0, self.v + dv)
        self.s += self.v * DT
        if self.offset != self.offset_goal:
            step = BORROW_SLEW * DT
            delta = self.offset_goal - self.offset
            self.offset += math.copysign(min(step, abs(delta)), delta)
        self.t += DT


def _ego_collides(frame: RawRecordFrame) -> bool:
    ego_box = obb_corners(frame.ego.x, frame.ego.y, frame.ego.heading,
                          EGO_HALF_LEN, EGO_HALF_WID)
    for ob in frame.obstacles:
        box = obb_corners(ob.x, ob.y, ob.heading, ob.half_len, ob.half_wid)
        if obb_overlap(ego_box, box):
            return True
    return False


def run_scenario(script: ScenarioScript, program: MuDriveProgram | None = None,
                 base: PlannerParams | None = None):
    """Replay a script, optionally under a repair program.

    Returns (frames, outcome); deterministic for identical inputs.
    """
    base = base or PlannerParams()
    world = _World(script)
    states = RuleStates.initial()
    frames = []
    outcome = OUTCOME_TIMEOUT

    max_ticks = int(round(script.duration_s / DT))
    for _ in range(max_ticks + 1):
        frame = world.emit_frame()
        frames.append(frame)

        if _ego_collides(frame):
            outcome = OUTCOME_COLLIDED
            break
        if script.route_len_m - world.s <= 0.5:
            outcome = OUTCOME_REACHED
            break
        if world.t >= script.duration_s:
            outcome = OUTCOME_TIMEOUT
            break

        scene = scene_from_frame(frame)
        if program is not None:
            params, states = step_rules(program, scene, states, base)
        else:
            params = base
        target, a_max = world.plan(frame, scene, params)
        world.integrate(target, a_max)

    return frames, outcome
