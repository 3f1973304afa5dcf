"""Scenario scripts: a straight route with junctions, lights, signs, NPCs.

The eight benchmark scripts recreate classic misbehaviour archetypes; the
default planner parameters are deliberately mis-tuned, so every baseline run
violates its paired specification. Route geometry is one straight lane along
+x with a neighbour lane at +3.5 m for borrow maneuvers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..trace_model import WeatherState


class ScenarioError(ValueError):
    """Malformed scenario script."""


@dataclass(frozen=True)
class NpcSpec:
    id: str
    kind: str = "vehicle"
    half_len: float = 2.3
    half_wid: float = 1.0
    waypoints: tuple = ()     # ((t, x, y, speed_kmh), ...) time-ordered

    def state_at(self, t: float):
        """Position, heading, speed at time t (holds endpoints)."""
        wps = self.waypoints
        if not wps:
            raise ScenarioError(f"npc {self.id} has no waypoints")
        if t <= wps[0][0]:
            return wps[0][1], wps[0][2], self._heading(0), 0.0
        if t >= wps[-1][0]:
            return wps[-1][1], wps[-1][2], self._heading(len(wps) - 2), 0.0
        for i in range(len(wps) - 1):
            t0, x0, y0, _ = wps[i]
            t1, x1, y1, v1 = wps[i + 1]
            if t0 <= t <= t1:
                frac = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
                x = x0 + frac * (x1 - x0)
                y = y0 + frac * (y1 - y0)
                if x0 == x1 and y0 == y1:
                    return x, y, self._heading(i), 0.0
                return x, y, math.atan2(y1 - y0, x1 - x0), v1
        return wps[-1][1], wps[-1][2], self._heading(len(wps) - 2), 0.0

    def _heading(self, seg: int):
        wps = self.waypoints
        for i in range(max(seg, 0), len(wps) - 1):
            if (wps[i][1], wps[i][2]) != (wps[i + 1][1], wps[i + 1][2]):
                return math.atan2(wps[i + 1][2] - wps[i][2],
                                  wps[i + 1][1] - wps[i][1])
        return 0.0

    def predicted(self, t: float, horizon=3.0, step=0.5):
        out = []
        rel = step
        while rel <= horizon + 1e-9:
            x, y, _, _ = self.state_at(t + rel)
            out.append((rel, x, y))
            rel += step
        return tuple(out)


@dataclass(frozen=True)
class LightSpec:
    stopline_s: float
    release_s: float                     # control span ends here
    schedule: tuple                      # ((color, duration_s), ...) cycled

    def color_at(self, t: float) -> str:
        total = sum(d for _, d in self.schedule)
        if total <= 0:
            raise ScenarioError("light schedule must have positive duration")
        t = t % total
        for color, dur in self.schedule:
            if t < dur:
                return color
            t -= dur
        return self.schedule[-1][0]


@dataclass(frozen=True)
class ScenarioScript:
    id: str
    route_len_m: float
    duration_s: float = 200.0
    description: str = ""
    start_speed_kmh: float = 0.0
    lane_segments: tuple = ()            # ((s0, s1, kind), ...), default normal
    junctions: tuple = ()                # ((s0, s1), ...)
    lights: tuple = ()
    stop_signs: tuple = ()
    npcs: tuple = ()
    weather: WeatherState = field(default_factory=WeatherState)

    def __post_init__(self):
        if self.route_len_m <= 0:
            raise ScenarioError("route must have positive length")
        if self.duration_s <= 0:
            raise ScenarioError("duration must be positive")
        for npc in self.npcs:
            times = [w[0] for w in npc.waypoints]
            if times != sorted(times):
                raise ScenarioError(f"npc {npc.id} waypoints out of order")
        for light in self.lights:
            if any(d <= 0 for _, d in light.schedule):
                raise ScenarioError("light phases must have positive duration")

    def lane_kind_at(self, s: float) -> str:
        for s0, s1, kind in self.lane_segments:
            if s0 <= s <= s1:
                return kind
        return "normal"

    def junction_at(self, s: float):
        for s0, s1 in self.junctions:
            if s0 <= s <= s1:
                return (s0, s1)
        return None

    def dist_to_junction(self, s: float) -> float:
        if self.junction_at(s) is not None:
            return 0.0
        ahead = [s0 - s for s0, _ in self.junctions if s0 > s]
        return min(ahead) if ahead else 9999.0


# ---------------------------------------------------------------------------
# Benchmark scripts
# ---------------------------------------------------------------------------

def _crosser(npc_id, x, y_from, y_to, speed_ms, t_start):
    dur = abs(y_to - y_from) / speed_ms
    return NpcSpec(
        id=npc_id,
        waypoints=(
            (0.0, x, y_from, 0.0),
            (t_start, x, y_from, 0.0),
            (t_start + dur, x, y_to, speed_ms * 3.6),
        ),
    )


def _s1():
    # Green-light junction; crossing traffic arrives as the ego turns in.
    crossings = (9.9, 12.4, 14.9, 17.4)   # times at which each crosser hits y=0
    npcs = tuple(
        _crosser(f"cross{i + 1}", 130.0, 70.0, -70.0, 12.0, t - 70.0 / 12.0)
        for i, t in enumerate(crossings)
    )
    return ScenarioScript(
        id="S1",
        description="Entered a green-light junction without yielding to"
                    " straight-moving traffic.",
        route_len_m=260.0,
        duration_s=45.0,
        junctions=((120.0, 146.0),),
        lights=(LightSpec(118.0, 146.0, (("green", 600.0),)),),
        npcs=npcs,
    )


def _s2():
    crossings = (17.2, 19.7)
    npcs = tuple(
        _crosser(f"cross{i + 1}", 99.5, 55.0, -55.0, 20.0, t - 55.0 / 20.0)
        for i, t in enumerate(crossings)
    )
    return ScenarioScript(
        id="S2",
        description="Pulled out from a stop sign into oncoming"
                    " straight-through traffic.",
        route_len_m=240.0,
        duration_s=50.0,
        junctions=((85.0, 112.0),),
        stop_signs=(80.0,),
        npcs=npcs,
    )


def _s3():
    return ScenarioScript(
        id="S3",
        description="Entered the intersection on a yellow light.",
        route_len_m=300.0,
        duration_s=50.0,
        junctions=((150.0, 176.0),),
        lights=(LightSpec(148.0, 176.0,
                          (("green", 8.0), ("yellow", 3.0), ("red", 15.0),
                           ("green", 600.0))),),
        npcs=(NpcSpec(id="parked1", waypoints=((0.0, 210.0, 7.0, 0.0),
                                               (600.0, 210.0, 7.0, 0.0))),),
    )


def _s4():
    return ScenarioScript(
        id="S4",
        description="Entered the intersection on a red light.",
        route_len_m=300.0,
        duration_s=60.0,
        junctions=((150.0, 176.0),),
        lights=(LightSpec(148.0, 176.0,
                          (("green", 4.0), ("yellow", 2.0), ("red", 30.0),
                           ("green", 600.0))),),
        npcs=(NpcSpec(id="parked1", waypoints=((0.0, 210.0, 7.0, 0.0),
                                               (600.0, 210.0, 7.0, 0.0))),),
    )


def _s5():
    return ScenarioScript(
        id="S5",
        description="Came to a stop behind a static obstacle in the fast"
                    " lane instead of changing lanes.",
        route_len_m=260.0,
        duration_s=70.0,
        start_speed_kmh=20.0,
        lane_segments=((40.0, 220.0, "fast"),),
        npcs=(NpcSpec(id="stalled1", waypoints=((0.0, 120.0, 0.0, 0.0),
                                                (600.0, 120.0, 0.0, 0.0))),),
    )


def _s6():
    return ScenarioScript(
        id="S6",
        description="Kept speeding in dense fog.",
        route_len_m=340.0,
        duration_s=75.0,
        weather=WeatherState(fog=0.8, visibility=40.0),
        npcs=(NpcSpec(id="parked1", waypoints=((0.0, 200.0, 7.0, 0.0),
                                               (600.0, 200.0, 7.0, 0.0))),),
    )


def _s7():
    def jam(npc_id, x, y):
        return NpcSpec(id=npc_id, waypoints=(
            (0.0, x, y, 0.0),
            (25.0, x, y, 0.0),
            (50.0, x + 250.0, y, 36.0),
        ))

    return ScenarioScript(
        id="S7",
        description="Drove into a junction jammed with stopped traffic.",
        route_len_m=280.0,
        duration_s=75.0,
        junctions=((150.0, 180.0),),
        npcs=(jam("jam1", 165.0, 0.0), jam("jam2", 160.0, 3.5),
              jam("jam3", 170.0, -3.5)),
    )


def _s8():
    return ScenarioScript(
        id="S8",
        description="Got stuck behind a stationary vehicle and never"
                    " finished the journey.",
        route_len_m=260.0,
        duration_s=70.0,
        start_speed_kmh=20.0,
        npcs=(NpcSpec(id="stalled1", waypoints=((0.0, 120.0, 0.0, 0.0),
                                                (600.0, 120.0, 0.0, 0.0))),),
    )


def _empty():
    return ScenarioScript(
        id="empty",
        description="Empty straight road, nothing to do but drive.",
        route_len_m=300.0,
        duration_s=40.0,
    )


_BUILDERS = {"S1": _s1, "S2": _s2, "S3": _s3, "S4": _s4, "S5": _s5,
             "S6": _s6, "S7": _s7, "S8": _s8, "empty": _empty}

# Which specification each benchmark scenario is checked against.
PAIRED_SPECS = {
    "S1": "no_collision",
    "S2": "no_collision",
    "S3": "law38_yellow",
    "S4": "law38_red",
    "S5": "law44",
    "S6": "law46",
    "S7": "law53",
    "S8": "finish_journey",
}


def scenario_by_id(scenario_id: str) -> ScenarioScript:
    try:
        return _BUILDERS[scenario_id]()
    except KeyError:
        raise ScenarioError(f"unknown scenario {scenario_id!r}; expected one of"
                            f" {sorted(_BUILDERS)}") from None


def benchmark_suite() -> list:
    """The eight benchmark scripts, S1 through S8."""
    return [scenario_by_id(f"S{i}") for i in range(1, 9)]


# ---------------------------------------------------------------------------
# JSON scenario files
# ---------------------------------------------------------------------------

def script_to_dict(script: ScenarioScript) -> dict:
    return {
        "id": script.id,
        "description": script.description,
        "route_len_m": script.route_len_m,
        "duration_s": script.duration_s,
        "start_speed_kmh": script.start_speed_kmh,
        "lane_segments": [list(seg) for seg in script.lane_segments],
        "junctions": [list(j) for j in script.junctions],
        "lights": [{"stopline_s": li.stopline_s, "release_s": li.release_s,
                    "schedule": [list(p) for p in li.schedule]}
                   for li in script.lights],
        "stop_signs": list(script.stop_signs),
        "npcs": [{"id": n.id, "kind": n.kind, "half_len": n.half_len,
                  "half_wid": n.half_wid,
                  "waypoints": [list(w) for w in n.waypoints]}
                 for n in script.npcs],
        "weather": {"rain": script.weather.rain, "fog": script.weather.fog,
                    "snow": script.weather.snow,
                    "visibility": script.weather.visibility},
    }


def script_from_dict(doc: dict) -> ScenarioScript:
    try:
        weather = doc.get("weather", {})
        return ScenarioScript(
            id=str(doc["id"]),
            description=doc.get("description", ""),
            route_len_m=float(doc["route_len_m"]),
            duration_s=float(doc.get("duration_s", 200.0)),
            start_speed_kmh=float(doc.get("start_speed_kmh", 0.0)),
            lane_segments=tuple((float(a), float(b), str(k))
                                for a, b, k in doc.get("lane_segments", [])),
            junctions=tuple((float(a), float(b))
                            for a, b in doc.get("junctions", [])),
            lights=tuple(LightSpec(float(li["stopline_s"]), float(li["release_s"]),
                                   tuple((str(c), float(d))
                                         for c, d in li["schedule"]))
                         for li in doc.get("lights", [])),
            stop_signs=tuple(float(s) for s in doc.get("stop_signs", [])),
            npcs=tuple(NpcSpec(id=str(n["id"]), kind=n.get("kind", "vehicle"),
                               half_len=float(n.get("half_len", 2.3)),
                               half_wid=float(n.get("half_wid", 1.0)),
                               waypoints=tuple(tuple(float(v) for v in w)
                                               for w in n["waypoints"]))
                       for n in doc.get("npcs", [])),
            weather=WeatherState(rain=float(weather.get("rain", 0.0)),
                                 fog=float(weather.get("fog", 0.0)),
                                 snow=float(weather.get("snow", 0.0)),
                                 visibility=float(weather.get("visibility", 500.0))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario document: {exc}") from exc


def load_script(path) -> ScenarioScript:
    with open(path, "r", encoding="utf-8") as fh:
        return script_from_dict(json.load(fh))
