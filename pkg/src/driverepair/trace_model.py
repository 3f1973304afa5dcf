"""Driving records, scenes, traces, and the signal-variable catalog.

A record is a JSONL file, one frame per line. Each frame snapshots the ego
vehicle, surrounding obstacles, the governing traffic light, weather, and
map context. A trace resamples a record at a fixed step and evaluates every
signal variable the property language can mention, one scene per step.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

from .geometry import obb_corners, obb_distance

DEFAULT_DT = 0.1
STOPPED_KMH = 0.5          # below this the vehicle counts as stopped
AHEAD_LATERAL_M = 2.0      # half-width of the "ahead" corridor in the ego frame
FAR = 9999.0               # distance sentinel: no such feature on the route

EGO_HALF_LEN = 2.4
EGO_HALF_WID = 1.05

OBSTACLE_KINDS = ("vehicle", "pedestrian", "cyclist", "unknown")
GEARS = ("drive", "reverse", "park")
LIGHT_COLORS = ("off", "red", "yellow", "green")
LANE_KINDS = ("normal", "fast", "slow")

LIGHT_CODE = {"off": 0.0, "red": 1.0, "yellow": 2.0, "green": 3.0}
LANE_CODE = {"normal": 0.0, "fast": 1.0, "slow": 2.0}
GEAR_CODE = {"park": 0.0, "drive": 1.0, "reverse": 2.0}

JAM_SPEED_KMH = 2.0        # obstacles slower than this count toward congestion
JAM_MIN_COUNT = 3


class RecordError(ValueError):
    """Malformed or invalid driving record."""


class CatalogError(KeyError):
    """Unknown or misused signal variable."""


# ---------------------------------------------------------------------------
# Raw record frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EgoPose:
    x: float
    y: float
    heading: float          # radians
    speed: float            # km/h
    accel: float            # m/s^2
    steering: float         # degrees
    gear: str = "drive"


@dataclass(frozen=True)
class Obstacle:
    id: str
    kind: str
    x: float
    y: float
    heading: float
    speed: float            # km/h
    half_len: float
    half_wid: float
    predicted: tuple = ()   # ((t_rel, x, y), ...)


@dataclass(frozen=True)
class TrafficLightState:
    color: str
    dist_to_stopline: float  # metres; negative once the stopline is behind


@dataclass(frozen=True)
class WeatherState:
    rain: float = 0.0
    fog: float = 0.0
    snow: float = 0.0
    visibility: float = 500.0


@dataclass(frozen=True)
class MapContext:
    in_junction: bool = False
    dist_to_junction: float = FAR
    lane_kind: str = "normal"
    dist_to_dest: float = FAR
    dist_to_stop_sign: float = FAR
    is_changing_lane: bool = False


@dataclass(frozen=True)
class RawRecordFrame:
    t: float
    ego: EgoPose
    obstacles: tuple = ()
    traffic_light: TrafficLightState | None = None
    weather: WeatherState = field(default_factory=WeatherState)
    map_ctx: MapContext = field(default_factory=MapContext)


def _require(cond, msg):
    if not cond:
        raise RecordError(msg)


def _frame_from_dict(doc, where=""):
    known = {"t", "ego", "obstacles", "traffic_light", "weather", "map_ctx"}
    extra = set(doc) - known
    if extra:
        warnings.warn(f"ignoring unknown record fields {sorted(extra)}{where}")

    ego_doc = doc["ego"]
    _require(ego_doc.get("gear", "drive") in GEARS, f"bad gear{where}")
    _require(ego_doc["speed"] >= 0, f"negative ego speed{where}")
    ego = EgoPose(
        x=float(ego_doc["x"]), y=float(ego_doc["y"]),
        heading=float(ego_doc["heading"]), speed=float(ego_doc["speed"]),
        accel=float(ego_doc.get("accel", 0.0)),
        steering=float(ego_doc.get("steering", 0.0)),
        gear=ego_doc.get("gear", "drive"),
    )

    obstacles = []
    for ob in doc.get("obstacles", []):
        _require(ob.get("kind", "unknown") in OBSTACLE_KINDS, f"bad obstacle kind{where}")
        _require(ob["half_len"] > 0 and ob["half_wid"] > 0, f"non-positive obstacle box{where}")
        _require(ob["speed"] >= 0, f"negative obstacle speed{where}")
        obstacles.append(Obstacle(
            id=str(ob["id"]), kind=ob.get("kind", "unknown"),
            x=float(ob["x"]), y=float(ob["y"]), heading=float(ob.get("heading", 0.0)),
            speed=float(ob["speed"]),
            half_len=float(ob["half_len"]), half_wid=float(ob["half_wid"]),
            predicted=tuple((float(p[0]), float(p[1]), float(p[2]))
                            for p in ob.get("predicted", [])),
        ))

    light = None
    if doc.get("traffic_light") is not None:
        tl = doc["traffic_light"]
        _require(tl["color"] in LIGHT_COLORS, f"bad light color{where}")
        light = TrafficLightState(color=tl["color"],
                                  dist_to_stopline=float(tl["dist_to_stopline"]))

    w = doc.get("weather", {})
    weather = WeatherState(
        rain=float(w.get("rain", 0.0)), fog=float(w.get("fog", 0.0)),
        snow=float(w.get("snow", 0.0)), visibility=float(w.get("visibility", 500.0)),
    )
    _require(weather.visibility > 0, f"non-positive visibility{where}")

    m = doc.get("map_ctx", {})
    _require(m.get("lane_kind", "normal") in LANE_KINDS, f"bad lane kind{where}")
    map_ctx = MapContext(
        in_junction=bool(m.get("in_junction", False)),
        dist_to_junction=float(m.get("dist_to_junction", FAR)),
        lane_kind=m.get("lane_kind", "normal"),
        dist_to_dest=float(m.get("dist_to_dest", FAR)),
        dist_to_stop_sign=float(m.get("dist_to_stop_sign", FAR)),
        is_changing_lane=bool(m.get("is_changing_lane", False)),
    )

    return RawRecordFrame(t=float(doc["t"]), ego=ego, obstacles=tuple(obstacles),
                          traffic_light=light, weather=weather, map_ctx=map_ctx)


def frame_to_dict(frame: RawRecordFrame) -> dict:
    doc = {
        "t": frame.t,
        "ego": {
            "x": frame.ego.x, "y": frame.ego.y, "heading": frame.ego.heading,
            "speed": frame.ego.speed, "accel": frame.ego.accel,
            "steering": frame.ego.steering, "gear": frame.ego.gear,
        },
        "obstacles": [
            {
                "id": ob.id, "kind": ob.kind, "x": ob.x, "y": ob.y,
                "heading": ob.heading, "speed": ob.speed,
                "half_len": ob.half_len, "half_wid": ob.half_wid,
                "predicted": [list(p) for p in ob.predicted],
            }
            for ob in frame.obstacles
        ],
        "traffic_light": None if frame.traffic_light is None else {
            "color": frame.traffic_light.color,
            "dist_to_stopline": frame.traffic_light.dist_to_stopline,
        },
        "weather": {
            "rain": frame.weather.rain, "fog": frame.weather.fog,
            "snow": frame.weather.snow, "visibility": frame.weather.visibility,
        },
        "map_ctx": {
            "in_junction": frame.map_ctx.in_junction,
            "dist_to_junction": frame.map_ctx.dist_to_junction,
            "lane_kind": frame.map_ctx.lane_kind,
            "dist_to_dest": frame.map_ctx.dist_to_dest,
            "dist_to_stop_sign": frame.map_ctx.dist_to_stop_sign,
            "is_changing_lane": frame.map_ctx.is_changing_lane,
        },
    }
    return doc


def load_record(path) -> list[RawRecordFrame]:
    """Parse a JSONL record. Frames come back sorted by t, strictly increasing."""
    frames = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"line {lineno}: not valid JSON ({exc.msg})") from exc
            try:
                frames.append(_frame_from_dict(doc, where=f" (line {lineno})"))
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, RecordError):
                    raise
                raise RecordError(f"line {lineno}: bad frame ({exc})") from exc
    frames.sort(key=lambda f: f.t)
    for a, b in zip(frames, frames[1:]):
        _require(b.t > a.t, f"timestamps not strictly increasing at t={b.t}")
    return frames


def save_record(frames, path) -> None:
    """Write frames as canonical JSONL (compact separators, field order fixed)."""
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame_to_dict(frame), separators=(",", ":")))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Scenes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scene:
    """Per-step valuation of the base signals behind every catalog variable."""
    speed: float
    accel: float
    npc_ahead_dist: float       # nearest corridor obstacle ahead, centre offset
    nearest_npc_dist: float     # nearest obstacle, centre-to-centre
    nearest_npc_sep: float      # nearest obstacle, box clearance
    dist_to_junction: float
    dist_to_stopline: float     # FAR when no light ahead or stopline passed
    dist_to_stop_sign: float
    dist_to_dest: float
    light_color: str
    light_dist_raw: float       # may be negative while inside the junction
    rain: float
    fog: float
    snow: float
    visibility: float
    in_junction: bool
    lane_kind: str
    gear: str
    overtaking: bool
    changing_lane: bool
    congested: bool

    @property
    def stopped(self) -> bool:
        return self.speed < STOPPED_KMH


def _ego_frame_offsets(ego: EgoPose, ob: Obstacle):
    dx, dy = ob.x - ego.x, ob.y - ego.y
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    lon = c * dx + s * dy
    lat = -s * dx + c * dy
    return lon, lat


def scene_from_frame(frame: RawRecordFrame) -> Scene:
    ego = frame.ego
    ego_box = obb_corners(ego.x, ego.y, ego.heading, EGO_HALF_LEN, EGO_HALF_WID)

    ahead = FAR
    nearest = FAR
    sep = FAR
    for ob in frame.obstacles:
        lon, lat = _ego_frame_offsets(ego, ob)
        dist = math.hypot(ob.x - ego.x, ob.y - ego.y)
        nearest = min(nearest, dist)
        box = obb_corners(ob.x, ob.y, ob.heading, ob.half_len, ob.half_wid)
        sep = min(sep, obb_distance(ego_box, box))
        if lon > 0 and abs(lat) < AHEAD_LATERAL_M:
            ahead = min(ahead, lon)

    dj = frame.map_ctx.dist_to_junction
    slow_near_junction = 0
    for ob in frame.obstacles:
        if ob.speed < JAM_SPEED_KMH:
            dist = math.hypot(ob.x - ego.x, ob.y - ego.y)
            if max(0.0, dj - 5.0) <= dist <= dj + 45.0:
                slow_near_junction += 1

    if frame.traffic_light is None:
        color, raw = "off", FAR
    else:
        color, raw = frame.traffic_light.color, frame.traffic_light.dist_to_stopline
    stopline = raw if (frame.traffic_light is not None and raw >= 0) else FAR

    changing = frame.map_ctx.is_changing_lane
    return Scene(
        speed=ego.speed,
        accel=ego.accel,
        npc_ahead_dist=ahead,
        nearest_npc_dist=nearest,
        nearest_npc_sep=sep,
        dist_to_junction=0.0 if frame.map_ctx.in_junction else dj,
        dist_to_stopline=stopline,
        dist_to_stop_sign=frame.map_ctx.dist_to_stop_sign,
        dist_to_dest=frame.map_ctx.dist_to_dest,
        light_color=color,
        light_dist_raw=raw,
        rain=frame.weather.rain,
        fog=frame.weather.fog,
        snow=frame.weather.snow,
        visibility=frame.weather.visibility,
        in_junction=frame.map_ctx.in_junction,
        lane_kind=frame.map_ctx.lane_kind,
        gear=ego.gear,
        overtaking=changing and nearest <= 20.0,
        changing_lane=changing,
        congested=slow_near_junction >= JAM_MIN_COUNT,
    )


# ---------------------------------------------------------------------------
# Signal variable catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalVar:
    name: str
    arg: float | None = None

    def __str__(self):
        if self.arg is None:
            return self.name
        arg = int(self.arg) if float(self.arg).is_integer() else self.arg
        return f"{self.name}({arg})"


def _bool_margin(flag: bool) -> float:
    return 1.0 if flag else -1.0


# kind: real | enum | bool | pred. Parametric predicates carry a distance
# threshold; their margin is positive exactly when the predicate holds.
_CATALOG = {
    "speed": ("real", False, lambda sc, a: sc.speed, None),
    "accel": ("real", False, lambda sc, a: sc.accel, None),
    "rainIntensity": ("real", False, lambda sc, a: sc.rain, None),
    "fogIntensity": ("real", False, lambda sc, a: sc.fog, None),
    "snowIntensity": ("real", False, lambda sc, a: sc.snow, None),
    "visibility": ("real", False, lambda sc, a: sc.visibility, None),
    "trafficLightColor": ("enum", False, lambda sc, a: sc.light_color, LIGHT_CODE),
    "laneKind": ("enum", False, lambda sc, a: sc.lane_kind, LANE_CODE),
    "gear": ("enum", False, lambda sc, a: sc.gear, GEAR_CODE),
    "isOverTaking": ("bool", False, lambda sc, a: sc.overtaking, None),
    "isChangingLane": ("bool", False, lambda sc, a: sc.changing_lane, None),
    "inJunction": ("bool", False, lambda sc, a: sc.in_junction, None),
    "junctionCongested": ("bool", False, lambda sc, a: sc.congested, None),
    "stopped": ("bool", False, lambda sc, a: sc.stopped, None),
    "NPCAhead": ("pred", True, lambda sc, a: sc.npc_ahead_dist, None),
    "junctionAhead": ("pred", True, lambda sc, a: sc.dist_to_junction, None),
    "stoplineAhead": ("pred", True, lambda sc, a: sc.dist_to_stopline, None),
    "signAhead": ("pred", True, lambda sc, a: sc.dist_to_stop_sign, None),
    "NearestNPC": ("pred", True, lambda sc, a: sc.nearest_npc_sep, None),
    "dest": ("pred", True, lambda sc, a: sc.dist_to_dest, None),
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog_kind(name: str) -> str:
    try:
        return _CATALOG[name][0]
    except KeyError:
        raise CatalogError(f"unknown signal variable {name!r}") from None


def _check_var(var: SignalVar):
    kind, needs_arg, _, _ = _CATALOG.get(var.name) or (None, None, None, None)
    if kind is None:
        raise CatalogError(f"unknown signal variable {var.name!r}")
    if needs_arg and var.arg is None:
        raise CatalogError(f"{var.name} requires a parameter, e.g. {var.name}(10)")
    if not needs_arg and var.arg is not None:
        raise CatalogError(f"{var.name} does not take a parameter")
    return kind


def var_value(scene: Scene, var: SignalVar):
    """Catalog valuation of a variable in one scene.

    Reals and enums return their stored value; booleans and parametric
    predicates return the truth of their defining condition.
    """
    kind = _check_var(var)
    _, _, getter, _ = _CATALOG[var.name]
    raw = getter(scene, var.arg)
    if kind in ("real", "enum"):
        return raw
    if kind == "bool":
        return bool(raw)
    return raw <= var.arg  # pred: feature within the threshold distance


def var_margin(scene: Scene, var: SignalVar) -> float:
    """Signed satisfaction margin used by the quantitative semantics.

    Positive iff `var_value` is true (booleans map to +/-1, `stopped` to its
    speed margin, parametric predicates to threshold minus distance).
    """
    kind = _check_var(var)
    _, _, getter, _ = _CATALOG[var.name]
    raw = getter(scene, var.arg)
    if kind == "pred":
        return var.arg - raw
    if var.name == "stopped":
        return STOPPED_KMH - scene.speed
    if kind == "bool":
        return _bool_margin(bool(raw))
    raise CatalogError(f"{var.name} has no boolean reading; compare it instead")


def var_numeric(scene: Scene, var: SignalVar) -> float:
    """Numeric value for use inside linear expressions (reals and enums)."""
    kind = _check_var(var)
    _, _, getter, codes = _CATALOG[var.name]
    raw = getter(scene, var.arg)
    if kind == "real":
        return float(raw)
    if kind == "enum":
        return codes[raw]
    raise CatalogError(f"{var.name} is not numeric; use it as a bare proposition")


def enum_code(name: str, literal: str) -> float:
    _, _, _, codes = _CATALOG[name]
    if codes is None or literal not in codes:
        valid = sorted(codes) if codes else []
        raise CatalogError(f"{literal!r} is not a value of {name} (expected one of {valid})")
    return codes[literal]


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

class Trace:
    """Immutable sequence of scenes at a fixed time step."""

    def __init__(self, scenes, dt: float = DEFAULT_DT):
        scenes = tuple(scenes)
        if not scenes:
            raise ValueError("trace must contain at least one scene")
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.scenes = scenes
        self.dt = dt
        self._signal_cache: dict = {}

    def __len__(self):
        return len(self.scenes)

    def scene(self, t: int) -> Scene:
        if not 0 <= t < len(self.scenes):
            raise IndexError(f"step {t} outside trace of length {len(self.scenes)}")
        return self.scenes[t]


def scene_value(trace: Trace, var: SignalVar, t: int):
    """Valuation of one catalog variable at step t. Pure."""
    return var_value(trace.scene(t), var)


def build_trace(frames, dt: float = DEFAULT_DT) -> Trace:
    """Resample frames at spacing dt (nearest frame wins) and evaluate scenes."""
    if not frames:
        raise ValueError("cannot build a trace from an empty record")
    if dt <= 0:
        raise ValueError("dt must be positive")
    t0 = frames[0].t
    span = frames[-1].t - t0
    steps = int(round(span / dt)) + 1
    times = [f.t for f in frames]
    scenes = []
    j = 0
    for i in range(steps):
        target = t0 + i * dt
        while j + 1 < len(times) and abs(times[j + 1] - target) <= abs(times[j] - target):
            j += 1
        scenes.append(scene_from_frame(frames[j]))
    return Trace(scenes, dt=dt)
