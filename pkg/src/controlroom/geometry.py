"""Pointing-gesture geometry.

Turns raw skeleton frames into pointed-monitor gesture events: rigid
transform from sensor to room coordinates, pointing detection by hand
height and speed, shoulder-hand ray casting against the screen plane,
and per-window target probabilities.

Room coordinate convention (right-handed): origin at the center of the
screen base, x rightward when facing the screen, y up, z toward the
user. The screen occupies the z = 0 plane.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

Vec3 = tuple[float, float, float]

TRACKED = "tracked"
INFERRED = "inferred"
NOT_TRACKED = "not_tracked"

REQUIRED_JOINTS = ("SpineMid", "ShoulderLeft", "ShoulderRight", "HandLeft", "HandRight")


class InvalidFrameError(ValueError):
    """A required joint is missing or untracked."""


class InsufficientDataError(ValueError):
    """Not enough frames to evaluate a detection filter."""


class DegenerateRayError(ValueError):
    """Shoulder and hand coincide; no pointing direction exists."""


@dataclass(frozen=True)
class Joint:
    pos: Vec3
    state: str = TRACKED


@dataclass(frozen=True)
class SkeletonFrame:
    """One timestamped set of 3D joints (meters)."""

    t_ms: int
    joints: Mapping[str, Joint]

    def joint(self, name: str) -> Joint:
        try:
            return self.joints[name]
        except KeyError:
            raise InvalidFrameError(f"frame at t={self.t_ms} is missing joint {name!r}") from None

    def require_joints(self, names: Sequence[str] = REQUIRED_JOINTS) -> None:
        missing = [n for n in names if n not in self.joints]
        if missing:
            raise InvalidFrameError(f"frame at t={self.t_ms} is missing joints {missing}")


@dataclass(frozen=True)
class SensorConfig:
    """Pose of the depth sensor in room coordinates.

    tilt: inclination about the x-axis, radians (positive = tilted up).
    sensor_height: meters above the floor.
    user_distance: sensor offset from the screen plane along +z.
    lateral_offset: sensor offset from the screen centerline along +x.
    """

    tilt: float = 0.0
    sensor_height: float = 0.0
    user_distance: float = 0.0
    lateral_offset: float = 0.0

    def __post_init__(self) -> None:
        if not abs(self.tilt) < math.pi / 2:
            raise ValueError(f"sensor tilt must satisfy |tilt| < pi/2, got {self.tilt}")
        if self.sensor_height < 0:
            raise ValueError(f"sensor_height must be >= 0, got {self.sensor_height}")


@dataclass(frozen=True)
class ScreenLayout:
    """Flat screen plane at z = 0 divided into a rows x cols monitor grid.

    Monitor ids run 1..rows*cols row-major with row 1 at the top.
    x spans [-width/2, width/2], y spans [0, height].
    """

    width: float = 4.4
    height: float = 2.5
    rows: int = 3
    cols: int = 3

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.rows < 1 or self.cols < 1:
            raise ValueError("screen layout dimensions must be positive")

    @property
    def monitor_count(self) -> int:
        return self.rows * self.cols

    def monitor_cell(self, monitor: int) -> tuple[int, int]:
        """(row, col), both 1-based, row 1 at the top."""
        if not 1 <= monitor <= self.monitor_count:
            raise ValueError(f"monitor id {monitor} outside 1..{self.monitor_count}")
        return (monitor - 1) // self.cols + 1, (monitor - 1) % self.cols + 1

    def cell_monitor(self, row: int, col: int) -> int:
        if not (1 <= row <= self.rows and 1 <= col <= self.cols):
            raise ValueError(f"cell ({row},{col}) outside the {self.rows}x{self.cols} grid")
        return (row - 1) * self.cols + col

    def cell_bounds(self, monitor: int) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of a monitor cell in room coordinates."""
        row, col = self.monitor_cell(monitor)
        cw = self.width / self.cols
        ch = self.height / self.rows
        x_min = -self.width / 2 + (col - 1) * cw
        y_max = self.height - (row - 1) * ch
        return x_min, x_min + cw, y_max - ch, y_max

    def cell_center(self, monitor: int) -> tuple[float, float]:
        x_min, x_max, y_min, y_max = self.cell_bounds(monitor)
        return (x_min + x_max) / 2, (y_min + y_max) / 2

    def monitor_at(self, x: float, y: float) -> Optional[int]:
        """Monitor containing the screen-plane point, or None when off screen.

        The right and top outer edges are clamped inward so the whole
        closed screen rectangle maps to a monitor.
        """
        if not (-self.width / 2 <= x <= self.width / 2 and 0 <= y <= self.height):
            return None
        col = min(int((x + self.width / 2) / (self.width / self.cols)), self.cols - 1)
        row_from_bottom = min(int(y / (self.height / self.rows)), self.rows - 1)
        row = self.rows - 1 - row_from_bottom
        return row * self.cols + col + 1


@dataclass(frozen=True)
class DetectionParams:
    """Pointing-detection filter thresholds.

    band_low/band_high bound the hand height relative to SpineMid;
    speed_max bounds the mean hand speed over the trailing lookback.
    Defaults are our own calibration, not published values.
    """

    band_low: float = -0.2
    band_high: float = 0.8
    speed_max: float = 0.8
    lookback_ms: int = 200


@dataclass(frozen=True)
class PointingSample:
    t_ms: int
    ray_origin: Vec3
    ray_direction: Vec3
    hit: Optional[int] = None


@dataclass(frozen=True)
class PointingDistribution:
    """Per-monitor pointing probabilities over one sample window."""

    window_start: int
    window_end: int
    probs: Mapping[int, float]

    def argmax(self) -> Optional[tuple[int, float]]:
        if not self.probs:
            return None
        # ties break toward the lowest monitor id
        best = min(self.probs, key=lambda m: (-self.probs[m], m))
        return best, self.probs[best]


@dataclass(frozen=True)
class GestureEvent:
    """A recognized pointing act: target monitor, confidence, occurrence interval."""

    monitor: int
    confidence: float
    start: int
    end: int


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def rotate_about_x(p: Vec3, angle: float) -> Vec3:
    """Right-handed rotation of a point about the x-axis."""
    c, s = math.cos(angle), math.sin(angle)
    return (p[0], p[1] * c - p[2] * s, p[1] * s + p[2] * c)


def transform_skeleton(frame: SkeletonFrame, config: SensorConfig) -> SkeletonFrame:
    """Map a sensor-coordinate frame into room coordinates.

    Rigid motion: every joint is rotated by -tilt about the x-axis and
    translated by the sensor position (lateral_offset, sensor_height,
    user_distance). Raises InvalidFrameError when a required joint is
    absent.
    """
    frame.require_joints()
    moved = {}
    for name, joint in frame.joints.items():
        x, y, z = rotate_about_x(joint.pos, -config.tilt)
        moved[name] = Joint(
            (x + config.lateral_offset, y + config.sensor_height, z + config.user_distance),
            joint.state,
        )
    return SkeletonFrame(frame.t_ms, moved)


def sensor_from_room(frame: SkeletonFrame, config: SensorConfig) -> SkeletonFrame:
    """Inverse of transform_skeleton; used to synthesize sensor-space streams."""
    moved = {}
    for name, joint in frame.joints.items():
        x, y, z = joint.pos
        p = (x - config.lateral_offset, y - config.sensor_height, z - config.user_distance)
        moved[name] = Joint(rotate_about_x(p, config.tilt), joint.state)
    return SkeletonFrame(frame.t_ms, moved)


def active_hand(frame: SkeletonFrame) -> str:
    """The hand currently used for pointing.

    Chosen as the hand horizontally (x-z plane) farther from SpineMid;
    ties go to the right hand. Deterministic per frame.
    """
    spine = frame.joint("SpineMid").pos

    def horiz(name: str) -> float:
        p = frame.joint(name).pos
        return math.hypot(p[0] - spine[0], p[2] - spine[2])

    return "HandLeft" if horiz("HandLeft") > horiz("HandRight") else "HandRight"


def hand_speeds(frames: Sequence[SkeletonFrame], hand: str) -> list[float]:
    """Finite-difference speeds (m/s) of one hand between consecutive frames."""
    speeds = []
    for prev, cur in zip(frames, frames[1:]):
        dt = (cur.t_ms - prev.t_ms) / 1000.0
        if dt <= 0:
            raise InvalidFrameError("frame timestamps must strictly increase")
        speeds.append(_norm(_sub(cur.joint(hand).pos, prev.joint(hand).pos)) / dt)
    return speeds


def detect_pointing(recent_frames: Sequence[SkeletonFrame], params: DetectionParams) -> bool:
    """Decide whether the newest frame belongs to a pointing gesture.

    True iff the active hand sits inside the height band around SpineMid
    (excludes very high / very low poses) and its mean speed over the
    lookback stays at or below speed_max (excludes transition movements).
    """
    if len(recent_frames) < 2:
        raise InsufficientDataError("pointing detection needs at least 2 frames")
    current = recent_frames[-1]
    hand = active_hand(current)

    rel_height = current.joint(hand).pos[1] - current.joint("SpineMid").pos[1]
    if not params.band_low <= rel_height <= params.band_high:
        return False

    cutoff = current.t_ms - params.lookback_ms
    window = [f for f in recent_frames if f.t_ms >= cutoff]
    if len(window) < 2:
        window = list(recent_frames[-2:])
    speeds = hand_speeds(window, hand)
    return sum(speeds) / len(speeds) <= params.speed_max


def cast_ray(frame: SkeletonFrame, layout: ScreenLayout) -> Optional[PointingSample]:
    """Shoot the shoulder->hand ray of the active arm at the screen plane.

    Returns None when the active arm's joints are not tracked. The
    returned sample's hit is None when the ray is parallel to the plane,
    points away from it, or lands outside the screen rectangle.
    """
    hand_name = active_hand(frame)
    shoulder_name = "ShoulderLeft" if hand_name == "HandLeft" else "ShoulderRight"
    shoulder = frame.joint(shoulder_name)
    hand = frame.joint(hand_name)
    if shoulder.state != TRACKED or hand.state != TRACKED:
        return None

    direction = _sub(hand.pos, shoulder.pos)
    length = _norm(direction)
    if length == 0.0:
        raise DegenerateRayError(f"shoulder and hand coincide at t={frame.t_ms}")
    direction = (direction[0] / length, direction[1] / length, direction[2] / length)

    hit = None
    if direction[2] != 0.0:
        t = -shoulder.pos[2] / direction[2]
        if t > 0.0:
            x = shoulder.pos[0] + t * direction[0]
            y = shoulder.pos[1] + t * direction[1]
            hit = layout.monitor_at(x, y)
    return PointingSample(frame.t_ms, shoulder.pos, direction, hit)


def window_distribution(samples: Sequence[PointingSample], window_ms: int) -> PointingDistribution:
    """Relative hit frequencies over the trailing window.

    The window covers [t_latest - window_ms, t_latest]; samples without a
    hit advance the window but do not enter the counts. Empty input or a
    hitless window yields an empty distribution.
    """
    if not samples:
        return PointingDistribution(0, 0, {})
    t_latest = samples[-1].t_ms
    start = t_latest - window_ms
    counts: dict[int, int] = {}
    for s in samples:
        if s.t_ms >= start and s.hit is not None:
            counts[s.hit] = counts.get(s.hit, 0) + 1
    total = sum(counts.values())
    probs = {m: c / total for m, c in counts.items()} if total else {}
    return PointingDistribution(start, t_latest, probs)


def emit_gesture_event(dist: PointingDistribution, min_prob: float = 0.5) -> Optional[GestureEvent]:
    """Promote a distribution to a gesture event when one monitor dominates.

    Emits the argmax monitor with its probability as confidence and the
    window bounds as the occurrence interval; ties break toward the
    lowest monitor id. Returns None below min_prob.
    """
    top = dist.argmax()
    if top is None:
        return None
    monitor, prob = top
    if prob < min_prob:
        return None
    return GestureEvent(monitor, prob, dist.window_start, dist.window_end)


class PointingStream:
    """Single-owner streaming context over one skeleton stream.

    Feeds frames through transform -> detection -> ray cast, keeps the
    sliding sample window, and emits gesture events. A new event is
    emitted once a contiguous sampling run has spanned a full window and
    one monitor dominates; while the same monitor stays dominant the
    event is re-emitted with an extended end every refresh_ms so that a
    long dwell stays live for downstream consumers.

    Not thread-safe; each stream owns exactly one of these.
    """

    def __init__(
        self,
        sensor: SensorConfig,
        layout: ScreenLayout,
        detection: DetectionParams | None = None,
        window_ms: int = 1000,
        min_prob: float = 0.5,
        refresh_ms: int = 250,
        run_gap_ms: int = 300,
        on_distribution: Optional[Callable[[PointingDistribution], None]] = None,
    ):
        self.sensor = sensor
        self.layout = layout
        self.detection = detection or DetectionParams()
        self.window_ms = window_ms
        self.min_prob = min_prob
        self.refresh_ms = refresh_ms
        self.run_gap_ms = run_gap_ms
        self.on_distribution = on_distribution

        self._frames: deque[SkeletonFrame] = deque()
        self._samples: deque[PointingSample] = deque()
        self._run_start: Optional[int] = None
        self._active_monitor: Optional[int] = None
        self._active_start: Optional[int] = None
        self._last_emit_ms: Optional[int] = None
        self.last_distribution: Optional[PointingDistribution] = None

    def push_frame(self, frame: SkeletonFrame) -> list[GestureEvent]:
        """Ingest one sensor-coordinate frame; returns any emitted events."""
        room = transform_skeleton(frame, self.sensor)
        self._frames.append(room)
        lookback = max(self.detection.lookback_ms, 50)
        while self._frames and self._frames[0].t_ms < room.t_ms - 2 * lookback:
            self._frames.popleft()
        if len(self._frames) < 2:
            return []
        if not detect_pointing(list(self._frames), self.detection):
            return []
        sample = cast_ray(room, self.layout)
        if sample is None:
            return []
        return self.push_sample(sample)

    def push_sample(self, sample: PointingSample) -> list[GestureEvent]:
        """Ingest a pointing sample directly (also the pointer-injection path)."""
        if self._samples and sample.t_ms - self._samples[-1].t_ms > self.run_gap_ms:
            self.break_run()
        if self._run_start is None:
            self._run_start = sample.t_ms
        self._samples.append(sample)
        while self._samples and self._samples[0].t_ms < sample.t_ms - self.window_ms:
            self._samples.popleft()

        dist = window_distribution(list(self._samples), self.window_ms)
        self.last_distribution = dist
        if self.on_distribution is not None:
            self.on_distribution(dist)

        if sample.t_ms - self._run_start < self.window_ms:
            return []
        candidate = emit_gesture_event(dist, self.min_prob)
        if candidate is None:
            return []

        if candidate.monitor != self._active_monitor:
            self._active_monitor = candidate.monitor
            self._active_start = candidate.start
            self._last_emit_ms = sample.t_ms
            return [candidate]
        if self._last_emit_ms is not None and sample.t_ms - self._last_emit_ms >= self.refresh_ms:
            # refresh: same dwell, extended occurrence interval
            self._last_emit_ms = sample.t_ms
            start = self._active_start if self._active_start is not None else candidate.start
            return [GestureEvent(candidate.monitor, candidate.confidence, start, candidate.end)]
        return []

    def break_run(self) -> None:
        """Close the current sampling run (pointer released / tracking gap)."""
        self._samples.clear()
        self._run_start = None
        self._active_monitor = None
        self._active_start = None
        self._last_emit_ms = None
