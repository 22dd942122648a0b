"""Scenario replay, synthetic data generation, and evaluation metrics.

Replays run on a virtual clock: script events are converted to their
arrival times (an utterance's interpretation exists only once speech
ends), fed through geometry -> NLU -> fusion -> room state, and always
produce the same event log for the same scenario, config, and seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import environment, nlu
from .config import PipelineConfig
from .fusion import Command, FusionEngine
from .geometry import (
    GestureEvent,
    Joint,
    PointingStream,
    ScreenLayout,
    SensorConfig,
    SkeletonFrame,
    sensor_from_room,
)

OUTCOME_SUCCESS = "S"
OUTCOME_PARTIAL = "PS"
OUTCOME_FAILURE = "F"

OUTCOME_WEIGHTS = {OUTCOME_SUCCESS: 1.0, OUTCOME_PARTIAL: 0.5, OUTCOME_FAILURE: 0.0}

FIXTURES_DIR = Path(__file__).parent / "fixtures"


class ScenarioError(ValueError):
    """Malformed scenario file or script."""


class UndefinedMetricError(ValueError):
    """A rate was requested over an empty or unannotated population."""


# ---------------------------------------------------------------------------
# scenario model


@dataclass(frozen=True)
class ScenarioEvent:
    t_ms: int
    kind: str  # "skeleton" | "gesture" | "utterance"
    payload: Mapping

    def arrival_ms(self) -> int:
        """When the event's product reaches the fusion engine."""
        if self.kind == "utterance":
            return self.t_ms + int(self.payload.get("duration_ms", 0))
        if self.kind == "gesture":
            return int(self.payload["end"])
        return self.t_ms


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    description: str
    events: tuple[ScenarioEvent, ...]
    expected: tuple[Mapping, ...]
    annotations: tuple[Mapping, ...] = ()

    def __post_init__(self) -> None:
        ts = [e.t_ms for e in self.events]
        if ts != sorted(ts):
            raise ScenarioError(f"scenario {self.scenario_id}: events not timestamp-ordered")


@dataclass(frozen=True)
class Outcome:
    label: str
    scenario_id: str = ""
    clarifications: int = 0
    issued: tuple[Mapping, ...] = ()
    expected: tuple[Mapping, ...] = ()
    rejections: int = 0


@dataclass(frozen=True)
class MetricsReport:
    task_completion_rate: float
    nlu_success_rate: Optional[float]
    gesture_accuracy: Optional[float]
    outcomes: tuple[Outcome, ...]

    def to_dict(self) -> dict:
        return {
            "task_completion_rate": self.task_completion_rate,
            "nlu_success_rate": self.nlu_success_rate,
            "gesture_accuracy": self.gesture_accuracy,
            "outcomes": [
                {"scenario": o.scenario_id, "label": o.label, "clarifications": o.clarifications}
                for o in self.outcomes
            ],
        }


def _frame_to_dict(frame: SkeletonFrame) -> dict:
    return {
        "t_ms": frame.t_ms,
        "joints": {
            name: {"pos": list(j.pos), "state": j.state} for name, j in frame.joints.items()
        },
    }


def frame_from_dict(d: Mapping) -> SkeletonFrame:
    joints = {}
    for name, entry in d["joints"].items():
        if isinstance(entry, Mapping):
            joints[name] = Joint(tuple(entry["pos"]), entry.get("state", "tracked"))
        else:  # bare [x, y, z] shorthand
            joints[name] = Joint(tuple(entry))
    return SkeletonFrame(int(d["t_ms"]), joints)


def scenario_to_dict(scn: Scenario) -> dict:
    return {
        "id": scn.scenario_id,
        "description": scn.description,
        "events": [{"t_ms": e.t_ms, "kind": e.kind, "payload": e.payload} for e in scn.events],
        "expected": list(scn.expected),
        "annotations": list(scn.annotations),
    }


def scenario_from_dict(d: Mapping) -> Scenario:
    try:
        events = tuple(
            ScenarioEvent(int(e["t_ms"]), e["kind"], e["payload"]) for e in d["events"]
        )
        for e in events:
            if e.kind not in ("skeleton", "gesture", "utterance"):
                raise ScenarioError(f"unknown event kind {e.kind!r}")
        return Scenario(
            scenario_id=str(d["id"]),
            description=d.get("description", ""),
            events=events,
            expected=tuple(d.get("expected", ())),
            annotations=tuple(d.get("annotations", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(payload)


def save_scenario(scn: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn), indent=1), encoding="utf-8")


# ---------------------------------------------------------------------------
# replay


@dataclass
class ScenarioRun:
    scenario: Scenario
    outcome: Outcome
    log: list[dict]
    room: environment.RoomState
    commands: list[Command]


def run_scenario(
    scenario: Scenario,
    config: PipelineConfig,
    model: nlu.NluModel,
) -> ScenarioRun:
    """Replay one scenario through the full pipeline on a virtual clock."""
    engine = FusionEngine(config.fusion)
    stream = PointingStream(
        config.sensor,
        config.screen,
        config.detection,
        window_ms=config.window_ms,
        min_prob=config.min_prob,
    )
    room = environment.initial_state()
    commands: list[Command] = []
    extra_log: list[dict] = []

    def handle_command(cmd: Command) -> None:
        nonlocal room
        commands.append(cmd)
        result = environment.apply(room, cmd)
        if isinstance(result, environment.Rejection):
            extra_log.append(
                {
                    "t_ms": cmd.issued_at,
                    "kind": "rejection",
                    "reason": result.reason,
                    "command": cmd.signature(),
                }
            )
        else:
            room = result
            extra_log.append({"t_ms": cmd.issued_at, "kind": "room", "state": room.to_dict()})

    engine.on_command = handle_command

    arrivals = sorted(
        scenario.events, key=lambda e: (e.arrival_ms(), {"skeleton": 0, "gesture": 1, "utterance": 2}[e.kind])
    )
    for event in arrivals:
        if event.kind == "skeleton":
            frame = frame_from_dict(event.payload)
            for gesture in stream.push_frame(frame):
                engine.submit_gesture(gesture)
            engine.advance_to(frame.t_ms)
        elif event.kind == "gesture":
            p = event.payload
            gesture = GestureEvent(
                int(p["monitor"]), float(p["confidence"]), int(p["start"]), int(p["end"])
            )
            engine.submit_gesture(gesture)
            if "intended_object" in p:
                extra_log.append(
                    {
                        "t_ms": gesture.end,
                        "kind": "gesture_eval",
                        "intended": p["intended_object"],
                        "recognized": gesture.monitor,
                        "correct": gesture.monitor == p["intended_object"],
                    }
                )
        elif event.kind == "utterance":
            p = event.payload
            start = event.t_ms
            end = start + int(p["duration_ms"])
            result = nlu.interpret(model, p["text"], start, end)
            engine.submit_nlu(result)
            if "intended_intent" in p:
                extra_log.append(
                    {
                        "t_ms": end,
                        "kind": "nlu_eval",
                        "intended": p["intended_intent"],
                        "actual": result.top_intent,
                        "correct": result.top_intent == p["intended_intent"],
                    }
                )
        else:
            raise ScenarioError(f"unknown event kind {event.kind!r}")
    engine.flush()

    log = sorted(engine.log + extra_log, key=lambda r: r["t_ms"])
    log += _evaluate_gesture_truth(scenario, engine.log)

    clarifications = sum(1 for r in engine.log if r["kind"] == "clarification")
    rejections = sum(1 for r in extra_log if r["kind"] == "rejection")
    issued = tuple(c.signature() for c in commands)
    expected = tuple(dict(e) for e in scenario.expected)
    if issued == expected and clarifications == 0:
        label = OUTCOME_SUCCESS
    elif issued == expected:
        label = OUTCOME_PARTIAL
    else:
        label = OUTCOME_FAILURE
    outcome = Outcome(label, scenario.scenario_id, clarifications, issued, expected, rejections)
    return ScenarioRun(scenario, outcome, log, room, commands)


def _evaluate_gesture_truth(scenario: Scenario, engine_log: list[dict]) -> list[dict]:
    """Score recognized pointing targets against scripted ground truth.

    A gesture record belongs to the dwell containing its interval
    midpoint (an estimation window straddling two dwells counts for the
    one it mostly covers); the recognized object for a dwell is the
    monitor of the last such record, and no record counts as a miss.
    """
    records = []
    gestures = [r for r in engine_log if r["kind"] == "gesture"]
    for ann in scenario.annotations:
        if "object" not in ann:
            continue
        start, end = int(ann["start_ms"]), int(ann["end_ms"])
        inside = [g for g in gestures if start <= (g["start"] + g["end"]) / 2 <= end]
        recognized = inside[-1]["monitor"] if inside else None
        records.append(
            {
                "t_ms": end,
                "kind": "gesture_eval",
                "intended": ann["object"],
                "recognized": recognized,
                "correct": recognized == ann["object"],
            }
        )
    return records


def run_suite(
    scenarios: Sequence[Scenario],
    config: PipelineConfig,
    model: nlu.NluModel,
) -> tuple[list[ScenarioRun], MetricsReport]:
    runs = [run_scenario(s, config, model) for s in scenarios]
    outcomes = [r.outcome for r in runs]
    all_records = [rec for r in runs for rec in r.log]
    try:
        nlu_rate, gesture_rate = module_success_rates(all_records)
    except UndefinedMetricError:
        nlu_rate, gesture_rate = None, None
    report = MetricsReport(
        task_completion_rate=task_completion_rate(outcomes),
        nlu_success_rate=nlu_rate,
        gesture_accuracy=gesture_rate,
        outcomes=tuple(outcomes),
    )
    return runs, report


# ---------------------------------------------------------------------------
# metrics


def task_completion_rate(outcomes: Sequence[Union[Outcome, str]]) -> float:
    """Weighted success average: S = 1, PS = 0.5, F = 0."""
    if not outcomes:
        raise UndefinedMetricError("task completion rate over zero outcomes")
    total = 0.0
    for o in outcomes:
        label = o.label if isinstance(o, Outcome) else o
        if label not in OUTCOME_WEIGHTS:
            raise UndefinedMetricError(f"unknown outcome label {label!r}")
        total += OUTCOME_WEIGHTS[label]
    return total / len(outcomes)


def module_success_rates(records: Sequence[Mapping]) -> tuple[float, float]:
    """(nlu_success_rate, gesture_accuracy) from annotated eval records."""
    nlu_evals = [r for r in records if r.get("kind") == "nlu_eval"]
    gesture_evals = [r for r in records if r.get("kind") == "gesture_eval"]
    if not nlu_evals or not gesture_evals:
        raise UndefinedMetricError("log carries no ground-truth annotations")
    nlu_rate = sum(1 for r in nlu_evals if r["correct"]) / len(nlu_evals)
    gesture_rate = sum(1 for r in gesture_evals if r["correct"]) / len(gesture_evals)
    return nlu_rate, gesture_rate


def load_outcome_grid(path: Union[str, Path, None] = None) -> tuple[list[str], list[str], list[list[str]]]:
    """(task ids, user ids, outcome grid) from the shipped study fixture."""
    p = Path(path) if path else FIXTURES_DIR / "task_outcomes.json"
    payload = json.loads(p.read_text(encoding="utf-8"))
    return payload["tasks"], payload["users"], payload["grid"]


def grid_outcomes(grid: Sequence[Sequence[str]]) -> list[str]:
    return [label for row in grid for label in row]


# ---------------------------------------------------------------------------
# synthetic skeleton traces

ARM_LENGTH = 0.55
SHOULDER_HEIGHT = 1.40
SHOULDER_OFFSET = 0.18
SPINE_HEIGHT = 1.00
REST_HAND_HEIGHT = 0.72
USER_DEPTH = 3.0  # operator distance used across the evaluation fixtures


@dataclass(frozen=True)
class TraceProfile:
    """Shape of a synthetic pointing act.

    jitter_sigma is the spread (meters) of the Gaussian hand wander during
    the dwell; the wander is rate-limited so it still passes the pointing
    speed filter. transition_ms is the (fast, filtered-out) movement
    between consecutive targets.
    """

    jitter_sigma: float = 0.0
    dwell_ms: int = 1500
    raise_ms: int = 400
    retract_ms: int = 300
    rest_ms: int = 200
    transition_ms: int = 400
    fps: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dwell_ms <= 0 or self.fps <= 0:
            raise ValueError("dwell_ms and fps must be positive")


def _body_joints(hand_pos: tuple[float, float, float]) -> dict[str, Joint]:
    return {
        "SpineMid": Joint((0.0, SPINE_HEIGHT, USER_DEPTH)),
        "ShoulderLeft": Joint((-SHOULDER_OFFSET, SHOULDER_HEIGHT, USER_DEPTH)),
        "ShoulderRight": Joint((SHOULDER_OFFSET, SHOULDER_HEIGHT, USER_DEPTH)),
        "HandLeft": Joint((-0.20, REST_HAND_HEIGHT, USER_DEPTH)),
        "HandRight": Joint(hand_pos),
    }


def _aim_hand(target: int, layout: ScreenLayout) -> tuple[float, float, float]:
    """Right-hand position that points the shoulder-hand ray at a cell center."""
    shoulder = np.array([SHOULDER_OFFSET, SHOULDER_HEIGHT, USER_DEPTH])
    cx, cy = layout.cell_center(target)
    direction = np.array([cx, cy, 0.0]) - shoulder
    direction /= np.linalg.norm(direction)
    hand = shoulder + ARM_LENGTH * direction
    return float(hand[0]), float(hand[1]), float(hand[2])


def _rest_hand() -> tuple[float, float, float]:
    return (0.22, REST_HAND_HEIGHT, USER_DEPTH)


def pointing_trace(
    targets: Sequence[int],
    profile: TraceProfile,
    layout: ScreenLayout | None = None,
    sensor: SensorConfig | None = None,
    start_ms: int = 0,
    speed_max: float = 0.8,
) -> tuple[list[SkeletonFrame], list[dict]]:
    """Sensor-coordinate frames for one arm raise, dwell(s), and retraction.

    Returns (frames, dwell annotations); each annotation records the
    target and the dwell interval for ground-truth scoring. Deterministic
    for a given profile seed.
    """
    layout = layout or ScreenLayout()
    sensor = sensor or SensorConfig()
    rng = np.random.default_rng(profile.seed)
    dt = 1000.0 / profile.fps
    max_step = 0.6 * speed_max * dt / 1000.0  # keep the wander below the speed filter

    # timeline of (duration, hand position source) segments
    frames: list[SkeletonFrame] = []
    annotations: list[dict] = []
    rest = np.array(_rest_hand())

    def emit(t_ms: float, hand: np.ndarray) -> None:
        room = SkeletonFrame(int(round(t_ms)), _body_joints((float(hand[0]), float(hand[1]), float(hand[2]))))
        frames.append(sensor_from_room(room, sensor))

    t = float(start_ms)
    for _ in range(max(1, int(profile.rest_ms / dt))):
        emit(t, rest)
        t += dt

    previous = rest
    for idx, target in enumerate(targets):
        aim = np.array(_aim_hand(target, layout))
        if idx == 0:
            move_ms = float(profile.raise_ms)
        else:
            # re-pointing must stay above the speed filter even for nearby
            # cells, so the duration scales with the actual hand distance
            hand_dist = float(np.linalg.norm(aim - previous))
            move_ms = max(100.0, min(profile.transition_ms, 1000.0 * hand_dist / (2.0 * speed_max)))
        steps = max(1, int(move_ms / dt))
        for k in range(1, steps + 1):
            emit(t, previous + (aim - previous) * (k / steps))
            t += dt

        dwell_start = t
        offset = np.zeros(3)
        waypoint = np.zeros(3)
        waypoint_every = max(1, int(330 / dt))
        dwell_steps = max(1, int(profile.dwell_ms / dt))
        for k in range(dwell_steps):
            if profile.jitter_sigma > 0:
                if k % waypoint_every == 0:
                    waypoint = rng.normal(0.0, profile.jitter_sigma, 3)
                delta = waypoint - offset
                dist = float(np.linalg.norm(delta))
                if dist > max_step:
                    delta *= max_step / dist
                offset = offset + delta
            emit(t, aim + offset)
            t += dt
        annotations.append(
            {"start_ms": int(dwell_start), "end_ms": int(t - dt), "object": int(target)}
        )
        previous = aim + offset

    steps = max(1, int(profile.retract_ms / dt))
    for k in range(1, steps + 1):
        emit(t, previous + (rest - previous) * (k / steps))
        t += dt

    return frames, annotations


def generate_skeleton_trace(
    target: int,
    profile: TraceProfile | None = None,
    layout: ScreenLayout | None = None,
    sensor: SensorConfig | None = None,
    start_ms: int = 0,
) -> tuple[list[SkeletonFrame], list[dict]]:
    """Single-target wrapper over pointing_trace."""
    return pointing_trace([target], profile or TraceProfile(), layout, sensor, start_ms)


# ---------------------------------------------------------------------------
# utterance corpus grammar

_ORDINAL_WORDS = {
    1: "first", 2: "second", 3: "third", 4: "fourth", 5: "fifth",
    6: "sixth", 7: "seventh", 8: "eighth", 9: "ninth",
}
_POSITIONAL_FORMS = {
    1: "the upper-left monitor",
    3: "the upper-right monitor",
    7: "the lower-left monitor",
    9: "the lower-right monitor",
    5: "the central monitor",
}
_COMPASS_FORMS = {
    1: "the north/west monitor",
    3: "the north/east monitor",
    7: "the south/west monitor",
    9: "the south/east monitor",
    2: "the north monitor",
    8: "the south monitor",
    4: "the west monitor",
    6: "the east monitor",
}

_DEICTICS = ("this one", "that one", "this monitor", "that monitor")
_DEVICES = ("headset", "speakers")
_TIMES = ("thirty seconds", "ten seconds", "two minutes", "a minute", "45 seconds")
_TIME_VALUES = {"thirty seconds": 30.0, "ten seconds": 10.0, "two minutes": 120.0, "a minute": 60.0, "45 seconds": 45.0}

TEMPLATES: Mapping[str, tuple[str, ...]] = {
    "zoom_in": (
        "zoom in on {monitor}",
        "zoom in on {deictic}",
        "enlarge {monitor}",
        "enlarge {deictic}",
        "make {monitor} bigger",
        "bring up {monitor}",
        "focus on {deictic}",
    ),
    "zoom_out": (
        "zoom out",
        "go back to the matrix view",
        "back to the grid",
        "show all the cameras again",
        "return to the full view",
        "zoom out please",
    ),
    "split_screen": (
        "split the screen with {monitor} and {monitor2}",
        "put {monitor} and {monitor2} side by side",
        "show {monitor} next to {monitor2}",
        "compare {deictic} and {deictic2}",
        "put {deictic} and {deictic2} side by side",
        "split {monitor} and {monitor2}",
    ),
    "swap": (
        "swap {monitor} with {monitor2}",
        "swap {deictic} with {deictic2}",
        "swap this monitor with this one",
        "exchange {monitor} and {monitor2}",
        "switch {monitor} and {monitor2}",
    ),
    "audio_to_device": (
        "send the audio to the {device}",
        "put the sound on the {device}",
        "route the audio to the {device}",
        "play the audio through the {device}",
        "convey the audio of {monitor} to the {device}",
    ),
    "audio_off": (
        "turn the audio off",
        "mute the sound",
        "switch the audio off",
        "audio off",
        "turn off the sound",
    ),
    "rewind": (
        "rewind {time}",
        "go back {time}",
        "rewind the video by {time}",
        "jump back {time}",
    ),
    "forward": (
        "go forward {time}",
        "skip ahead {time}",
        "fast forward {time}",
        "move the video forward by {time}",
    ),
}

_BASE_UTTERANCES = (
    ("zoom in on monitor 1", "zoom_in"),
    ("zoom out", "zoom_out"),
    ("split the screen with monitor 1 and monitor 9", "split_screen"),
    ("swap this monitor with this one", "swap"),
    ("send the audio to the headset", "audio_to_device"),
    ("turn the audio off", "audio_off"),
    ("rewind thirty seconds", "rewind"),
    ("go forward thirty seconds", "forward"),
)

# one utterance per monitor-reference form from the elicitation answers
_COVERAGE_UTTERANCES = (
    ("zoom in on the fifth monitor", "zoom_in"),
    ("zoom in on monitor in (2,2)", "zoom_in"),
    ("enlarge the north/west monitor", "zoom_in"),
    ("zoom in on the monitor at the center", "zoom_in"),
    ("enlarge the upper-left monitor", "zoom_in"),
    ("zoom in on the last monitor", "zoom_in"),
    ("zoom in on monitor number 9", "zoom_in"),
    ("swap the first monitor with the lower-right monitor", "swap"),
    ("split the screen with the central monitor and the north/east monitor", "split_screen"),
)


def _monitor_phrase(rng: np.random.Generator) -> tuple[str, int]:
    monitor = int(rng.integers(1, 10))
    row, col = (monitor - 1) // 3 + 1, (monitor - 1) % 3 + 1
    forms = [
        f"monitor {monitor}",
        f"monitor number {monitor}",
        f"the {_ORDINAL_WORDS[monitor]} monitor",
        f"monitor in ({row},{col})",
    ]
    if monitor in _POSITIONAL_FORMS:
        forms.append(_POSITIONAL_FORMS[monitor])
    if monitor in _COMPASS_FORMS:
        forms.append(_COMPASS_FORMS[monitor])
    if monitor == 5:
        forms.append("the monitor at the center")
    if monitor == 9:
        forms.append("the last monitor")
    return forms[int(rng.integers(0, len(forms)))], monitor


def _annotate(text: str, phrase: str, label: str, value) -> Optional[nlu.EntitySpan]:
    start = text.find(phrase)
    if start < 0:
        return None
    return nlu.EntitySpan(label, start, start + len(phrase), value)


def _fill_template(template: str, rng: np.random.Generator) -> tuple[str, list[nlu.EntitySpan]]:
    text = template
    spans: list[tuple[str, str, object]] = []
    if "{monitor}" in text:
        phrase, monitor = _monitor_phrase(rng)
        text = text.replace("{monitor}", phrase, 1)
        spans.append((phrase, "monitor", monitor))
    if "{monitor2}" in text:
        phrase, monitor = _monitor_phrase(rng)
        text = text.replace("{monitor2}", phrase, 1)
        spans.append((phrase, "monitor", monitor))
    if "{deictic}" in text:
        phrase = str(rng.choice(_DEICTICS))
        text = text.replace("{deictic}", phrase, 1)
        spans.append((phrase, "deictic_singular", "singular"))
    if "{deictic2}" in text:
        phrase = str(rng.choice(_DEICTICS))
        text = text.replace("{deictic2}", phrase, 1)
        spans.append((phrase, "deictic_singular", "singular"))
    if "{device}" in text:
        phrase = str(rng.choice(_DEVICES))
        text = text.replace("{device}", phrase, 1)
        spans.append((phrase, "device", phrase))
    if "{time}" in text:
        phrase = str(rng.choice(_TIMES))
        text = text.replace("{time}", phrase, 1)
        spans.append((phrase, "time_offset", _TIME_VALUES[phrase]))
    entities = []
    cursor = 0
    for phrase, label, value in spans:
        start = text.find(phrase, cursor)
        if start >= 0:
            entities.append(nlu.EntitySpan(label, start, start + len(phrase), value))
            cursor = start + len(phrase)
    return text, entities


def generate_corpus(n: int, seed: int = 0) -> list[nlu.LabeledUtterance]:
    """Deterministic labeled corpus sampled from the template grammar.

    The first 8 records cover every intent once; from ~100 records on,
    every monitor-reference form from the elicitation answers appears.
    """
    if n < len(_BASE_UTTERANCES):
        raise ValueError(f"corpus needs n >= {len(_BASE_UTTERANCES)} to cover every intent")
    rng = np.random.default_rng(seed)
    corpus: list[nlu.LabeledUtterance] = []
    fixed = list(_BASE_UTTERANCES)
    if n >= 100:
        fixed += list(_COVERAGE_UTTERANCES)
    for text, intent in fixed[:n]:
        corpus.append(nlu.LabeledUtterance(text, intent))
    intents = list(TEMPLATES)
    while len(corpus) < n:
        intent = intents[len(corpus) % len(intents)]
        template = str(rng.choice(TEMPLATES[intent]))
        text, entities = _fill_template(template, rng)
        corpus.append(nlu.LabeledUtterance(text, intent, tuple(entities)))
    return corpus


def default_model(seed: int = 7, n: int = 200) -> nlu.NluModel:
    """The stock NLU model: trained on a generated corpus, deterministic."""
    return nlu.train(generate_corpus(n, seed))


# ---------------------------------------------------------------------------
# the six scripted tasks

_ACTION_SPACING_MS = 5000


def _utterance_event(t_ms: int, text: str, duration_ms: int, intent: str) -> ScenarioEvent:
    return ScenarioEvent(
        t_ms, "utterance", {"text": text, "duration_ms": duration_ms, "intended_intent": intent}
    )


def _skeleton_events(frames: Sequence[SkeletonFrame]) -> list[ScenarioEvent]:
    return [ScenarioEvent(f.t_ms, "skeleton", _frame_to_dict(f)) for f in frames]


@dataclass
class _TaskBuilder:
    config: PipelineConfig
    jitter: float
    seed: int
    events: list[ScenarioEvent] = field(default_factory=list)
    expected: list[dict] = field(default_factory=list)
    annotations: list[dict] = field(default_factory=list)
    cursor: int = 0
    trace_count: int = 0

    def _profile(self) -> TraceProfile:
        self.trace_count += 1
        return TraceProfile(jitter_sigma=self.jitter, seed=self.seed * 1000 + self.trace_count)

    def point_and_say(self, targets: Sequence[int], text: str, intent: str, duration_ms: int) -> None:
        frames, anns = pointing_trace(
            list(targets),
            self._profile(),
            self.config.screen,
            self.config.sensor,
            start_ms=self.cursor,
            speed_max=self.config.detection.speed_max,
        )
        self.events += _skeleton_events(frames)
        self.annotations += anns
        # speech begins a little into the first dwell
        self.events.append(_utterance_event(self.cursor + 900, text, duration_ms, intent))
        self.cursor = max(frames[-1].t_ms, self.cursor + 900 + duration_ms) + _ACTION_SPACING_MS

    def say(self, text: str, intent: str, duration_ms: int = 900) -> None:
        self.events.append(_utterance_event(self.cursor, text, duration_ms, intent))
        self.cursor += duration_ms + _ACTION_SPACING_MS

    def expect(self, kind: str, **fields) -> None:
        self.expected.append({"kind": kind, **fields})

    def build(self, scenario_id: str, description: str) -> Scenario:
        events = sorted(self.events, key=lambda e: e.t_ms)
        return Scenario(
            scenario_id, description, tuple(events), tuple(self.expected), tuple(self.annotations)
        )


def build_task_suite(
    config: PipelineConfig | None = None,
    jitter: float = 0.0,
    seed: int = 1,
) -> list[Scenario]:
    """The six scripted control-room tasks, rendered as skeleton-level scenarios.

    Random-target tasks draw their monitors from the seed, mirroring the
    testers' free choice.
    """
    config = config or PipelineConfig()
    rng = np.random.default_rng(seed)

    def pick_pair() -> tuple[int, int]:
        a, b = rng.choice(np.arange(1, 10), size=2, replace=False)
        return int(a), int(b)

    def zoom_block(b: _TaskBuilder, target: int) -> None:
        b.point_and_say([target], "zoom in on this one", "zoom_in", 1100)
        b.expect("zoom_in", monitors=[target])
        b.say("zoom out", "zoom_out")
        b.expect("zoom_out")

    scenarios = []

    b = _TaskBuilder(config, jitter, seed)
    zoom_block(b, 1)
    zoom_block(b, 9)
    scenarios.append(b.build("t1", "zoom the first and last monitors, returning to the matrix"))

    b = _TaskBuilder(config, jitter, seed + 1)
    r1, r2 = int(rng.integers(1, 10)), int(rng.integers(1, 10))
    zoom_block(b, r1)
    zoom_block(b, r2)
    scenarios.append(b.build("t2", "zoom two freely chosen monitors"))

    b = _TaskBuilder(config, jitter, seed + 2)
    for pair in ((1, 9), (3, 7)):
        b.point_and_say(list(pair), "put this one and this one side by side", "split_screen", 1800)
        b.expect("split_screen", monitors=list(pair))
        b.say("zoom out", "zoom_out")
        b.expect("zoom_out")
    scenarios.append(b.build("t3", "split the corner pairs side by side"))

    b = _TaskBuilder(config, jitter, seed + 3)
    for _ in range(2):
        pair = pick_pair()
        b.point_and_say(list(pair), "compare this one and that one", "split_screen", 1800)
        b.expect("split_screen", monitors=list(pair))
        b.say("zoom out", "zoom_out")
        b.expect("zoom_out")
    scenarios.append(b.build("t4", "split two freely chosen pairs"))

    b = _TaskBuilder(config, jitter, seed + 4)
    for pair in ((1, 9), (3, 9)):
        b.point_and_say(list(pair), "swap this monitor with this one", "swap", 1800)
        b.expect("swap", monitors=list(pair))
        b.say("zoom out", "zoom_out")
        b.expect("zoom_out")
    scenarios.append(b.build("t5", "swap the scripted monitor pairs"))

    b = _TaskBuilder(config, jitter, seed + 5)
    for _ in range(2):
        pair = pick_pair()
        b.point_and_say(list(pair), "swap this one with that one", "swap", 1800)
        b.expect("swap", monitors=list(pair))
    scenarios.append(b.build("t6", "swap two freely chosen pairs"))

    return scenarios
