"""Multimodal fusion engine.

Maintains a probabilistic dialogue state over asynchronous speech and
pointing events, prunes stale gestures against the start of the current
utterance, binds deictic mentions to pointed monitors, and emits a
command once an interpretation is complete and confident enough.

The engine consumes a single serialized queue: events are buffered and
released in event-time order once the watermark (newest time seen minus
the reorder bound) passes them, so any arrival interleaving inside the
bound produces the same command log.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .geometry import GestureEvent
from .nlu import INTENTS, EntitySpan, NluResult

DEFAULT_MAX_GAP_MS = 4000
DEFAULT_GRACE_MS = 1500
DEFAULT_TAU = 0.5
DEFAULT_REORDER_BOUND_MS = 500

MONITOR_SLOT = "monitor"
DEVICE_SLOT = "device"
TIME_SLOT = "time"

# required slot kinds per intent; deictic mentions may only fill monitor slots
SLOT_REQUIREMENTS: Mapping[str, tuple[str, ...]] = {
    "zoom_in": (MONITOR_SLOT,),
    "zoom_out": (),
    "split_screen": (MONITOR_SLOT, MONITOR_SLOT),
    "swap": (MONITOR_SLOT, MONITOR_SLOT),
    "audio_to_device": (DEVICE_SLOT,),
    "audio_off": (),
    "rewind": (TIME_SLOT,),
    "forward": (TIME_SLOT,),
}

# intents whose focus monitor is optional context rather than a required slot
OPTIONAL_MONITOR_INTENTS = ("audio_to_device", "rewind", "forward")

DEVICES = ("headset", "speakers")


class CommandError(ValueError):
    pass


@dataclass(frozen=True)
class Command:
    """An executable control-room action."""

    kind: str
    monitors: tuple[int, ...] = ()
    device: Optional[str] = None
    seconds: Optional[float] = None
    issued_at: int = 0
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in SLOT_REQUIREMENTS:
            raise CommandError(f"unknown command kind {self.kind!r}")
        for m in self.monitors:
            if not 1 <= m <= 9:
                raise CommandError(f"monitor operand {m} outside 1..9")
        if self.kind in ("swap", "split_screen"):
            if len(self.monitors) != 2 or self.monitors[0] == self.monitors[1]:
                raise CommandError(f"{self.kind} needs two distinct monitors, got {self.monitors}")
        if self.kind == "zoom_in" and len(self.monitors) != 1:
            raise CommandError("zoom_in needs exactly one monitor")
        if self.kind == "audio_to_device" and self.device not in DEVICES:
            raise CommandError(f"audio_to_device needs a device in {DEVICES}")
        if self.kind in ("rewind", "forward") and not (self.seconds and self.seconds > 0):
            raise CommandError(f"{self.kind} needs seconds > 0")

    def signature(self) -> dict:
        """Operands only; timing and confidence excluded (used for matching)."""
        sig: dict = {"kind": self.kind}
        if self.monitors:
            sig["monitors"] = list(self.monitors)
        if self.device is not None:
            sig["device"] = self.device
        if self.seconds is not None:
            sig["seconds"] = self.seconds
        return sig

    def to_dict(self) -> dict:
        d = self.signature()
        d["issued_at"] = self.issued_at
        d["confidence"] = self.confidence
        return d


@dataclass(frozen=True)
class HistoryEntry:
    """One pointed object in the linked history, newest first."""

    entry_id: int
    event: GestureEvent
    consumed: bool = False


@dataclass(frozen=True)
class SlotBinding:
    slot: int
    kind: str
    value: Union[int, float, str]
    confidence: float
    source: str  # "entity" | "gesture"
    gesture_id: Optional[int] = None


@dataclass(frozen=True)
class Interpretation:
    command: Command
    bindings: tuple[SlotBinding, ...]
    consumed_ids: tuple[int, ...]


@dataclass(frozen=True)
class DialogueState:
    """Discrete dialogue state; every transition returns a fresh value."""

    current_nlu: Optional[NluResult] = None
    history: tuple[HistoryEntry, ...] = ()
    intent_belief: Mapping[str, float] = field(default_factory=dict)
    slot_bindings: tuple[SlotBinding, ...] = ()
    last_command: Optional[Command] = None
    revision: int = 0
    next_entry_id: int = 1
    grace_deadline: Optional[int] = None

    def retained(self) -> list[HistoryEntry]:
        """Unconsumed gestures in chronological (oldest-first) order."""
        return sorted(
            (e for e in self.history if not e.consumed),
            key=lambda e: (e.event.end, e.event.start, e.entry_id),
        )


def ingest_gesture(
    state: DialogueState,
    ev: GestureEvent,
    reorder_bound_ms: int = DEFAULT_REORDER_BOUND_MS,
) -> tuple[DialogueState, Optional[str]]:
    """Push a gesture into the pointed-object history.

    A same-monitor event overlapping an existing entry is the continuation
    of that dwell and extends it in place. Events ending more than the
    reorder bound before the newest entry are dropped with a warning.
    Returns (new_state, warning_or_None).
    """
    if state.history:
        newest_end = max(e.event.end for e in state.history)
        if ev.end < newest_end - reorder_bound_ms:
            return state, (
                f"late gesture dropped: monitor {ev.monitor} ended {newest_end - ev.end} ms "
                f"behind newest (bound {reorder_bound_ms} ms)"
            )

    for i, entry in enumerate(state.history):
        if entry.event.monitor == ev.monitor and ev.start <= entry.event.end and ev.end >= entry.event.start:
            merged = GestureEvent(
                ev.monitor,
                ev.confidence,
                min(entry.event.start, ev.start),
                max(entry.event.end, ev.end),
            )
            entries = list(state.history)
            entries[i] = replace(entry, event=merged)
            entries.sort(key=lambda e: (-e.event.end, -e.event.start, -e.entry_id))
            return replace(state, history=tuple(entries), revision=state.revision + 1), None

    entry = HistoryEntry(state.next_entry_id, ev)
    entries = list(state.history) + [entry]
    entries.sort(key=lambda e: (-e.event.end, -e.event.start, -e.entry_id))
    return (
        replace(
            state,
            history=tuple(entries),
            revision=state.revision + 1,
            next_entry_id=state.next_entry_id + 1,
        ),
        None,
    )


def prune_stale(
    history: Sequence[HistoryEntry],
    speech_start: int,
    max_gap_ms: int = DEFAULT_MAX_GAP_MS,
) -> tuple[HistoryEntry, ...]:
    """Drop gestures that concluded more than max_gap before speech began."""
    return tuple(e for e in history if e.event.end >= speech_start - max_gap_ms)


def _normalized_belief(nlu: NluResult) -> dict[str, float]:
    conf = {i: 0.0 for i in INTENTS}
    for intent, c in nlu.intents:
        conf[intent] = c
    total = sum(conf.values())
    if total <= 0:
        return {i: 1.0 / len(INTENTS) for i in INTENTS}
    return {i: c / total for i, c in conf.items()}


def ingest_nlu(
    state: DialogueState,
    nlu: NluResult,
    max_gap_ms: int = DEFAULT_MAX_GAP_MS,
    grace_ms: int = DEFAULT_GRACE_MS,
) -> DialogueState:
    """Install a new utterance; it replaces any pending one entirely."""
    return replace(
        state,
        current_nlu=nlu,
        intent_belief=_normalized_belief(nlu),
        history=prune_stale(state.history, nlu.speech_start, max_gap_ms),
        slot_bindings=(),
        revision=state.revision + 1,
        grace_deadline=nlu.speech_end + grace_ms,
    )


def _top_intent(belief: Mapping[str, float]) -> str:
    return min(INTENTS, key=lambda i: (-belief.get(i, 0.0), i))


def _mention_order(entities: Iterable[EntitySpan]) -> list[EntitySpan]:
    return sorted(entities, key=lambda e: e.start)


def interpret_state(state: DialogueState, tau: float = DEFAULT_TAU) -> Optional[Interpretation]:
    """Try to assemble a complete, confident command from the current state.

    Slot filling follows mention order in the utterance: explicit entity
    values first-class, deictic mentions bound to retained gestures
    oldest-first (a plural deictic takes two). Pure: gesture consumption
    happens when the interpretation is committed.
    """
    nlu = state.current_nlu
    if nlu is None:
        return None
    intent = _top_intent(state.intent_belief)
    required = SLOT_REQUIREMENTS[intent]

    gestures = state.retained()
    taken = 0
    bindings: list[SlotBinding] = []
    monitor_fill: list[SlotBinding] = []
    device_fill: Optional[SlotBinding] = None
    time_fill: Optional[SlotBinding] = None

    wants_monitors = required.count(MONITOR_SLOT) + (1 if intent in OPTIONAL_MONITOR_INTENTS else 0)

    for ent in _mention_order(nlu.entities):
        if ent.label == "monitor" and ent.value is not None and len(monitor_fill) < wants_monitors:
            monitor_fill.append(
                SlotBinding(len(monitor_fill), MONITOR_SLOT, int(ent.value), ent.confidence, "entity")
            )
        elif ent.label in ("deictic_singular", "deictic_plural"):
            need = 2 if ent.label == "deictic_plural" else 1
            for _ in range(need):
                if len(monitor_fill) >= wants_monitors or taken >= len(gestures):
                    break
                g = gestures[taken]
                taken += 1
                monitor_fill.append(
                    SlotBinding(
                        len(monitor_fill),
                        MONITOR_SLOT,
                        g.event.monitor,
                        g.event.confidence,
                        "gesture",
                        g.entry_id,
                    )
                )
        elif ent.label == "device" and device_fill is None:
            device_fill = SlotBinding(0, DEVICE_SLOT, str(ent.value), ent.confidence, "entity")
        elif ent.label == "time_offset" and time_fill is None:
            time_fill = SlotBinding(0, TIME_SLOT, float(ent.value), ent.confidence, "entity")

    monitors_needed = required.count(MONITOR_SLOT)
    if len(monitor_fill) < monitors_needed:
        return None
    if DEVICE_SLOT in required and device_fill is None:
        return None
    if TIME_SLOT in required and time_fill is None:
        return None

    monitors = tuple(int(b.value) for b in monitor_fill)
    if intent in ("swap", "split_screen") and monitors[0] == monitors[1]:
        return None  # a pair command needs two different targets

    bindings.extend(monitor_fill)
    if device_fill is not None and DEVICE_SLOT in required:
        bindings.append(device_fill)
    if time_fill is not None and TIME_SLOT in required:
        bindings.append(time_fill)

    intent_conf = state.intent_belief.get(intent, 0.0)
    if bindings:
        product = 1.0
        for b in bindings:
            product *= max(b.confidence, 0.0)
        combined = intent_conf * product ** (1.0 / len(bindings))
    else:
        combined = intent_conf
    if combined < tau:
        return None

    keep = monitors_needed
    if keep == 0 and monitor_fill and intent in OPTIONAL_MONITOR_INTENTS:
        keep = 1
    command = Command(
        kind=intent,
        monitors=monitors[:keep],
        device=device_fill.value if (device_fill and DEVICE_SLOT in required) else None,
        seconds=time_fill.value if (time_fill and TIME_SLOT in required) else None,
        confidence=combined,
    )
    consumed = tuple(b.gesture_id for b in bindings if b.gesture_id is not None)
    return Interpretation(command, tuple(bindings), consumed)


def integrate(state: DialogueState, tau: float = DEFAULT_TAU) -> Optional[Command]:
    """Public view of interpretation: the command alone, or None."""
    interp = interpret_state(state, tau)
    return interp.command if interp else None


def commit_interpretation(state: DialogueState, interp: Interpretation, issued_at: int) -> tuple[Command, DialogueState]:
    """Consume bound gestures and close out the utterance."""
    consumed = set(interp.consumed_ids)
    history = tuple(
        replace(e, consumed=True) if e.entry_id in consumed else e for e in state.history
    )
    command = replace(interp.command, issued_at=issued_at)
    new_state = replace(
        state,
        current_nlu=None,
        history=history,
        slot_bindings=interp.bindings,
        last_command=command,
        revision=state.revision + 1,
        grace_deadline=None,
    )
    return command, new_state


def fail_utterance(state: DialogueState) -> DialogueState:
    """Give up on the pending utterance (grace expired, slots unbound)."""
    return replace(
        state,
        current_nlu=None,
        slot_bindings=(),
        revision=state.revision + 1,
        grace_deadline=None,
    )


def state_monitor_tick(
    state: DialogueState, now_ms: int, tau: float = DEFAULT_TAU
) -> tuple[Optional[Command], Optional[str], DialogueState]:
    """One observation of the dialogue state.

    Emits a command when interpretation succeeds; after the grace window
    expires with slots still unbound, emits a clarification-needed signal
    instead. Returns (command, clarification_reason, new_state).
    """
    if state.current_nlu is None:
        return None, None, state
    interp = interpret_state(state, tau)
    if interp is not None:
        command, new_state = commit_interpretation(state, interp, now_ms)
        return command, None, new_state
    if state.grace_deadline is not None and now_ms >= state.grace_deadline:
        reason = f"could not complete {_top_intent(state.intent_belief)!r} interpretation"
        return None, reason, fail_utterance(state)
    return None, None, state


# ---------------------------------------------------------------------------
# serialized engine

_KIND_RANK = {"gesture": 0, "nlu": 1, "deadline": 2}


@dataclass(frozen=True)
class EngineConfig:
    max_gap_ms: int = DEFAULT_MAX_GAP_MS
    grace_ms: int = DEFAULT_GRACE_MS
    tau: float = DEFAULT_TAU
    reorder_bound_ms: int = DEFAULT_REORDER_BOUND_MS


class FusionEngine:
    """Single owner of one DialogueState fed from concurrent producers.

    submit_* enqueues; events release in event-time order once the
    watermark passes them, each release ticks the state monitor, and an
    append-only log records every ingested event and emitted command.
    Observers receive immutable state values.
    """

    def __init__(
        self,
        config: EngineConfig | None = None,
        on_command: Optional[Callable[[Command], None]] = None,
        on_clarification: Optional[Callable[[int, str], None]] = None,
        on_state: Optional[Callable[[DialogueState], None]] = None,
    ):
        self.config = config or EngineConfig()
        self.state = DialogueState()
        self.log: list[dict] = []
        self.on_command = on_command
        self.on_clarification = on_clarification
        self.on_state = on_state
        self._queue: list[tuple[int, int, tuple, int, str, object]] = []
        self._seq = itertools.count()
        self._now = -(1 << 62)

    @property
    def watermark(self) -> int:
        return self._now - self.config.reorder_bound_ms

    def submit_gesture(self, ev: GestureEvent) -> list[Command]:
        key = (ev.monitor, ev.start, ev.confidence)
        if not self._enqueue(ev.end, "gesture", key, ev):
            return []
        return self.advance_to(ev.end)

    def submit_nlu(self, nlu: NluResult) -> list[Command]:
        if not self._enqueue(nlu.speech_end, "nlu", (nlu.speech_start, nlu.text), nlu):
            return []
        return self.advance_to(nlu.speech_end)

    def _enqueue(self, ts: int, kind: str, key: tuple, payload: object) -> bool:
        if ts < self.watermark:
            self._record(
                "late_drop", ts, {"event_kind": kind, "detail": f"behind watermark {self.watermark}"}
            )
            return False
        heapq.heappush(self._queue, (ts, _KIND_RANK[kind], key, next(self._seq), kind, payload))
        return True

    def advance_to(self, t_ms: int) -> list[Command]:
        """Move the engine clock forward and process everything now safe."""
        if t_ms > self._now:
            self._now = t_ms
        return self._drain(self.watermark)

    def flush(self) -> list[Command]:
        """Release all buffered events and pending deadlines (end of stream)."""
        return self._drain(None)

    def _drain(self, up_to: Optional[int]) -> list[Command]:
        emitted: list[Command] = []
        while self._queue and (up_to is None or self._queue[0][0] <= up_to):
            ts, _, _, _, kind, payload = heapq.heappop(self._queue)
            if kind == "gesture":
                self._process_gesture(ts, payload, emitted)  # type: ignore[arg-type]
            elif kind == "nlu":
                self._process_nlu(ts, payload, emitted)  # type: ignore[arg-type]
            else:
                self._process_deadline(ts, emitted)
        if up_to is None and self.state.grace_deadline is not None:
            self._process_deadline(self.state.grace_deadline, emitted)
        return emitted

    def _process_gesture(self, ts: int, ev: GestureEvent, emitted: list[Command]) -> None:
        rev_before = self.state.revision
        new_state, warning = ingest_gesture(self.state, ev, self.config.reorder_bound_ms)
        if warning is not None:
            self._record("late_drop", ts, {"event_kind": "gesture", "detail": warning})
            return
        self.state = new_state
        self._record(
            "gesture",
            ts,
            {"monitor": ev.monitor, "confidence": ev.confidence, "start": ev.start, "end": ev.end},
        )
        self._tick(ts, emitted)
        self._notify_state(rev_before)

    def _process_nlu(self, ts: int, nlu: NluResult, emitted: list[Command]) -> None:
        rev_before = self.state.revision
        self.state = ingest_nlu(self.state, nlu, self.config.max_gap_ms, self.config.grace_ms)
        self._record(
            "nlu",
            ts,
            {
                "text": nlu.text,
                "speech_start": nlu.speech_start,
                "speech_end": nlu.speech_end,
                "top_intent": nlu.top_intent,
            },
        )
        deadline = self.state.grace_deadline
        if deadline is not None:
            heapq.heappush(self._queue, (deadline, _KIND_RANK["deadline"], (), next(self._seq), "deadline", None))
        self._tick(ts, emitted)
        self._notify_state(rev_before)

    def _process_deadline(self, ts: int, emitted: list[Command]) -> None:
        # lazily invalidated: only fires if this deadline is still the live one
        if self.state.grace_deadline != ts:
            return
        rev_before = self.state.revision
        self._tick(ts, emitted)
        self._notify_state(rev_before)

    def _tick(self, now_ms: int, emitted: list[Command]) -> None:
        command, clarification, new_state = state_monitor_tick(self.state, now_ms, self.config.tau)
        self.state = new_state
        if command is not None:
            bound = [
                {"gesture_id": b.gesture_id, "monitor": b.value}
                for b in new_state.slot_bindings
                if b.source == "gesture"
            ]
            self._record("command", now_ms, {"command": command.to_dict(), "bound_gestures": bound})
            emitted.append(command)
            if self.on_command is not None:
                self.on_command(command)
        elif clarification is not None:
            self._record("clarification", now_ms, {"reason": clarification})
            if self.on_clarification is not None:
                self.on_clarification(now_ms, clarification)

    def _notify_state(self, rev_before: int) -> None:
        if self.on_state is not None and self.state.revision != rev_before:
            self.on_state(self.state)

    def _record(self, kind: str, ts: int, payload: dict) -> None:
        self.log.append({"t_ms": ts, "kind": kind, **payload})
