"""Control-room state machine.

Applies fused commands to the monitor wall: view mode (matrix, zoomed,
split), audio routing, and per-monitor video playheads. Monitor ids are
grid cells 1..9; the camera assignment is a permutation over cells and
the only thing a swap moves.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Union

from .fusion import Command

GRID_CELLS = 9

REJECT_ALREADY_MATRIX = "already-matrix"
REJECT_SWAP_OUTSIDE_MATRIX = "swap-outside-matrix"
REJECT_NO_FOCUS_MONITOR = "no-focus-monitor"


@dataclass(frozen=True)
class MatrixView:
    mode: str = "matrix"


@dataclass(frozen=True)
class ZoomedView:
    monitor: int
    mode: str = "zoomed"


@dataclass(frozen=True)
class SplitView:
    left: int
    right: int
    mode: str = "split"


View = Union[MatrixView, ZoomedView, SplitView]


@dataclass(frozen=True)
class AudioOff:
    mode: str = "off"


@dataclass(frozen=True)
class AudioRouted:
    monitor: int
    device: str
    mode: str = "routed"


Audio = Union[AudioOff, AudioRouted]


@dataclass(frozen=True)
class Rejection:
    """A command the room refused, with the reason code."""

    reason: str
    command: Command


@dataclass(frozen=True)
class RoomState:
    view: View
    audio: Audio
    playheads: tuple[float, ...]  # seconds per cell, index = monitor - 1
    assignment: tuple[int, ...]  # camera id per cell, index = monitor - 1

    def playhead(self, monitor: int) -> float:
        return self.playheads[monitor - 1]

    def camera(self, monitor: int) -> int:
        return self.assignment[monitor - 1]

    def snapshot(self) -> "RoomState":
        """Immutable state view; the state itself is frozen, so this is it."""
        return self

    def to_dict(self) -> dict:
        if isinstance(self.view, ZoomedView):
            view = {"mode": "zoomed", "monitor": self.view.monitor}
        elif isinstance(self.view, SplitView):
            view = {"mode": "split", "monitors": [self.view.left, self.view.right]}
        else:
            view = {"mode": "matrix"}
        if isinstance(self.audio, AudioRouted):
            audio = {"mode": "routed", "monitor": self.audio.monitor, "device": self.audio.device}
        else:
            audio = {"mode": "off"}
        return {
            "view": view,
            "audio": audio,
            "playheads": {str(i + 1): p for i, p in enumerate(self.playheads)},
            "assignment": {str(i + 1): c for i, c in enumerate(self.assignment)},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RoomState":
        v = d["view"]
        if v["mode"] == "zoomed":
            view: View = ZoomedView(v["monitor"])
        elif v["mode"] == "split":
            view = SplitView(*v["monitors"])
        else:
            view = MatrixView()
        a = d["audio"]
        audio: Audio = AudioRouted(a["monitor"], a["device"]) if a["mode"] == "routed" else AudioOff()
        playheads = tuple(d["playheads"][str(i + 1)] for i in range(GRID_CELLS))
        assignment = tuple(d["assignment"][str(i + 1)] for i in range(GRID_CELLS))
        return cls(view, audio, playheads, assignment)


def initial_state() -> RoomState:
    """Matrix view, audio off, zeroed playheads, identity camera assignment."""
    return RoomState(
        view=MatrixView(),
        audio=AudioOff(),
        playheads=(0.0,) * GRID_CELLS,
        assignment=tuple(range(1, GRID_CELLS + 1)),
    )


def _focus_monitor(state: RoomState, cmd: Command) -> Optional[int]:
    # zoomed target wins; otherwise the command's explicit monitor operand
    if isinstance(state.view, ZoomedView):
        return state.view.monitor
    if cmd.monitors:
        return cmd.monitors[0]
    return None


def apply(state: RoomState, cmd: Command) -> Union[RoomState, Rejection]:
    """Total transition function: new state or a reasoned rejection."""
    kind = cmd.kind

    if kind == "zoom_in":
        return replace(state, view=ZoomedView(cmd.monitors[0]))

    if kind == "zoom_out":
        if isinstance(state.view, MatrixView):
            return Rejection(REJECT_ALREADY_MATRIX, cmd)
        return replace(state, view=MatrixView())

    if kind == "split_screen":
        return replace(state, view=SplitView(cmd.monitors[0], cmd.monitors[1]))

    if kind == "swap":
        if not isinstance(state.view, MatrixView):
            return Rejection(REJECT_SWAP_OUTSIDE_MATRIX, cmd)
        a, b = cmd.monitors
        cells = list(state.assignment)
        cells[a - 1], cells[b - 1] = cells[b - 1], cells[a - 1]
        return replace(state, assignment=tuple(cells))

    if kind == "audio_to_device":
        focus = _focus_monitor(state, cmd)
        if focus is None:
            return Rejection(REJECT_NO_FOCUS_MONITOR, cmd)
        return replace(state, audio=AudioRouted(focus, cmd.device))

    if kind == "audio_off":
        return replace(state, audio=AudioOff())

    if kind in ("rewind", "forward"):
        focus = _focus_monitor(state, cmd)
        if focus is None:
            return Rejection(REJECT_NO_FOCUS_MONITOR, cmd)
        delta = cmd.seconds if kind == "forward" else -cmd.seconds
        heads = list(state.playheads)
        heads[focus - 1] = max(0.0, heads[focus - 1] + delta)
        return replace(state, playheads=tuple(heads))

    raise ValueError(f"unknown command kind: {kind}")
