"""Network boundary: a WebSocket protocol over the live pipeline.

Clients exchange JSON text frames. Inbound kinds are speech_event,
pointer_event, and scenario_control; the server pushes state_snapshot
(on every state revision), command_issued, distribution_update,
clarification_needed, and error. Snapshots carry a strictly increasing
revision so clients can discard stale ones.

Message timestamps: interactive clients send none and get server-clock
stamps at receipt; replay drivers may supply t_ms explicitly and the
pipeline clock follows the largest timestamp seen.
"""

from __future__ import annotations

import asyncio
import json
import http
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from websockets.asyncio.server import ServerConnection, serve as ws_serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from . import environment
from .config import PipelineConfig
from .fusion import Command, FusionEngine
from .geometry import PointingSample, PointingStream, ScreenLayout
from .nlu import NluModel, interpret

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "1"
WS_PATH = "/ws"

INBOUND_KINDS = ("speech_event", "pointer_event", "scenario_control")
OUTBOUND_KINDS = (
    "state_snapshot",
    "command_issued",
    "distribution_update",
    "clarification_needed",
    "error",
)

# virtual shoulder used to synthesize rays from normalized pointer coordinates
POINTER_SHOULDER = (0.0, 1.4, 3.0)

# server-side speech interval estimate for typed utterances
SPEECH_MS_PER_CHAR = 60
SPEECH_MIN_MS = 300

CLIENT_QUEUE_LIMIT = 512


class WireFormatError(ValueError):
    """Inbound frame violates the message schema."""


def serialize_message(kind: str, payload: dict) -> str:
    return json.dumps(
        {"kind": kind, "protocol_version": PROTOCOL_VERSION, **payload}, sort_keys=True
    )


def parse_message(raw: Union[str, bytes]) -> dict:
    """Parse and validate one inbound frame; raises WireFormatError."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise WireFormatError(f"frame is not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise WireFormatError("frame must be a JSON object")
    version = msg.get("protocol_version", PROTOCOL_VERSION)
    if version != PROTOCOL_VERSION:
        raise WireFormatError(f"unsupported protocol_version {version!r}")
    kind = msg.get("kind")
    if kind not in INBOUND_KINDS:
        raise WireFormatError(f"unknown or missing inbound kind {kind!r}")
    if kind == "speech_event":
        text = msg.get("text")
        if not isinstance(text, str) or not text.strip():
            raise WireFormatError("speech_event needs a non-empty 'text'")
    elif kind == "pointer_event":
        if "ray" in msg:
            ray = msg["ray"]
            if (
                not isinstance(ray, dict)
                or len(ray.get("origin", ())) != 3
                or len(ray.get("direction", ())) != 3
            ):
                raise WireFormatError("pointer_event ray needs 3-vector 'origin' and 'direction'")
        else:
            u, v = msg.get("u"), msg.get("v")
            if not isinstance(u, (int, float)) or not isinstance(v, (int, float)):
                raise WireFormatError("pointer_event needs numeric 'u' and 'v'")
            if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
                raise WireFormatError(f"pointer coordinates ({u}, {v}) outside [0,1]^2")
        if not isinstance(msg.get("pressed", True), bool):
            raise WireFormatError("pointer_event 'pressed' must be a boolean")
    elif kind == "scenario_control":
        if msg.get("action") not in ("reset", "flush", "advance"):
            raise WireFormatError("scenario_control action must be reset, flush, or advance")
    if "t_ms" in msg and not isinstance(msg["t_ms"], (int, float)):
        raise WireFormatError("'t_ms' must be a number")
    return msg


def pointer_to_sample(u: float, v: float, t_ms: int, layout: ScreenLayout) -> PointingSample:
    """Synthesize a pointing sample from normalized screen coordinates.

    (u, v) = (0, 0) is the top-left screen corner. The sample's ray runs
    from the canonical virtual shoulder through the mapped plane point.
    """
    x = u * layout.width - layout.width / 2
    y = (1.0 - v) * layout.height
    ox, oy, oz = POINTER_SHOULDER
    direction = (x - ox, y - oy, 0.0 - oz)
    norm = (direction[0] ** 2 + direction[1] ** 2 + direction[2] ** 2) ** 0.5
    direction = (direction[0] / norm, direction[1] / norm, direction[2] / norm)
    return PointingSample(t_ms, POINTER_SHOULDER, direction, layout.monitor_at(x, y))


def estimate_speech_interval(text: str, receipt_ms: int) -> tuple[int, int]:
    """Typed input has no real utterance interval; scale one from length."""
    duration = max(SPEECH_MIN_MS, SPEECH_MS_PER_CHAR * len(text))
    return receipt_ms - duration, receipt_ms


@dataclass(eq=False)
class _Client:
    connection: ServerConnection
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT))
    sender: Optional[asyncio.Task] = None


class Room:
    """One pipeline instance shared by any number of client sessions."""

    def __init__(self, config: PipelineConfig, model: NluModel):
        self.config = config
        self.model = model
        self.revision = 0
        self.room_state = environment.initial_state()
        self.engine = FusionEngine(
            config.fusion,
            on_command=self._handle_command,
            on_clarification=self._handle_clarification,
            on_state=lambda _state: self._broadcast_snapshot(),
        )
        self.stream = PointingStream(
            config.sensor,
            config.screen,
            config.detection,
            window_ms=config.window_ms,
            min_prob=config.min_prob,
        )
        self.clients: set[_Client] = set()
        self.rejections: list[dict] = []

    # -- client management ---------------------------------------------------

    def attach(self, client: _Client) -> None:
        self.clients.add(client)
        self._send(client, "state_snapshot", self._snapshot_payload())

    def detach(self, client: _Client) -> None:
        self.clients.discard(client)

    # -- inbound events -------------------------------------------------------

    def handle_speech(self, text: str, receipt_ms: int) -> None:
        speech_start, speech_end = estimate_speech_interval(text, receipt_ms)
        result = interpret(self.model, text, speech_start, speech_end)
        self.engine.submit_nlu(result)

    def handle_pointer(self, msg: dict, receipt_ms: int) -> None:
        if not msg.get("pressed", True):
            self.stream.break_run()
            return
        if "ray" in msg:
            origin = tuple(float(c) for c in msg["ray"]["origin"])
            direction = tuple(float(c) for c in msg["ray"]["direction"])
            norm = sum(c * c for c in direction) ** 0.5
            if norm == 0:
                raise WireFormatError("pointer ray direction must be non-zero")
            direction = tuple(c / norm for c in direction)
            hit = None
            if direction[2] != 0:
                t = -origin[2] / direction[2]
                if t > 0:
                    hit = self.config.screen.monitor_at(
                        origin[0] + t * direction[0], origin[1] + t * direction[1]
                    )
            sample = PointingSample(receipt_ms, origin, direction, hit)
        else:
            sample = pointer_to_sample(float(msg["u"]), float(msg["v"]), receipt_ms, self.config.screen)
        for gesture in self.stream.push_sample(sample):
            self.engine.submit_gesture(gesture)
        dist = self.stream.last_distribution
        if dist is not None:
            self._broadcast(
                "distribution_update",
                {
                    "window_start": dist.window_start,
                    "window_end": dist.window_end,
                    "probs": {str(m): p for m, p in dist.probs.items()},
                },
            )

    def handle_control(self, msg: dict, receipt_ms: int) -> None:
        action = msg["action"]
        if action == "reset":
            self.room_state = environment.initial_state()
            self.stream.break_run()
            self._broadcast_snapshot()
        elif action == "flush":
            self.engine.flush()
            self._broadcast_snapshot()
        elif action == "advance":
            self.engine.advance_to(int(msg.get("t_ms", receipt_ms)))

    def pump(self, now_ms: int) -> None:
        """Periodic clock advance so grace deadlines fire without traffic."""
        self.engine.advance_to(now_ms)

    # -- engine callbacks ------------------------------------------------------

    def _handle_command(self, command: Command) -> None:
        result = environment.apply(self.room_state, command)
        if isinstance(result, environment.Rejection):
            self.rejections.append({"reason": result.reason, **command.signature()})
            payload = {"command": command.to_dict(), "rejected": result.reason}
        else:
            self.room_state = result
            payload = {"command": command.to_dict()}
        self._broadcast("command_issued", payload)

    def _handle_clarification(self, t_ms: int, reason: str) -> None:
        self._broadcast("clarification_needed", {"t_ms": t_ms, "reason": reason})

    # -- broadcasting -----------------------------------------------------------

    def _snapshot_payload(self) -> dict:
        return {"revision": self.revision, "state": self.room_state.to_dict()}

    def _broadcast_snapshot(self) -> None:
        self.revision += 1
        self._broadcast("state_snapshot", self._snapshot_payload())

    def _broadcast(self, kind: str, payload: dict) -> None:
        for client in list(self.clients):
            self._send(client, kind, payload)

    def _send(self, client: _Client, kind: str, payload: dict) -> None:
        try:
            client.queue.put_nowait(serialize_message(kind, payload))
        except asyncio.QueueFull:
            # slow consumer: drop the session rather than stall the pipeline
            log.warning("dropping slow client")
            self.detach(client)
            client.queue = asyncio.Queue()  # unblock sender task teardown
            asyncio.ensure_future(client.connection.close(1013, "client too slow"))


class Gateway:
    """Accepts sessions, owns rooms, and serves the UI's static assets."""

    def __init__(
        self,
        config: PipelineConfig | None = None,
        model: NluModel | None = None,
        room_mode: str = "shared",
        static_dir: Optional[Union[str, Path]] = None,
        pump_interval: float = 0.1,
    ):
        if room_mode not in ("shared", "isolated"):
            raise ValueError("room_mode must be 'shared' or 'isolated'")
        if model is None:
            from .harness import default_model

            model = default_model()
        self.config = config or PipelineConfig()
        self.model = model
        self.room_mode = room_mode
        self.static_dir = Path(static_dir) if static_dir else None
        self.pump_interval = pump_interval
        self.shared_room = Room(self.config, self.model)
        self._rooms: list[Room] = [self.shared_room]
        self._started = asyncio.Event()
        self._server = None
        self._t0: Optional[float] = None

    def now_ms(self) -> int:
        loop = asyncio.get_running_loop()
        if self._t0 is None:
            self._t0 = loop.time()
        return int((loop.time() - self._t0) * 1000)

    async def _handler(self, connection: ServerConnection) -> None:
        room = self.shared_room if self.room_mode == "shared" else Room(self.config, self.model)
        if room not in self._rooms:
            self._rooms.append(room)
        client = _Client(connection)
        client.sender = asyncio.create_task(self._sender(client))
        room.attach(client)
        try:
            async for raw in connection:
                try:
                    msg = parse_message(raw)
                    receipt = int(msg.get("t_ms", self.now_ms()))
                    if msg["kind"] == "speech_event":
                        room.handle_speech(msg["text"], receipt)
                    elif msg["kind"] == "pointer_event":
                        room.handle_pointer(msg, receipt)
                    else:
                        room.handle_control(msg, receipt)
                except WireFormatError as exc:
                    room._send(client, "error", {"message": str(exc)})
                except Exception as exc:  # fault isolation: session survives
                    log.exception("error handling frame")
                    room._send(client, "error", {"message": f"internal error: {exc}"})
        except ConnectionClosed:
            pass
        finally:
            room.detach(client)
            if client.sender is not None:
                client.sender.cancel()
            if self.room_mode == "isolated" and not room.clients and room in self._rooms:
                self._rooms.remove(room)

    async def _sender(self, client: _Client) -> None:
        try:
            while True:
                frame = await client.queue.get()
                await client.connection.send(frame)
        except (asyncio.CancelledError, ConnectionClosed):
            pass

    def _process_request(self, connection: ServerConnection, request):
        if request.path.split("?")[0] == WS_PATH:
            return None
        return self._static_response(connection, request.path)

    def _static_response(self, connection: ServerConnection, path: str):
        if self.static_dir is None:
            return connection.respond(http.HTTPStatus.NOT_FOUND, "no static assets configured\n")
        rel = path.split("?")[0].lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return connection.respond(http.HTTPStatus.NOT_FOUND, "not found\n")
        content_type = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json",
            ".png": "image/png",
            ".svg": "image/svg+xml",
        }.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        headers = Headers(
            [
                ("Content-Type", content_type),
                ("Content-Length", str(len(body))),
                ("Connection", "close"),
            ]
        )
        return Response(http.HTTPStatus.OK, "OK", headers, body)

    async def _pump_loop(self) -> None:
        while True:
            await asyncio.sleep(self.pump_interval)
            now = self.now_ms()
            for room in self._rooms:
                room.pump(now)

    async def serve(self, host: str = "127.0.0.1", port: int = 8765):
        """Run until cancelled; yields the underlying server once bound."""
        pump = asyncio.create_task(self._pump_loop())
        try:
            async with ws_serve(
                self._handler, host, port, process_request=self._process_request
            ) as server:
                self._server = server
                self._started.set()
                await asyncio.get_running_loop().create_future()
        finally:
            pump.cancel()

    @property
    def port(self) -> Optional[int]:
        if self._server is None:
            return None
        for sock in self._server.sockets:
            return sock.getsockname()[1]
        return None


def run(
    config: PipelineConfig | None = None,
    model: NluModel | None = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    room_mode: str = "shared",
    static_dir: Optional[Union[str, Path]] = None,
) -> None:
    gateway = Gateway(config, model, room_mode, static_dir)
    asyncio.run(gateway.serve(host, port))
