from __future__ import annotations

import asyncio
import json

import pytest
from websockets.asyncio.client import connect

from controlroom.gateway import (
    Gateway,
    WireFormatError,
    estimate_speech_interval,
    parse_message,
    pointer_to_sample,
    serialize_message,
)
from controlroom.geometry import ScreenLayout

LAYOUT = ScreenLayout()


# ---------------------------------------------------------------------------
# wire schema (no sockets)


def test_parse_valid_speech_event():
    msg = parse_message(json.dumps({"kind": "speech_event", "text": "zoom out", "t_ms": 50}))
    assert msg["text"] == "zoom out"


def test_parse_rejects_garbage_and_bad_kinds():
    with pytest.raises(WireFormatError):
        parse_message("{not json")
    with pytest.raises(WireFormatError):
        parse_message(json.dumps(["list"]))
    with pytest.raises(WireFormatError):
        parse_message(json.dumps({"kind": "launch_missiles"}))
    with pytest.raises(WireFormatError):
        parse_message(json.dumps({"kind": "speech_event", "text": ""}))
    with pytest.raises(WireFormatError):
        parse_message(json.dumps({"kind": "pointer_event", "u": 1.4, "v": 0.5}))
    with pytest.raises(WireFormatError):
        parse_message(json.dumps({"kind": "speech_event", "text": "x", "protocol_version": "9"}))


def test_wire_round_trip():
    for kind, payload in [
        ("speech_event", {"text": "swap this monitor with this one", "t_ms": 1200}),
        ("pointer_event", {"u": 0.5, "v": 0.5, "pressed": True, "t_ms": 7}),
        ("scenario_control", {"action": "reset"}),
    ]:
        raw = serialize_message(kind, payload)
        parsed = parse_message(raw)
        assert serialize_message(parsed.pop("kind"), {k: v for k, v in parsed.items() if k != "protocol_version"}) == raw


def test_pointer_mapping_center_and_corner():
    center = pointer_to_sample(0.5, 0.5, 0, LAYOUT)
    assert center.hit == 5
    top_left = pointer_to_sample(0.05, 0.05, 0, LAYOUT)
    assert top_left.hit == 1
    bottom_right = pointer_to_sample(0.95, 0.95, 0, LAYOUT)
    assert bottom_right.hit == 9


def test_speech_interval_estimate_scales_with_length():
    start_short, end_short = estimate_speech_interval("hi", 10_000)
    start_long, end_long = estimate_speech_interval("swap this monitor with this one", 10_000)
    assert end_short == end_long == 10_000
    assert end_short - start_short >= 300
    assert start_long < start_short


# ---------------------------------------------------------------------------
# live service (headless protocol driver)


async def _recv_until(ws, kind, limit=80):
    """Read frames until one of the wanted kind arrives."""
    for _ in range(limit):
        msg = json.loads(await asyncio.wait_for(ws.recv(), timeout=5))
        if msg["kind"] == kind:
            return msg
    raise AssertionError(f"no {kind} frame within {limit} messages")


def _serve(gateway):
    return asyncio.create_task(gateway.serve(port=0))


async def _started(gateway):
    await asyncio.wait_for(gateway._started.wait(), timeout=5)
    return f"ws://127.0.0.1:{gateway.port}/ws"


def test_speech_round_trip_zoom(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                first = json.loads(await ws.recv())
                assert first["kind"] == "state_snapshot"
                assert first["state"]["view"]["mode"] == "matrix"

                await ws.send(serialize_message("speech_event", {"text": "zoom in on monitor three", "t_ms": 1000}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                issued = await _recv_until(ws, "command_issued")
                assert issued["command"]["kind"] == "zoom_in"
                assert issued["command"]["monitors"] == [3]
                snap = await _recv_until(ws, "state_snapshot")
                assert snap["state"]["view"] == {"mode": "zoomed", "monitor": 3}

                await ws.send(serialize_message("speech_event", {"text": "zoom out", "t_ms": 9000}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                issued = await _recv_until(ws, "command_issued")
                assert issued["command"]["kind"] == "zoom_out"
                snap = await _recv_until(ws, "state_snapshot")
                assert snap["state"]["view"] == {"mode": "matrix"}
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_malformed_frame_keeps_session_alive(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                await ws.recv()  # greeting snapshot
                await ws.send("{broken")
                err = await _recv_until(ws, "error")
                assert "JSON" in err["message"]
                # session still works
                await ws.send(serialize_message("speech_event", {"text": "zoom in on monitor two", "t_ms": 500}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                issued = await _recv_until(ws, "command_issued")
                assert issued["command"]["monitors"] == [2]
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_pointer_hold_emits_gesture_and_distribution(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                await ws.recv()
                # 1.2 s hold at the screen center, 25 samples at 50 ms
                for i in range(25):
                    await ws.send(
                        serialize_message(
                            "pointer_event",
                            {"u": 0.5, "v": 0.5, "pressed": True, "t_ms": i * 50},
                        )
                    )
                dist = await _recv_until(ws, "distribution_update")
                assert dist["probs"] == {"5": 1.0}
                await ws.send(serialize_message("speech_event", {"text": "zoom in on this one", "t_ms": 1900}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                issued = await _recv_until(ws, "command_issued")
                assert issued["command"] ["kind"] == "zoom_in"
                assert issued["command"]["monitors"] == [5]
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_pointer_short_press_no_gesture(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                await ws.recv()
                for i in range(6):  # 300 ms press, under the window
                    await ws.send(
                        serialize_message(
                            "pointer_event",
                            {"u": 0.05, "v": 0.05, "pressed": True, "t_ms": i * 50},
                        )
                    )
                await ws.send(serialize_message("pointer_event", {"pressed": False, "u": 0.05, "v": 0.05, "t_ms": 320}))
                await ws.send(serialize_message("speech_event", {"text": "zoom in on this one", "t_ms": 1000}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                clr = await _recv_until(ws, "clarification_needed")
                assert "zoom_in" in clr["reason"]
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_pointer_corner_maps_to_monitor_one(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                await ws.recv()
                for i in range(26):
                    await ws.send(
                        serialize_message(
                            "pointer_event",
                            {"u": 0.05, "v": 0.05, "pressed": True, "t_ms": i * 50},
                        )
                    )
                await ws.send(serialize_message("speech_event", {"text": "enlarge this one", "t_ms": 2000}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                issued = await _recv_until(ws, "command_issued")
                assert issued["command"]["monitors"] == [1]
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_shared_room_broadcasts_same_revisions(model, config):
    async def scenario():
        gateway = Gateway(config, model, room_mode="shared")
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as a, connect(url) as b:
                await a.recv()
                await b.recv()
                await a.send(serialize_message("speech_event", {"text": "zoom in on monitor seven", "t_ms": 700}))
                await a.send(serialize_message("scenario_control", {"action": "flush"}))
                snap_a = await _recv_until(a, "state_snapshot")
                snap_b = await _recv_until(b, "state_snapshot")
                assert snap_a["revision"] == snap_b["revision"]
                assert snap_a["state"] == snap_b["state"]
                assert snap_b["state"]["view"] == {"mode": "zoomed", "monitor": 7}
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_snapshot_revisions_strictly_increase(model, config):
    async def scenario():
        gateway = Gateway(config, model)
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as ws:
                first = json.loads(await ws.recv())
                revisions = [first["revision"]]
                for i, text in enumerate(["zoom in on monitor one", "zoom out", "zoom in on monitor two"]):
                    await ws.send(serialize_message("speech_event", {"text": text, "t_ms": 2000 * (i + 1)}))
                await ws.send(serialize_message("scenario_control", {"action": "flush"}))
                for _ in range(3):
                    snap = await _recv_until(ws, "state_snapshot")
                    revisions.append(snap["revision"])
                assert revisions == sorted(set(revisions))
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_static_assets_served(model, config, tmp_path):
    async def scenario():
        (tmp_path / "index.html").write_text("<title>control room</title>")
        (tmp_path / "app.js").write_text("export const ok = 1;")
        gateway = Gateway(config, model, static_dir=tmp_path)
        server = _serve(gateway)
        try:
            await _started(gateway)
            import urllib.error
            import urllib.request

            base = f"http://127.0.0.1:{gateway.port}"
            html = await asyncio.to_thread(lambda: urllib.request.urlopen(base + "/").read().decode())
            assert "control room" in html
            js = await asyncio.to_thread(lambda: urllib.request.urlopen(base + "/app.js").read().decode())
            assert "ok = 1" in js
            try:
                await asyncio.to_thread(lambda: urllib.request.urlopen(base + "/missing.js"))
                raise AssertionError("expected 404")
            except urllib.error.HTTPError as exc:
                assert exc.code == 404
        finally:
            server.cancel()

    asyncio.run(scenario())


def test_isolated_rooms_do_not_share_state(model, config):
    async def scenario():
        gateway = Gateway(config, model, room_mode="isolated")
        server = _serve(gateway)
        try:
            url = await _started(gateway)
            async with connect(url) as a, connect(url) as b:
                await a.recv()
                await b.recv()
                await a.send(serialize_message("speech_event", {"text": "zoom in on monitor four", "t_ms": 600}))
                await a.send(serialize_message("scenario_control", {"action": "flush"}))
                snap = await _recv_until(a, "state_snapshot")
                assert snap["state"]["view"]["mode"] == "zoomed"
                await b.send(serialize_message("scenario_control", {"action": "flush"}))
                with pytest.raises(asyncio.TimeoutError):
                    await asyncio.wait_for(_recv_until(b, "command_issued", limit=5), timeout=0.5)
        finally:
            server.cancel()

    asyncio.run(scenario())
