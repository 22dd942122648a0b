from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from controlroom.environment import (
    REJECT_ALREADY_MATRIX,
    REJECT_NO_FOCUS_MONITOR,
    REJECT_SWAP_OUTSIDE_MATRIX,
    AudioOff,
    AudioRouted,
    MatrixView,
    Rejection,
    RoomState,
    SplitView,
    ZoomedView,
    apply,
    initial_state,
)
from controlroom.fusion import Command


def must_apply(state, cmd):
    result = apply(state, cmd)
    assert isinstance(result, RoomState), f"unexpected rejection: {result}"
    return result


def test_initial_state():
    state = initial_state()
    assert state.view == MatrixView()
    assert state.audio == AudioOff()
    assert state.playheads == (0.0,) * 9
    assert state.assignment == tuple(range(1, 10))


def test_zoom_in_and_out():
    state = must_apply(initial_state(), Command("zoom_in", monitors=(5,)))
    assert state.view == ZoomedView(5)
    state = must_apply(state, Command("zoom_out"))
    assert state.view == MatrixView()


def test_zoom_out_in_matrix_rejected():
    result = apply(initial_state(), Command("zoom_out"))
    assert isinstance(result, Rejection) and result.reason == REJECT_ALREADY_MATRIX


def test_double_swap_is_identity():
    state = initial_state()
    swapped = must_apply(state, Command("swap", monitors=(1, 9)))
    assert swapped.assignment != state.assignment
    back = must_apply(swapped, Command("swap", monitors=(1, 9)))
    assert back.assignment == state.assignment


def test_swap_outside_matrix_rejected():
    zoomed = must_apply(initial_state(), Command("zoom_in", monitors=(2,)))
    result = apply(zoomed, Command("swap", monitors=(1, 9)))
    assert isinstance(result, Rejection) and result.reason == REJECT_SWAP_OUTSIDE_MATRIX


def test_split_screen_sets_pair():
    state = must_apply(initial_state(), Command("split_screen", monitors=(3, 7)))
    assert state.view == SplitView(3, 7)


def test_audio_routing_focus():
    # zoomed target is the focus monitor
    state = must_apply(initial_state(), Command("zoom_in", monitors=(4,)))
    state = must_apply(state, Command("audio_to_device", device="headset"))
    assert state.audio == AudioRouted(4, "headset")
    # explicit monitor operand works from the matrix
    state = must_apply(initial_state(), Command("audio_to_device", monitors=(2,), device="speakers"))
    assert state.audio == AudioRouted(2, "speakers")
    state = must_apply(state, Command("audio_off"))
    assert state.audio == AudioOff()


def test_audio_without_focus_rejected():
    result = apply(initial_state(), Command("audio_to_device", device="headset"))
    assert isinstance(result, Rejection) and result.reason == REJECT_NO_FOCUS_MONITOR


def test_playhead_clamps_at_zero():
    state = must_apply(initial_state(), Command("zoom_in", monitors=(6,)))
    state = must_apply(state, Command("forward", seconds=30.0))
    assert state.playhead(6) == pytest.approx(30.0)
    state = must_apply(state, Command("rewind", seconds=60.0))
    assert state.playhead(6) == pytest.approx(0.0)


def test_rewind_without_focus_rejected():
    result = apply(initial_state(), Command("rewind", seconds=10.0))
    assert isinstance(result, Rejection) and result.reason == REJECT_NO_FOCUS_MONITOR


def test_snapshot_reflects_swap_and_is_pure():
    state = must_apply(initial_state(), Command("swap", monitors=(1, 9)))
    snap = state.snapshot()
    assert snap.to_dict()["assignment"]["1"] == 9
    assert snap.to_dict()["assignment"]["9"] == 1
    assert state.snapshot() == state.snapshot()


def test_snapshot_round_trip():
    state = must_apply(initial_state(), Command("zoom_in", monitors=(3,)))
    state = must_apply(state, Command("forward", seconds=12.5))
    restored = RoomState.from_dict(state.to_dict())
    assert restored == state


def test_swap_involution_and_symmetry_all_pairs():
    state = initial_state()
    for a, b in itertools.permutations(range(1, 10), 2):
        ab = must_apply(state, Command("swap", monitors=(a, b)))
        ba = must_apply(state, Command("swap", monitors=(b, a)))
        assert ab.assignment == ba.assignment
        assert must_apply(ab, Command("swap", monitors=(a, b))).assignment == state.assignment


def test_zoom_round_trip_all_monitors():
    state = initial_state()
    for m in range(1, 10):
        zoomed = must_apply(state, Command("zoom_in", monitors=(m,)))
        assert must_apply(zoomed, Command("zoom_out")).view == MatrixView()


def _random_command(rng: random.Random) -> Command:
    kind = rng.choice(
        ["zoom_in", "zoom_out", "split_screen", "swap", "audio_to_device", "audio_off", "rewind", "forward"]
    )
    if kind == "zoom_in":
        return Command(kind, monitors=(rng.randint(1, 9),))
    if kind in ("split_screen", "swap"):
        a, b = rng.sample(range(1, 10), 2)
        return Command(kind, monitors=(a, b))
    if kind == "audio_to_device":
        monitors = (rng.randint(1, 9),) if rng.random() < 0.5 else ()
        return Command(kind, monitors=monitors, device=rng.choice(["headset", "speakers"]))
    if kind in ("rewind", "forward"):
        monitors = (rng.randint(1, 9),) if rng.random() < 0.5 else ()
        return Command(kind, monitors=monitors, seconds=rng.choice([5.0, 30.0, 90.0]))
    return Command(kind)


def test_randomized_sequences_preserve_invariants():
    rng = random.Random(99)
    for _ in range(200):
        state = initial_state()
        for _ in range(40):
            result = apply(state, _random_command(rng))
            assert isinstance(result, (RoomState, Rejection))  # apply is total
            if isinstance(result, Rejection):
                continue
            state = result
            assert sorted(state.assignment) == list(range(1, 10))
            assert all(p >= 0.0 for p in state.playheads)


@given(st.integers(min_value=1, max_value=9), st.integers(min_value=1, max_value=9))
@settings(max_examples=100, deadline=None)
def test_swap_preserves_permutation(a, b):
    if a == b:
        return
    state = must_apply(initial_state(), Command("swap", monitors=(a, b)))
    assert sorted(state.assignment) == list(range(1, 10))
