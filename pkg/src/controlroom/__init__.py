"""Multimodal command pipeline for a 3x3 video-wall control room.

Speech and pointing events are fused into executable grid commands; a
replay harness reproduces the evaluation metrics and a WebSocket gateway
exposes the live pipeline to interactive clients.
"""

from .config import PipelineConfig
from .environment import RoomState, initial_state
from .fusion import Command, DialogueState, FusionEngine
from .geometry import (
    DetectionParams,
    GestureEvent,
    PointingDistribution,
    PointingSample,
    PointingStream,
    ScreenLayout,
    SensorConfig,
    SkeletonFrame,
)
from .nlu import NluModel, NluResult, train

__version__ = "0.1.0"

__all__ = [
    "Command",
    "DetectionParams",
    "DialogueState",
    "FusionEngine",
    "GestureEvent",
    "NluModel",
    "NluResult",
    "PipelineConfig",
    "PointingDistribution",
    "PointingSample",
    "PointingStream",
    "RoomState",
    "ScreenLayout",
    "SensorConfig",
    "SkeletonFrame",
    "initial_state",
    "train",
    "__version__",
]
