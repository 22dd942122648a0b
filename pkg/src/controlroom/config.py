"""Pipeline configuration: one structured file covers sensor pose, screen
layout, detection thresholds, windowing, and fusion timing."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Union

from .fusion import EngineConfig
from .geometry import DetectionParams, ScreenLayout, SensorConfig


@dataclass(frozen=True)
class PipelineConfig:
    sensor: SensorConfig = field(default_factory=SensorConfig)
    screen: ScreenLayout = field(default_factory=ScreenLayout)
    detection: DetectionParams = field(default_factory=DetectionParams)
    fusion: EngineConfig = field(default_factory=EngineConfig)
    window_ms: int = 1000
    min_prob: float = 0.5

    def to_dict(self) -> dict:
        return {
            "tilt": self.sensor.tilt,
            "sensor_height": self.sensor.sensor_height,
            "user_distance": self.sensor.user_distance,
            "lateral_offset": self.sensor.lateral_offset,
            "screen": asdict(self.screen),
            "detection": asdict(self.detection),
            "window_ms": self.window_ms,
            "min_prob": self.min_prob,
            "fusion": asdict(self.fusion),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        return cls(
            sensor=SensorConfig(
                tilt=d.get("tilt", 0.0),
                sensor_height=d.get("sensor_height", 0.0),
                user_distance=d.get("user_distance", 0.0),
                lateral_offset=d.get("lateral_offset", 0.0),
            ),
            screen=ScreenLayout(**d.get("screen", {})),
            detection=DetectionParams(**d.get("detection", {})),
            fusion=EngineConfig(**d.get("fusion", {})),
            window_ms=d.get("window_ms", 1000),
            min_prob=d.get("min_prob", 0.5),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
