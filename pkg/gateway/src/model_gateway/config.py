"""Gateway configuration."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class GatewayConfig:
    """Runtime settings for the gateway service.

    ``stub`` mode serves fixture WAVs (or deterministic synthetic audio when
    no fixture matches) and needs a fixture directory.  ``live`` mode wraps
    real generation models and needs a model id per endpoint.
    """

    mode: str = "stub"
    fixture_dir: Path | None = None
    tts_model: str | None = None
    music_model: str | None = None
    sfx_model: str | None = None
    device: str = "cpu"
    allow_debug: bool = field(default=True)

    def __post_init__(self):
        if self.mode not in ("stub", "live"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "stub" and self.fixture_dir is None:
            raise ValueError("stub mode requires a fixture directory")
        if self.mode == "live" and not (
                self.tts_model and self.music_model and self.sfx_model):
            raise ValueError("live mode requires a model id per endpoint")

    @classmethod
    def from_file(cls, path) -> "GatewayConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "GatewayConfig":
        """Build a config from a plain dict with environment overrides.

        ``GATEWAY_MODE``, ``GATEWAY_FIXTURE_DIR``, and ``GATEWAY_DEVICE``
        take precedence over file values.
        """
        mode = os.environ.get("GATEWAY_MODE", raw.get("mode", "stub"))
        fixture_dir = os.environ.get("GATEWAY_FIXTURE_DIR", raw.get("fixture_dir"))
        return cls(
            mode=mode,
            fixture_dir=Path(fixture_dir) if fixture_dir else None,
            tts_model=raw.get("tts_model"),
            music_model=raw.get("music_model"),
            sfx_model=raw.get("sfx_model"),
            device=os.environ.get("GATEWAY_DEVICE", raw.get("device", "cpu")),
            allow_debug=raw.get("allow_debug", True),
        )
