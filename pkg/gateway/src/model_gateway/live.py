"""Live-mode model wrappers.

This is the documented seam for real generation models: a TTS model on
``/tts``, a text-to-music model on ``/music``, and a text-to-audio model on
``/sfx``.  Loading and inference are deliberately unimplemented here — the
service answers 503 until ``load()`` succeeds — so the contract can be
exercised offline in stub mode while keeping the integration surface
explicit.
"""

from __future__ import annotations

import numpy as np

from .config import GatewayConfig


class LiveModels:
    def __init__(self, config: GatewayConfig):
        self.config = config
        self.ready = False

    def load(self) -> None:
        """Load the three models onto ``config.device`` and set ``ready``."""
        raise NotImplementedError(
            f"wire up {self.config.tts_model}, {self.config.music_model}, "
            f"{self.config.sfx_model} here")

    def tts(self, text: str, voice: str) -> np.ndarray:
        raise NotImplementedError

    def music(self, desc: str, duration: float) -> np.ndarray:
        raise NotImplementedError

    def sfx(self, desc: str, duration: float) -> np.ndarray:
        raise NotImplementedError

    def restore_speech(self, samples: np.ndarray) -> np.ndarray:
        """Hook for a speech-restoration pass over raw TTS output.

        Not implemented; live deployments that want cleanup (denoise,
        de-clip, bandwidth extension) plug it in here.
        """
        raise NotImplementedError
