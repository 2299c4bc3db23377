"""Offline audio sources for stub mode.

A request is first looked up as a fixture WAV keyed by a hash of its
canonical JSON body; when no fixture matches, a deterministic synthetic
clip of the requested shape is produced instead, so contract tests never
need pre-generated files.
"""

from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile

SAMPLE_RATE = 16000
SECONDS_PER_WORD = 0.4


def request_key(endpoint: str, payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(
        f"{endpoint}:{canonical}".encode(), digest_size=8).hexdigest()


def fixture_path(fixture_dir: Path, endpoint: str, payload: dict) -> Path:
    return fixture_dir / f"{endpoint}_{request_key(endpoint, payload)}.wav"


def load_fixture(fixture_dir: Path, endpoint: str, payload: dict) -> bytes | None:
    path = fixture_path(fixture_dir, endpoint, payload)
    if path.is_file():
        return path.read_bytes()
    return None


def _rng(endpoint: str, payload: dict) -> np.random.Generator:
    seed = int.from_bytes(
        hashlib.blake2b(request_key(endpoint, payload).encode(),
                        digest_size=8).digest(), "big")
    return np.random.default_rng(seed)


def synth_speech(text: str, voice: str) -> np.ndarray:
    words = text.split()
    rng = _rng("tts", {"text": text, "voice": voice})
    per_word = int(SECONDS_PER_WORD * SAMPLE_RATE)
    t = np.arange(per_word) / SAMPLE_RATE
    envelope = np.sin(np.pi * np.arange(per_word) / per_word)
    chunks = []
    for _ in words:
        freq = rng.uniform(120.0, 350.0)
        chunks.append(0.3 * envelope * np.sin(2 * np.pi * freq * t))
    return np.concatenate(chunks)


def synth_clip(endpoint: str, desc: str, duration: float) -> np.ndarray:
    rng = _rng(endpoint, {"desc": desc, "duration": duration})
    n = int(round(duration * SAMPLE_RATE))
    if endpoint == "music":
        t = np.arange(n) / SAMPLE_RATE
        out = np.zeros(n)
        for _ in range(3):
            out += 0.1 * np.sin(2 * np.pi * rng.uniform(110.0, 880.0) * t)
        fade = min(n // 2, int(0.01 * SAMPLE_RATE))
        if fade:
            ramp = np.linspace(0.0, 1.0, fade)
            out[:fade] *= ramp
            out[-fade:] *= ramp[::-1]
        return out
    return 0.1 * rng.standard_normal(n)


def encode_wav(samples: np.ndarray) -> bytes:
    clipped = np.clip(samples, -1.0, 1.0)
    data = np.round(clipped * 32767).astype(np.int16)
    buf = io.BytesIO()
    wavfile.write(buf, SAMPLE_RATE, data)
    return buf.getvalue()
