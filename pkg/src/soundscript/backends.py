"""Generation backends.

Two implementations of the same interface: a deterministic synthetic
backend used for testing and offline work, and an HTTP backend that calls
external generation services (text-to-speech, text-to-music,
text-to-audio) over a uniform JSON-in / WAV-out contract.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass
from urllib.parse import urljoin

import numpy as np
import requests

from .audio.buffer import SAMPLE_RATE
from .audio.wavio import decode_wav_bytes
from .errors import BadWav, BackendError, EmptyText, HttpError, MalformedWav, UnsupportedEncoding

log = logging.getLogger(__name__)

SPEECH_SECONDS_PER_WORD = 0.4


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "synthetic"  # "synthetic" | "http"
    tts_url: str | None = None
    music_url: str | None = None
    sfx_url: str | None = None
    timeout: float = 60.0
    retries: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.kind == "http":
            missing = [name for name, url in
                       (("tts_url", self.tts_url), ("music_url", self.music_url),
                        ("sfx_url", self.sfx_url)) if not url]
            if missing:
                raise ValueError(f"http backend needs {', '.join(missing)}")


class GeneratorBackend:
    """Interface every backend implements.

    gen_* methods return (samples, native_rate); the executor resamples to
    the engine rate, so backends may produce any supported rate.
    """

    def gen_speech(self, text: str, preset_id: str) -> tuple[np.ndarray, int]:
        raise NotImplementedError

    def gen_music(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        raise NotImplementedError

    def gen_sfx(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        raise NotImplementedError

    def health(self) -> dict:
        raise NotImplementedError


def _rng(seed: int, *parts: str) -> np.random.Generator:
    digest = hashlib.blake2b(
        ("\x1f".join((str(seed),) + parts)).encode(), digest_size=8
    ).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def word_count(text: str) -> int:
    return len(text.split())


class SyntheticBackend(GeneratorBackend):
    """Deterministic signal generator; a pure function of (request, seed).

    Speech lasts 0.4 s per whitespace-separated word, so every plan
    duration is computable by hand in tests.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def gen_speech(self, text: str, preset_id: str) -> tuple[np.ndarray, int]:
        words = text.split()
        if not words:
            raise EmptyText("speech text is empty")
        per_word = int(SPEECH_SECONDS_PER_WORD * SAMPLE_RATE)
        out = np.zeros(per_word * len(words))
        t = np.arange(per_word) / SAMPLE_RATE
        envelope = np.sin(np.pi * np.arange(per_word) / per_word)
        for i, word in enumerate(words):
            freq = 100.0 + 300.0 * _rng(self.seed, "speech", preset_id, word).random()
            out[i * per_word : (i + 1) * per_word] = (
                0.3 * envelope * np.sin(2 * np.pi * freq * t)
            )
        return out, SAMPLE_RATE

    def gen_music(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        n = int(round(duration * SAMPLE_RATE))
        rng = _rng(self.seed, "music", desc)
        freqs = rng.uniform(110.0, 880.0, size=3)
        t = np.arange(n) / SAMPLE_RATE
        out = sum(0.1 * np.sin(2 * np.pi * f * t) for f in freqs)
        fade = min(int(0.01 * SAMPLE_RATE), n // 2)
        if fade:
            ramp = np.linspace(0.0, 1.0, fade)
            out[:fade] *= ramp
            out[-fade:] *= ramp[::-1]
        return out, SAMPLE_RATE

    def gen_sfx(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        n = int(round(duration * SAMPLE_RATE))
        rng = _rng(self.seed, "sfx", desc)
        return 0.1 * rng.standard_normal(n), SAMPLE_RATE

    def health(self) -> dict:
        return {"status": "ok", "kind": "synthetic", "seed": self.seed}


class HttpBackend(GeneratorBackend):
    """Client for external generation services.

    Contract: POST tts_url {"text", "voice"}; POST music_url / sfx_url
    {"desc", "duration"}; every endpoint answers 200 with WAV bytes.
    GET <service>/health reports readiness.
    """

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        if config.kind != "http":
            raise ValueError("HttpBackend needs a config with kind='http'")
        self.config = config
        self.session = session or requests.Session()
        self.retry_counts: dict[str, int] = {}

    def _post(self, url: str, payload: dict) -> tuple[np.ndarray, int]:
        last_error = None
        for attempt in range(self.config.retries + 1):
            if attempt:
                self.retry_counts[url] = self.retry_counts.get(url, 0) + 1
                time.sleep(min(0.1 * 2 ** (attempt - 1), 2.0))
            try:
                response = self.session.post(url, json=payload, timeout=self.config.timeout)
            except requests.Timeout as exc:
                last_error = BackendError(f"timeout calling {url}: {exc}")
                continue
            except requests.RequestException as exc:
                last_error = BackendError(f"cannot reach {url}: {exc}")
                continue
            if response.status_code != 200:
                last_error = HttpError(
                    f"{url} returned {response.status_code}", status=response.status_code
                )
                continue
            try:
                return decode_wav_bytes(response.content)
            except (MalformedWav, UnsupportedEncoding) as exc:
                raise BadWav(f"{url} returned undecodable audio: {exc}") from exc
        raise last_error

    def gen_speech(self, text: str, preset_id: str) -> tuple[np.ndarray, int]:
        if not text.strip():
            raise EmptyText("speech text is empty")
        return self._post(self.config.tts_url, {"text": text, "voice": preset_id})

    def gen_music(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        return self._post(self.config.music_url, {"desc": desc, "duration": duration})

    def gen_sfx(self, desc: str, duration: float) -> tuple[np.ndarray, int]:
        return self._post(self.config.sfx_url, {"desc": desc, "duration": duration})

    def health(self) -> dict:
        statuses = {}
        for url in dict.fromkeys((self.config.tts_url, self.config.music_url,
                                  self.config.sfx_url)):
            health_url = urljoin(url if url.endswith("/") else url + "/", "../health")
            try:
                response = self.session.get(health_url, timeout=self.config.timeout)
                statuses[url] = (response.status_code == 200)
            except requests.RequestException:
                statuses[url] = False
        ok = all(statuses.values())
        return {"status": "ok" if ok else "unreachable", "endpoints": statuses}


def make_backend(config: BackendConfig) -> GeneratorBackend:
    if config.kind == "synthetic":
        return SyntheticBackend(seed=config.seed)
    if config.kind == "http":
        return HttpBackend(config)
    raise ValueError(f"unknown backend kind {config.kind!r}")
