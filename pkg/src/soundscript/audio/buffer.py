"""Mono PCM buffer algebra at the fixed engine sample rate (16 kHz)."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.signal import resample_poly

from ..errors import EmptyInput, UnsupportedRate

SAMPLE_RATE = 16000

MIN_SRC_RATE = 8000
MAX_SRC_RATE = 96000


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray  # float64 mono, values in [-1, 1]
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer is mono; got a multi-dimensional array")
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"engine sample rate is fixed at {SAMPLE_RATE} Hz")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite sample values")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0


def seconds_to_samples(seconds: float) -> int:
    return int(round(seconds * SAMPLE_RATE))


def silence(seconds: float) -> AudioBuffer:
    return AudioBuffer(np.zeros(seconds_to_samples(seconds)))


def concat(buffers: list[AudioBuffer]) -> AudioBuffer:
    """Join buffers back to back, no crossfade."""
    if not buffers:
        raise EmptyInput("concat needs at least one buffer")
    return AudioBuffer(np.concatenate([b.samples for b in buffers]))


def mix_at(base: AudioBuffer, overlay: AudioBuffer, offset: float) -> tuple[AudioBuffer, int]:
    """Add overlay onto base starting at ``offset`` seconds.

    Returns the mixed buffer and the number of samples clamped to [-1, 1].
    The output is long enough to hold both signals.
    """
    if offset < 0:
        raise ValueError("mix offset must be >= 0")
    start = seconds_to_samples(offset)
    return mix_at_samples(base, overlay, start)


def mix_at_samples(base: AudioBuffer, overlay: AudioBuffer, start: int) -> tuple[AudioBuffer, int]:
    out_len = max(len(base), start + len(overlay))
    out = np.zeros(out_len)
    out[: len(base)] = base.samples
    out[start : start + len(overlay)] += overlay.samples
    clipped = int(np.count_nonzero(np.abs(out) > 1.0))
    if clipped:
        np.clip(out, -1.0, 1.0, out=out)
    return AudioBuffer(out), clipped


def trim_or_pad(buf: AudioBuffer, target_seconds: float) -> AudioBuffer:
    return trim_or_pad_samples(buf, seconds_to_samples(target_seconds))


def trim_or_pad_samples(buf: AudioBuffer, target: int) -> AudioBuffer:
    """Force an exact length: trim from the end, or zero-pad at the end."""
    if target < 0:
        raise ValueError("target length must be >= 0")
    n = len(buf)
    if n == target:
        return buf
    if n > target:
        return AudioBuffer(buf.samples[:target])
    return AudioBuffer(np.pad(buf.samples, (0, target - n)))


def apply_gain(buf: AudioBuffer, gain: float) -> tuple[AudioBuffer, int]:
    """Scale samples linearly; out-of-range results are clamped and counted."""
    out = buf.samples * gain
    clipped = int(np.count_nonzero(np.abs(out) > 1.0))
    if clipped:
        out = np.clip(out, -1.0, 1.0)
    return AudioBuffer(out), clipped


def resample_to_engine_rate(samples, src_rate: int) -> AudioBuffer:
    """Polyphase resample from any supported rate to the engine rate."""
    if not (MIN_SRC_RATE <= src_rate <= MAX_SRC_RATE):
        raise UnsupportedRate(f"source rate {src_rate} outside [{MIN_SRC_RATE}, {MAX_SRC_RATE}]")
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if src_rate == SAMPLE_RATE:
        return AudioBuffer(samples)
    g = gcd(SAMPLE_RATE, src_rate)
    out = resample_poly(samples, SAMPLE_RATE // g, src_rate // g)
    return AudioBuffer(np.clip(out, -1.0, 1.0))
