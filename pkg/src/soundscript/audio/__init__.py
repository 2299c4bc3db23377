from .buffer import (
    SAMPLE_RATE,
    AudioBuffer,
    concat,
    mix_at,
    resample_to_engine_rate,
    seconds_to_samples,
    silence,
    trim_or_pad,
)
from .loudness import measure_lufs, normalize_lufs
from .wavio import read_wav, write_wav

__all__ = [
    "SAMPLE_RATE",
    "AudioBuffer",
    "concat",
    "mix_at",
    "resample_to_engine_rate",
    "seconds_to_samples",
    "silence",
    "trim_or_pad",
    "measure_lufs",
    "normalize_lufs",
    "read_wav",
    "write_wav",
]
