"""RIFF/WAV read and write.

Reads 16/32-bit PCM and 32/64-bit float WAV, downmixing multichannel input
to mono by channel mean.  Writes 16 kHz 16-bit PCM mono.
"""

from __future__ import annotations

import io

import numpy as np
from scipy.io import wavfile

from ..errors import MalformedWav, UnsupportedEncoding
from .buffer import AudioBuffer, resample_to_engine_rate

_SCALE = {
    np.dtype(np.int16): 2 ** 15,
    np.dtype(np.int32): 2 ** 31,
}


def decode_wav_bytes(data: bytes) -> tuple[np.ndarray, int]:
    """Decode WAV bytes to float64 mono samples plus the native rate."""
    try:
        rate, raw = wavfile.read(io.BytesIO(data))
    except Exception as exc:
        raise MalformedWav(f"cannot decode WAV data: {exc}") from exc
    if raw.dtype in (np.float32, np.float64):
        samples = raw.astype(np.float64)
    elif raw.dtype in _SCALE:
        samples = raw.astype(np.float64) / _SCALE[raw.dtype]
    else:
        raise UnsupportedEncoding(f"unsupported WAV sample format {raw.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return np.clip(samples, -1.0, 1.0), int(rate)


def read_wav(path) -> AudioBuffer:
    """Read a WAV file and bring it to the engine rate."""
    with open(path, "rb") as fh:
        data = fh.read()
    samples, rate = decode_wav_bytes(data)
    return resample_to_engine_rate(samples, rate)


def encode_wav_bytes(buf: AudioBuffer) -> bytes:
    pcm = np.round(np.clip(buf.samples, -1.0, 1.0) * 32767.0).astype(np.int16)
    bio = io.BytesIO()
    wavfile.write(bio, buf.sample_rate, pcm)
    return bio.getvalue()


def write_wav(buf: AudioBuffer, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav_bytes(buf))
