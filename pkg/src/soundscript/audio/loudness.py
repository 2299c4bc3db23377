"""Integrated loudness (LUFS) measurement and normalization.

Follows ITU-R BS.1770-4: two-stage K-weighting (high shelf then high
pass), 400 ms blocks with 75% overlap, an absolute gate at -70 LUFS and a
relative gate 10 LU below the first-pass mean.  The filter stages are
redesigned for the 16 kHz engine rate from the analog prototype
parameters rather than using the published 48 kHz coefficients directly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import sosfilt

from ..errors import SilentInput, TooShort
from .buffer import SAMPLE_RATE, AudioBuffer, apply_gain

BLOCK_SECONDS = 0.4
OVERLAP = 0.75
ABSOLUTE_GATE_LUFS = -70.0
RELATIVE_GATE_LU = 10.0

# Analog prototype parameters behind the BS.1770 48 kHz reference
# coefficients (shelving stage, then the RLB high-pass stage).
_SHELF_F0 = 1681.9744509555319
_SHELF_GAIN_DB = 3.999843853973347
_SHELF_Q = 0.7071752369554196
_HP_F0 = 38.13547087602444
_HP_Q = 0.5003270373238773


def _shelf_sos(rate: int) -> list[float]:
    K = math.tan(math.pi * _SHELF_F0 / rate)
    Vh = 10.0 ** (_SHELF_GAIN_DB / 20.0)
    Vb = Vh ** 0.4996667741545416
    a0 = 1.0 + K / _SHELF_Q + K * K
    b0 = (Vh + Vb * K / _SHELF_Q + K * K) / a0
    b1 = 2.0 * (K * K - Vh) / a0
    b2 = (Vh - Vb * K / _SHELF_Q + K * K) / a0
    a1 = 2.0 * (K * K - 1.0) / a0
    a2 = (1.0 - K / _SHELF_Q + K * K) / a0
    return [b0, b1, b2, 1.0, a1, a2]


def _highpass_sos(rate: int) -> list[float]:
    K = math.tan(math.pi * _HP_F0 / rate)
    a0 = 1.0 + K / _HP_Q + K * K
    a1 = 2.0 * (K * K - 1.0) / a0
    a2 = (1.0 - K / _HP_Q + K * K) / a0
    return [1.0, -2.0, 1.0, 1.0, a1, a2]


def k_weighting_sos(rate: int = SAMPLE_RATE) -> np.ndarray:
    return np.array([_shelf_sos(rate), _highpass_sos(rate)])


def _block_powers(samples: np.ndarray, rate: int) -> np.ndarray:
    """Mean-square power of each K-weighted 400 ms block (75% overlap)."""
    weighted = sosfilt(k_weighting_sos(rate), samples)
    block = int(rate * BLOCK_SECONDS)
    hop = int(block * (1.0 - OVERLAP))
    n_blocks = (len(weighted) - block) // hop + 1
    powers = np.empty(n_blocks)
    for j in range(n_blocks):
        seg = weighted[j * hop : j * hop + block]
        powers[j] = np.mean(seg * seg)
    return powers


def _lufs_from_power(power: float) -> float:
    if power <= 0.0:
        return float("-inf")
    return -0.691 + 10.0 * math.log10(power)


def measure_lufs(buf: AudioBuffer) -> float:
    """Gated integrated loudness in LUFS; -inf when everything is gated."""
    if buf.duration < BLOCK_SECONDS:
        raise TooShort(
            f"need at least {BLOCK_SECONDS} s for one gating block, got {buf.duration:.3f} s"
        )
    powers = _block_powers(buf.samples, buf.sample_rate)
    block_lufs = np.array([_lufs_from_power(p) for p in powers])

    above_abs = powers[block_lufs > ABSOLUTE_GATE_LUFS]
    if above_abs.size == 0:
        return float("-inf")
    relative_gate = _lufs_from_power(float(np.mean(above_abs))) - RELATIVE_GATE_LU

    keep = powers[(block_lufs > ABSOLUTE_GATE_LUFS) & (block_lufs > relative_gate)]
    if keep.size == 0:
        return float("-inf")
    return _lufs_from_power(float(np.mean(keep)))


def normalize_lufs(buf: AudioBuffer, target: float) -> tuple[AudioBuffer, float, int]:
    """Apply the linear gain that moves measured loudness to ``target``.

    Returns (normalized buffer, measured input loudness, clipped-sample
    count).  Peaks pushed past full scale are clamped.
    """
    measured = measure_lufs(buf)
    if measured == float("-inf"):
        raise SilentInput("cannot normalize silence (-inf LUFS)")
    gain = 10.0 ** ((target - measured) / 20.0)
    out, clipped = apply_gain(buf, gain)
    return out, measured, clipped
