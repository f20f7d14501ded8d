"""PCM WAV reading/writing and sample-rate conversion helpers."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file as float64 samples in [-1, 1].

    Stereo input is averaged to mono. Lossy formats are out of scope;
    convert externally.
    """
    sr, data = wavfile.read(str(path))
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        x = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    return x, int(sr)


def write_wav(path: str | Path, samples: np.ndarray, sr: int) -> None:
    """Write mono float samples as 16-bit PCM."""
    clipped = np.clip(samples, -1.0, 1.0)
    wavfile.write(str(path), sr, (clipped * 32767.0).astype(np.int16))


def resample(x: np.ndarray, sr_from: int, sr_to: int) -> np.ndarray:
    if sr_from == sr_to:
        return x
    ratio = Fraction(sr_to, sr_from).limit_denominator(1000)
    return resample_poly(x, ratio.numerator, ratio.denominator)
