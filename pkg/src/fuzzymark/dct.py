"""Orthonormal 8x8 type-II DCT and JPEG-style quantization tables."""

from __future__ import annotations

import json

import numpy as np

N = 8


def _cosine_basis() -> np.ndarray:
    x = np.arange(N)
    u = np.arange(N)[:, None]
    c = np.cos((2 * x + 1) * u * np.pi / (2 * N))
    c *= np.sqrt(2.0 / N)
    c[0] = np.sqrt(1.0 / N)
    return c


_BASIS = _cosine_basis()
_BASIS.setflags(write=False)

# Standard JPEG luminance quantization table (Annex K).
JPEG_LUMINANCE_QTABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)
JPEG_LUMINANCE_QTABLE.setflags(write=False)


def forward_dct(tile) -> np.ndarray:
    """2-D orthonormal DCT of an 8x8 sample tile, level-shifted by -128."""
    t = np.asarray(tile, dtype=np.float64) - 128.0
    return _BASIS @ t @ _BASIS.T


def inverse_dct_float(coeffs) -> np.ndarray:
    """Exact inverse transform plus +128 level shift, without rounding/clamping."""
    c = np.asarray(coeffs, dtype=np.float64)
    return _BASIS.T @ c @ _BASIS + 128.0


def inverse_dct(coeffs) -> np.ndarray:
    """Inverse transform to 8-bit samples (rounded and clamped to [0, 255])."""
    return np.clip(np.rint(inverse_dct_float(coeffs)), 0, 255).astype(np.uint8)


def quantize(coeffs, qtable) -> np.ndarray:
    return np.rint(np.asarray(coeffs, dtype=np.float64) / qtable).astype(np.int64)


def dequantize(qints, qtable) -> np.ndarray:
    return np.asarray(qints, dtype=np.float64) * qtable


def scale_quant_table(base, quality: int) -> np.ndarray:
    """Scale a quantization table for a JPEG quality factor (IJG convention)."""
    if not 1 <= quality <= 100:
        raise ValueError(f"quality {quality} out of range [1, 100]")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    q = (np.asarray(base, dtype=np.int64) * scale + 50) // 100
    return np.clip(q, 1, 255)


def load_quant_table(path) -> np.ndarray:
    """Load an 8x8 quantization table from a JSON array of arrays."""
    with open(path) as f:
        q = np.asarray(json.load(f), dtype=np.int64)
    if q.shape != (N, N) or (q < 1).any():
        raise ValueError("quant table must be 8x8 with entries >= 1")
    return q
