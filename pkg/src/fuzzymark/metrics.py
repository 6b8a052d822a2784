"""Perceptual quality metrics: MSE, PSNR and their Weber-weighted variants.

wMSE measures per-pixel relative error, (2|a-b| / (a+b))^2, so differences in
bright regions weigh less than the same absolute difference in dark ones.
Pixels where a == b contribute 0; otherwise the denominator is floored at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import Image

PEAK = 255.0


@dataclass
class QualityScores:
    mse: float
    psnr: float  # dB, math.inf when mse == 0
    wmse: float
    wpsnr: float  # dB, math.inf when wmse == 0


def _check_dims(a: Image, b: Image):
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"dimension mismatch: {a.pixels.shape} vs {b.pixels.shape}")


def mse(a: Image, b: Image) -> float:
    _check_dims(a, b)
    d = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float((d * d).mean())


def psnr(a: Image, b: Image) -> float:
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / m)


def wmse(a: Image, b: Image) -> float:
    _check_dims(a, b)
    af = a.pixels.astype(np.float64)
    bf = b.pixels.astype(np.float64)
    diff = np.abs(af - bf)
    denom = np.maximum(af + bf, 1.0)
    term = np.where(diff == 0.0, 0.0, (2.0 * diff / denom) ** 2)
    return float(term.mean())


def wpsnr(a: Image, b: Image) -> float:
    m = wmse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / m)


def quality_scores(a: Image, b: Image) -> QualityScores:
    return QualityScores(mse=mse(a, b), psnr=psnr(a, b), wmse=wmse(a, b), wpsnr=wpsnr(a, b))
