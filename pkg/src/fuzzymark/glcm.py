"""Gray-level co-occurrence matrices and texture features for 8x8 blocks.

Per block the GLCM is computed at distance 1 in the four directions
(0, 45, 90, 135 degrees), each symmetrized, and the normalized matrices
averaged. From the averaged matrix five statistics are derived: angular
second moment, contrast, correlation, variance and entropy (natural log),
plus the mean luminance of the raw tile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LEVELS = 8

# Distance-1 displacement vectors (dx, dy) for the four directions.
DIRECTIONS = ((1, 0), (1, 1), (0, 1), (-1, 1))


class GlcmError(Exception):
    pass


class EmptyGlcm(GlcmError):
    """Displacement leaves no valid pixel pair inside the tile."""


class InvalidFeature(GlcmError):
    pass


@dataclass
class Glcm:
    levels: int
    counts: np.ndarray  # GxG pair counts
    total_pairs: int
    probs: np.ndarray  # GxG normalized entries


@dataclass
class GlcmFeatures:
    asm: float
    contrast: float
    correlation: float
    variance: float
    entropy: float
    luminance: float


def quantize_tile(tile, levels: int) -> np.ndarray:
    return (np.asarray(tile, dtype=np.int64) * levels) // 256


def compute_glcm(tile, d: tuple[int, int], levels: int = DEFAULT_LEVELS) -> Glcm:
    """Pair counts for displacement d=(dx, dy) with (x, y)=(column, row) addressing."""
    dx, dy = d
    if (dx, dy) == (0, 0):
        raise GlcmError("displacement must be nonzero")
    if not 2 <= levels <= 256:
        raise GlcmError(f"levels {levels} out of range [2, 256]")
    q = quantize_tile(tile, levels)
    h, w = q.shape
    y0, y1 = max(0, -dy), h - max(0, dy)
    x0, x1 = max(0, -dx), w - max(0, dx)
    if y1 <= y0 or x1 <= x0:
        raise EmptyGlcm(f"displacement {d} leaves no pairs in a {w}x{h} tile")
    a = q[y0:y1, x0:x1]
    b = q[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
    counts = np.bincount((a * levels + b).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels)
    total = int(counts.sum())
    return Glcm(levels=levels, counts=counts, total_pairs=total,
                probs=counts / float(total))


def _symmetrize(g: Glcm) -> Glcm:
    counts = g.counts + g.counts.T
    total = int(counts.sum())
    return Glcm(levels=g.levels, counts=counts, total_pairs=total,
                probs=counts / float(total))


def glcm_symmetric_avg(tile, levels: int = DEFAULT_LEVELS) -> Glcm:
    """Average of the four distance-1 symmetric GLCM probability matrices."""
    sym = [_symmetrize(compute_glcm(tile, d, levels)) for d in DIRECTIONS]
    counts = sum(g.counts for g in sym)
    probs = sum(g.probs for g in sym) / len(sym)
    return Glcm(levels=levels, counts=counts,
                total_pairs=int(counts.sum()), probs=probs)


def features(g: Glcm, tile) -> GlcmFeatures:
    """The five texture statistics of a GLCM plus mean luminance of the tile."""
    p = g.probs
    lv = np.arange(g.levels, dtype=np.float64)
    i = lv[:, None]
    j = lv[None, :]

    asm = float((p * p).sum())
    contrast = float(((i - j) ** 2 * p).sum())

    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mx = float((lv * px).sum())
    my = float((lv * py).sum())
    sx = float(np.sqrt(((lv - mx) ** 2 * px).sum()))
    sy = float(np.sqrt(((lv - my) ** 2 * py).sum()))
    if sx * sy > 0:
        correlation = (float((i * j * p).sum()) - mx * my) / (sx * sy)
    else:
        correlation = 0.0

    nz = p[p > 0]
    entropy = float(-(nz * np.log(nz)).sum()) + 0.0  # normalize -0.0
    variance = float(((i - mx) ** 2 * p).sum())
    luminance = float(np.asarray(tile, dtype=np.float64).mean())
    return GlcmFeatures(asm=asm, contrast=contrast, correlation=correlation,
                        variance=variance, entropy=entropy, luminance=luminance)


def block_features(tile, levels: int = DEFAULT_LEVELS) -> GlcmFeatures:
    """Convenience: averaged symmetric GLCM -> feature vector for one tile."""
    return features(glcm_symmetric_avg(tile, levels), tile)
