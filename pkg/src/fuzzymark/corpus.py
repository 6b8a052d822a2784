"""Deterministic synthetic benchmark corpus.

Four 256x256 images covering the block types the strength controller has to
handle: a flat field, a smooth gradient, a dark textured field (medical-like
dynamic range: large near-black area, bright detail) and a mixed scene with a
black background and a textured bright region.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .image import Image, save_pgm

SIZE = 256
CORPUS_NAMES = ("flat", "gradient", "texture", "mixed")


def _flat() -> Image:
    return Image(np.full((SIZE, SIZE), 128, dtype=np.uint8))


def _gradient() -> Image:
    # 8..247 keeps every pixel pair sum >= 2 even after lossy attacks
    col = np.rint(8 + np.arange(SIZE) * (247 - 8) / (SIZE - 1)).astype(np.uint8)
    return Image(np.tile(col, (SIZE, 1)))


def _texture() -> Image:
    # Medical-like dynamic range: dark overall but textured in every block, so
    # no 8x8 tile is flat or saturated. Bright blobs supply high-strength area.
    rng = np.random.default_rng(20240811)
    fine = ndimage.gaussian_filter(rng.standard_normal((SIZE, SIZE)), 0.7)
    fine /= fine.std()
    blobs = ndimage.gaussian_filter(rng.standard_normal((SIZE, SIZE)), 14.0)
    blobs = np.clip(blobs / blobs.std() - 0.4, 0.0, None)
    v = 38.0 + 16.0 * fine + 150.0 * blobs * (1.0 + 0.25 * fine)
    return Image(np.clip(np.rint(v), 22, 250).astype(np.uint8))


def _mixed() -> Image:
    rng = np.random.default_rng(318)
    y, x = np.mgrid[0:SIZE, 0:SIZE]
    cy, cx = SIZE / 2, SIZE / 2
    r = np.sqrt(((x - cx) / 88.0) ** 2 + ((y - cy) / 70.0) ** 2)
    body = np.clip(1.0 - r, 0.0, 1.0)
    detail = ndimage.gaussian_filter(rng.standard_normal((SIZE, SIZE)), 1.2)
    detail /= detail.std()
    v = 28.0 + 6.0 * detail + 196.0 * np.sqrt(body) + 28.0 * detail * (body > 0)
    v[r < 0.25] *= 0.55  # darker inner structure
    return Image(np.clip(np.rint(v), 22, 250).astype(np.uint8))


def make_corpus() -> dict[str, Image]:
    return {
        "flat": _flat(),
        "gradient": _gradient(),
        "texture": _texture(),
        "mixed": _mixed(),
    }


def write_corpus(directory) -> dict[str, Path]:
    """Write the corpus as PGM files (idempotent); returns name -> path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, img in make_corpus().items():
        p = directory / f"{name}.pgm"
        if not p.exists():
            save_pgm(img, p)
        paths[name] = p
    return paths
