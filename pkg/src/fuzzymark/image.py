"""Grayscale image container, PGM (P5) file I/O and 8x8 block partitioning."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

BLOCK_SIZE = 8


class ImageError(Exception):
    """Base class for image container / file errors."""


class MalformedHeader(ImageError):
    pass


class UnsupportedDepth(ImageError):
    pass


class TruncatedPayload(ImageError):
    pass


class EmptyImage(ImageError):
    pass


class ImageTooSmall(ImageError):
    pass


class Image:
    """A 2-D grayscale raster with 8-bit samples, stored row-major.

    Pixel addressing is (x, y) = (column, row).
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ImageError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ImageError("samples must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        self.pixels = arr.copy()

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def copy(self) -> "Image":
        return Image(self.pixels)

    def __eq__(self, other):
        return isinstance(other, Image) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"Image({self.width}x{self.height})"


@dataclass(frozen=True)
class BlockGrid:
    """Partition of the top-left floor-multiple-of-8 region into 8x8 blocks."""

    blocks_x: int
    blocks_y: int
    block_size: int = BLOCK_SIZE

    @property
    def total(self) -> int:
        return self.blocks_x * self.blocks_y

    def origin(self, idx: int) -> tuple[int, int]:
        """Pixel offset (x, y) of block `idx` (row-major block order)."""
        if not 0 <= idx < self.total:
            raise IndexError(f"block index {idx} out of range [0, {self.total})")
        by, bx = divmod(idx, self.blocks_x)
        return bx * self.block_size, by * self.block_size


def load_pgm(path) -> Image:
    """Read a binary PGM (P5, maxval 255) file. Comments in the header are tolerated."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise MalformedHeader("not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data):
            c = data[pos : pos + 1]
            if c.isspace():
                pos += 1
            elif c == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise MalformedHeader(f"bad header token {tok!r}")
        fields.append(int(tok))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedDepth(f"maxval {maxval} not supported (only 255)")
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"bad dimensions {width}x{height}")
    n = width * height
    raw = data[pos : pos + n]
    if len(raw) < n:
        raise TruncatedPayload(f"expected {n} sample bytes, got {len(raw)}")
    return Image(np.frombuffer(raw, dtype=np.uint8).reshape(height, width))


def save_pgm(img: Image, path) -> None:
    """Write a binary PGM (P5, maxval 255). Bit-exact with `load_pgm`."""
    if img.width == 0 or img.height == 0:
        raise EmptyImage("refusing to write a zero-sized image")
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def partition_blocks(img: Image) -> BlockGrid:
    """Block grid over the image; trailing rows/columns not filling a block are excluded."""
    bx = img.width // BLOCK_SIZE
    by = img.height // BLOCK_SIZE
    if bx == 0 or by == 0:
        raise ImageTooSmall(f"{img.width}x{img.height} is smaller than one 8x8 block")
    return BlockGrid(blocks_x=bx, blocks_y=by)


def get_block(img: Image, grid: BlockGrid, idx: int) -> np.ndarray:
    """Copy of the 8x8 tile at block `idx`."""
    x, y = grid.origin(idx)
    b = grid.block_size
    return img.pixels[y : y + b, x : x + b].copy()


def set_block(img: Image, grid: BlockGrid, idx: int, tile) -> None:
    """Store an 8x8 tile at block `idx`, rounding and clamping values to [0, 255]."""
    x, y = grid.origin(idx)
    b = grid.block_size
    tile = np.asarray(tile, dtype=np.float64)
    if tile.shape != (b, b):
        raise ImageError(f"tile shape {tile.shape} != ({b}, {b})")
    img.pixels[y : y + b, x : x + b] = np.clip(np.rint(tile), 0, 255).astype(np.uint8)
