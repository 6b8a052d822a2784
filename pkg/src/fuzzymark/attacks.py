"""Attack battery: JPEG re-quantization, noise generators and linear filters.

Every attack is deterministic given its parameters and RNG seed, and always
returns a valid 8-bit image. JPEG is simulated by quantize/dequantize of the
block DCT (the lossy core of the codec; entropy coding is lossless and
therefore attack-irrelevant).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import dct
from .image import BLOCK_SIZE, Image

KINDS = (
    "jpeg",
    "gaussian_noise",
    "speckle_noise",
    "salt_pepper",
    "gaussian_filter",
    "average_filter",
    "unsharp_filter",
)


class AttackError(Exception):
    pass


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    params: dict = field(default_factory=dict)
    rng_seed: int = 0

    def name(self) -> str:
        """The CLI spec-string form, e.g. 'jpeg:q=35'."""
        kind_to_tag = {
            "jpeg": "jpeg", "gaussian_noise": "gauss", "speckle_noise": "speckle",
            "salt_pepper": "saltpepper", "gaussian_filter": "gfilter",
            "average_filter": "afilter", "unsharp_filter": "unsharp",
        }
        params = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.params.items())
        return f"{kind_to_tag[self.kind]}:{params}" if params else kind_to_tag[self.kind]


def jpeg_attack(img: Image, quality: int, base_qtable=None) -> Image:
    """Per-block DCT quantize/dequantize at an IJG quality factor."""
    base = dct.JPEG_LUMINANCE_QTABLE if base_qtable is None else base_qtable
    qt = dct.scale_quant_table(base, quality)
    out = img.pixels.copy()
    b = BLOCK_SIZE
    for y in range(0, img.height - b + 1, b):
        for x in range(0, img.width - b + 1, b):
            coeffs = dct.forward_dct(out[y : y + b, x : x + b])
            coeffs = dct.dequantize(dct.quantize(coeffs, qt), qt)
            out[y : y + b, x : x + b] = dct.inverse_dct(coeffs)
    return Image(out)


def _finish(float_pixels: np.ndarray) -> Image:
    return Image(np.clip(np.rint(float_pixels), 0, 255).astype(np.uint8))


def add_gaussian_noise(img: Image, variance: float, seed: int = 0) -> Image:
    """Additive white gaussian noise; variance is on the normalized [0, 1] scale."""
    if variance < 0:
        raise AttackError("variance must be >= 0")
    rng = np.random.default_rng(seed)
    x = img.pixels / 255.0 + rng.normal(0.0, np.sqrt(variance), img.pixels.shape)
    return _finish(np.clip(x, 0.0, 1.0) * 255.0)


def add_speckle_noise(img: Image, variance: float, seed: int = 0) -> Image:
    """Multiplicative noise: out = in * (1 + n), n ~ Normal(0, variance)."""
    if variance < 0:
        raise AttackError("variance must be >= 0")
    rng = np.random.default_rng(seed)
    n = rng.normal(0.0, np.sqrt(variance), img.pixels.shape)
    x = (img.pixels / 255.0) * (1.0 + n)
    return _finish(np.clip(x, 0.0, 1.0) * 255.0)


def add_salt_pepper(img: Image, density: float, seed: int = 0) -> Image:
    """A `density` fraction of pixels is forced to 0 or 255 (equal probability)."""
    if not 0.0 <= density <= 1.0:
        raise AttackError("density must be in [0, 1]")
    rng = np.random.default_rng(seed)
    out = img.pixels.copy()
    hit = rng.random(out.shape) < density
    salt = rng.random(out.shape) < 0.5
    out[hit & salt] = 255
    out[hit & ~salt] = 0
    return Image(out)


def _check_kernel(kernel_size: int):
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise AttackError(f"kernel size must be odd and >= 3, got {kernel_size}")


def _gaussian_kernel_1d(kernel_size: int, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise AttackError("sigma must be > 0")
    r = kernel_size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _gaussian_blur_float(pixels: np.ndarray, kernel_size: int, sigma: float) -> np.ndarray:
    k = _gaussian_kernel_1d(kernel_size, sigma)
    out = ndimage.correlate1d(pixels.astype(np.float64), k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def gaussian_filter(img: Image, kernel_size: int, sigma: float) -> Image:
    """Separable gaussian blur with edge replication at the borders."""
    _check_kernel(kernel_size)
    return _finish(_gaussian_blur_float(img.pixels, kernel_size, sigma))


def average_filter(img: Image, kernel_size: int) -> Image:
    _check_kernel(kernel_size)
    k = np.full(kernel_size, 1.0 / kernel_size)
    out = ndimage.correlate1d(img.pixels.astype(np.float64), k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return _finish(out)


def unsharp_filter(img: Image, kernel_size: int, sigma: float, amount: float) -> Image:
    """Sharpen: out = in + amount * (in - gaussian_blur(in))."""
    _check_kernel(kernel_size)
    if amount <= 0:
        raise AttackError("amount must be > 0")
    p = img.pixels.astype(np.float64)
    return _finish(p + amount * (p - _gaussian_blur_float(img.pixels, kernel_size, sigma)))


_SPEC_TAGS = {
    "jpeg": ("jpeg", {"q": int}),
    "gauss": ("gaussian_noise", {"v": float}),
    "speckle": ("speckle_noise", {"v": float}),
    "saltpepper": ("salt_pepper", {"d": float}),
    "gfilter": ("gaussian_filter", {"k": int, "s": float}),
    "afilter": ("average_filter", {"k": int}),
    "unsharp": ("unsharp_filter", {"k": int, "s": float, "a": float}),
}


def parse_attack_spec(text: str, rng_seed: int = 0) -> AttackSpec:
    """Parse a spec string such as 'jpeg:q=35' or 'unsharp:k=5,s=1.0,a=0.5'."""
    tag, _, rest = text.strip().partition(":")
    if tag not in _SPEC_TAGS:
        raise AttackError(f"unknown attack kind {tag!r}")
    kind, schema = _SPEC_TAGS[tag]
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or key not in schema:
            raise AttackError(f"bad parameter {item!r} for attack {tag!r}")
        try:
            params[key] = schema[key](val)
        except ValueError as e:
            raise AttackError(f"bad value for {key!r} in {text!r}") from e
    missing = set(schema) - set(params)
    if missing:
        raise AttackError(f"attack {tag!r} missing parameters {sorted(missing)}")
    return AttackSpec(kind=kind, params=params, rng_seed=rng_seed)


def apply_attack(img: Image, spec: AttackSpec) -> Image:
    p = spec.params
    if spec.kind == "jpeg":
        return jpeg_attack(img, p["q"])
    if spec.kind == "gaussian_noise":
        return add_gaussian_noise(img, p["v"], spec.rng_seed)
    if spec.kind == "speckle_noise":
        return add_speckle_noise(img, p["v"], spec.rng_seed)
    if spec.kind == "salt_pepper":
        return add_salt_pepper(img, p["d"], spec.rng_seed)
    if spec.kind == "gaussian_filter":
        return gaussian_filter(img, p["k"], p["s"])
    if spec.kind == "average_filter":
        return average_filter(img, p["k"])
    if spec.kind == "unsharp_filter":
        return unsharp_filter(img, p["k"], p["s"], p["a"])
    raise AttackError(f"unknown attack kind {spec.kind!r}")


def default_sweep(rng_seed: int = 0) -> list[AttackSpec]:
    """The benchmark grid: 5 JPEG qualities, 3 noises, 3 filters x 3 sizes."""
    specs = [AttackSpec("jpeg", {"q": q}) for q in (90, 70, 50, 30, 10)]
    specs += [
        AttackSpec("gaussian_noise", {"v": 0.001}, rng_seed),
        AttackSpec("speckle_noise", {"v": 0.004}, rng_seed),
        AttackSpec("salt_pepper", {"d": 0.02}, rng_seed),
    ]
    for k in (3, 5, 7):
        sigma = 0.5 * (k / 3.0)
        specs.append(AttackSpec("gaussian_filter", {"k": k, "s": sigma}))
        specs.append(AttackSpec("average_filter", {"k": k}))
        specs.append(AttackSpec("unsharp_filter", {"k": k, "s": sigma, "a": 0.5}))
    return specs
