import numpy as np
import pytest
from scipy import ndimage

from fuzzymark.image import Image


def make_random_image(seed: int, size: int = 256) -> Image:
    """Smooth mid-range random image: natural-ish statistics, no saturation."""
    rng = np.random.default_rng(seed)
    field = ndimage.gaussian_filter(rng.standard_normal((size, size)), 1.5)
    field /= field.std()
    return Image(np.clip(np.rint(128 + 45 * field), 20, 235).astype(np.uint8))


def random_tile(rng) -> np.ndarray:
    return rng.integers(0, 256, (8, 8)).astype(np.uint8)


@pytest.fixture(scope="session")
def corpus_images():
    from fuzzymark.corpus import make_corpus

    return make_corpus()
