import numpy as np
import pytest

from pathbt.harness.synthetic import SyntheticSpec, palette_textures, synth_tiles


@pytest.fixture(scope="session")
def palette_tiles():
    """Small 3-class color-separable tile set shared across tests."""
    spec = SyntheticSpec(
        n_classes=3, tiles_per_class=60, tile_size=64, textures=palette_textures(3), seed=123
    )
    return synth_tiles(spec)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


@pytest.fixture()
def test_card():
    """Asymmetric RGB card: no flip or rotation maps it onto itself."""
    gen = np.random.default_rng(7)
    img = gen.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    img[0, 0] = (255, 0, 0)
    img[0, -1] = (0, 255, 0)
    img[-1, 0] = (0, 0, 255)
    return img
