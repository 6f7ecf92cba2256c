import sys
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from pixprobe import ImageBuffer, Mask, load_model_dir  # noqa: E402


@pytest.fixture(scope="session")
def toynet():
    return load_model_dir(FIXTURES / "toynet")


@pytest.fixture(scope="session")
def scene_png() -> bytes:
    return (FIXTURES / "scene.png").read_bytes()


@pytest.fixture(scope="session")
def mask_png() -> bytes:
    return (FIXTURES / "scene_mask.png").read_bytes()


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jit kernels on tiny inputs so timed tests measure work,
    not compilation (the numba cache makes this cheap after the first run)."""
    from pixprobe import inpaint_patchmatch, inpaint_telea, march_distance
    from pixprobe.patchmatch import PatchMatchParams

    img = ImageBuffer(np.random.default_rng(0).random((24, 24, 3), dtype=np.float32))
    bits = np.zeros((24, 24), bool)
    bits[10:14, 10:14] = True
    inpaint_telea(img, Mask(bits), 3)
    march_distance(Mask(bits))
    inpaint_patchmatch(img, Mask(bits), PatchMatchParams(pyramid_min=12, iterations=1))
    return True


def random_image(rng, h, w, c=3) -> ImageBuffer:
    return ImageBuffer(rng.random((h, w, c), dtype=np.float32))
