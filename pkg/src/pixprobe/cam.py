"""Class activation maps read from the final convolutional features.

Because validated graphs end in conv (opt. relu) -> global-avg-pool ->
softmax, the channel of the pooled feature map belonging to a class IS that
class's spatial evidence: its mean equals the class logit exactly. No
gradients are involved; one forward pass yields the map.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimsMismatchError
from .image import ImageBuffer, _resize_array
from .model import ModelGraph, check_class_id, preprocess


def _make_heat_colormap() -> np.ndarray:
    """256-entry blue->cyan->yellow->red table, fixed so overlays reproduce."""
    u = np.arange(256, dtype=np.float64) / 255.0
    r = np.clip(1.5 - np.abs(4.0 * u - 3.0), 0.0, 1.0)
    g = np.clip(1.5 - np.abs(4.0 * u - 2.0), 0.0, 1.0)
    b = np.clip(1.5 - np.abs(4.0 * u - 1.0), 0.0, 1.0)
    return np.stack([r, g, b], axis=1).astype(np.float32)


HEAT_COLORMAP = _make_heat_colormap()


@dataclass
class CamHeatmap:
    class_id: int
    raw: np.ndarray          # (h, w) final-conv activation of the class channel
    normalized: np.ndarray   # (h, w) min-max scaled to [0, 1]; zeros when flat
    upsampled: np.ndarray    # (H, W) normalized map at image resolution


def compute_cam(graph: ModelGraph, img: ImageBuffer, class_id: int) -> CamHeatmap:
    """Activation map of one class for one image."""
    check_class_id(graph, class_id)
    _, feat = graph.forward(preprocess(graph, img), keep=graph.cam_source)
    raw = feat[0, class_id].astype(np.float32)
    lo = float(raw.min())
    hi = float(raw.max())
    if hi > lo:
        normalized = ((raw - lo) / (hi - lo)).astype(np.float32)
    else:
        normalized = np.zeros_like(raw)
    upsampled = _resize_array(normalized[..., None], img.width, img.height)[..., 0]
    return CamHeatmap(class_id, raw, normalized, upsampled)


def heatmap_image(heatmap: CamHeatmap) -> ImageBuffer:
    """The upsampled normalized map as a grayscale image."""
    return ImageBuffer(heatmap.upsampled[..., None])


def render_overlay(heatmap: CamHeatmap, img: ImageBuffer, alpha: float = 0.5) -> ImageBuffer:
    """Blend the colormapped heatmap over the image; alpha 0 = image only."""
    if heatmap.upsampled.shape != (img.height, img.width):
        raise DimsMismatchError(
            f"heatmap is {heatmap.upsampled.shape}, image is {(img.height, img.width)}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    idx = np.floor(heatmap.upsampled.astype(np.float64) * 255.0 + 0.5).clip(0, 255).astype(np.int64)
    color = HEAT_COLORMAP[idx]
    base = img.pixels if img.channels == 3 else np.repeat(img.pixels, 3, axis=2)
    alpha = np.float32(alpha)
    blended = (np.float32(1.0) - alpha) * base + alpha * color
    return ImageBuffer(blended)
