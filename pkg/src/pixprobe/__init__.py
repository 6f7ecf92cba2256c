"""pixprobe: edit an image, watch a classifier react.

Core pieces: lossless-ish image/mask plumbing, two inpainting engines
(fast-marching and patch synthesis), a small CNN inference runtime with a
documented weight format, class activation maps, and an HTTP service plus
CLI tying them into an interactive loop.
"""

from .cam import CamHeatmap, compute_cam, heatmap_image, render_overlay
from .image import (
    ImageBuffer,
    Mask,
    decode_image,
    encode_image,
    mask_from_image,
    mask_to_image,
    resize_bilinear,
)
from .model import ClassScores, ModelGraph, classify, load_model, load_model_dir
from .patchmatch import (
    NearestNeighborField,
    PatchMatchParams,
    inpaint_patchmatch,
    nnf_init,
    nnf_iterate,
)
from .telea import inpaint_telea, march_distance

__version__ = "0.1.0"

__all__ = [
    "CamHeatmap",
    "ClassScores",
    "ImageBuffer",
    "Mask",
    "ModelGraph",
    "NearestNeighborField",
    "PatchMatchParams",
    "classify",
    "compute_cam",
    "decode_image",
    "encode_image",
    "heatmap_image",
    "inpaint_patchmatch",
    "inpaint_telea",
    "load_model",
    "load_model_dir",
    "march_distance",
    "mask_from_image",
    "mask_to_image",
    "render_overlay",
    "resize_bilinear",
]
