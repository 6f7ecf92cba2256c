"""SqueezeNet v1.1 topology expressed in the manifest layer schema.

Used by the checkpoint conversion tool (tools/convert_squeezenet.py) and by
the benchmark, which runs the architecture with random weights to measure
realistic classification latency without shipping a checkpoint.
"""

import numpy as np

from .model import ModelGraph, load_model
import json

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# (name, squeeze_channels, expand_channels) per fire block, v1.1 ordering
_FIRE_BLOCKS = [
    ("fire2", 16, 64),
    ("fire3", 16, 64),
    ("pool3", 0, 0),
    ("fire4", 32, 128),
    ("fire5", 32, 128),
    ("pool5", 0, 0),
    ("fire6", 48, 192),
    ("fire7", 48, 192),
    ("fire8", 64, 256),
    ("fire9", 64, 256),
]


def _fire(layers, tensors, name, prev, c_in, squeeze, expand):
    layers += [
        {"name": f"{name}.squeeze", "op": "conv2d", "input": prev,
         "weights": f"{name}.squeeze.weight", "bias": f"{name}.squeeze.bias"},
        {"name": f"{name}.squeeze_relu", "op": "relu", "input": f"{name}.squeeze"},
        {"name": f"{name}.expand1x1", "op": "conv2d", "input": f"{name}.squeeze_relu",
         "weights": f"{name}.expand1x1.weight", "bias": f"{name}.expand1x1.bias"},
        {"name": f"{name}.expand1x1_relu", "op": "relu", "input": f"{name}.expand1x1"},
        {"name": f"{name}.expand3x3", "op": "conv2d", "input": f"{name}.squeeze_relu",
         "weights": f"{name}.expand3x3.weight", "bias": f"{name}.expand3x3.bias", "padding": 1},
        {"name": f"{name}.expand3x3_relu", "op": "relu", "input": f"{name}.expand3x3"},
        {"name": f"{name}.concat", "op": "concat_channels",
         "inputs": [f"{name}.expand1x1_relu", f"{name}.expand3x3_relu"]},
    ]
    tensors[f"{name}.squeeze.weight"] = (squeeze, c_in, 1, 1)
    tensors[f"{name}.squeeze.bias"] = (squeeze,)
    tensors[f"{name}.expand1x1.weight"] = (expand, squeeze, 1, 1)
    tensors[f"{name}.expand1x1.bias"] = (expand,)
    tensors[f"{name}.expand3x3.weight"] = (expand, squeeze, 3, 3)
    tensors[f"{name}.expand3x3.bias"] = (expand,)
    return f"{name}.concat", 2 * expand


def v1_1_manifest(num_classes: int = 1000, input_size: int = 224) -> tuple[dict, dict]:
    """Manifest dict plus {tensor name: shape} for SqueezeNet v1.1."""
    layers: list[dict] = [
        {"name": "conv1", "op": "conv2d", "input": "image",
         "weights": "conv1.weight", "bias": "conv1.bias", "stride": 2},
        {"name": "conv1_relu", "op": "relu", "input": "conv1"},
        {"name": "pool1", "op": "maxpool2d", "input": "conv1_relu", "kernel": 3, "stride": 2},
    ]
    tensors: dict[str, tuple] = {
        "conv1.weight": (64, 3, 3, 3),
        "conv1.bias": (64,),
    }
    prev, c_in = "pool1", 64
    for name, squeeze, expand in _FIRE_BLOCKS:
        if squeeze == 0:
            layers.append({"name": name, "op": "maxpool2d", "input": prev,
                           "kernel": 3, "stride": 2})
            prev = name
            continue
        prev, c_in = _fire(layers, tensors, name, prev, c_in, squeeze, expand)
    layers += [
        {"name": "conv10", "op": "conv2d", "input": prev,
         "weights": "conv10.weight", "bias": "conv10.bias"},
        {"name": "conv10_relu", "op": "relu", "input": "conv10"},
        {"name": "pool10", "op": "global_avg_pool", "input": "conv10_relu"},
        {"name": "probs", "op": "softmax", "input": "pool10"},
    ]
    tensors["conv10.weight"] = (num_classes, c_in, 1, 1)
    tensors["conv10.bias"] = (num_classes,)
    manifest = {
        "name": "squeezenet_v1_1",
        "input": {
            "height": input_size,
            "width": input_size,
            "channels": 3,
            "mean": list(IMAGENET_MEAN),
            "std": list(IMAGENET_STD),
        },
        "layers": layers,
        "tensors": {name: {"shape": list(shape), "file": f"{name}.bin"}
                    for name, shape in tensors.items()},
    }
    return manifest, tensors


def random_model(num_classes: int = 1000, input_size: int = 224, seed: int = 0) -> ModelGraph:
    """SqueezeNet v1.1 with random weights; for latency measurement only."""
    manifest, tensors = v1_1_manifest(num_classes, input_size)
    rng = np.random.default_rng(seed)
    blobs = {}
    for name, shape in tensors.items():
        fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else 1
        scale = np.sqrt(2.0 / max(fan_in, 1))
        arr = (rng.standard_normal(shape) * scale).astype("<f4")
        blobs[f"{name}.bin"] = arr.tobytes()
    return load_model(json.dumps(manifest).encode(), blobs)
