"""Model loading, validation, and classification.

A model is a JSON manifest plus one raw little-endian float32 blob per
tensor (row-major, OIHW for conv weights) and a labels file with one label
per line. The manifest fixes the input geometry and per-channel
normalization, lists the layers in topological order, and declares every
tensor's shape; see docs/model_format.md for the schema.

The graph is restricted to the six operators a squeeze-style classifier
needs, and its tail must be conv2d (optionally through relu) ->
global_avg_pool -> softmax. That guarantee is what lets the activation-map
module read per-class evidence straight off the last convolution.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import ops
from .errors import (
    CamIncompatibleError,
    ClassRangeError,
    GraphError,
    ShapeError,
    WeightError,
)
from .image import ImageBuffer, resize_bilinear

INPUT_NAME = "image"
OP_KINDS = ("conv2d", "relu", "maxpool2d", "global_avg_pool", "concat_channels", "softmax")


@dataclass
class InputSpec:
    height: int
    width: int
    channels: int
    mean: tuple[float, ...]
    std: tuple[float, ...]


@dataclass
class Layer:
    name: str
    op: str
    inputs: tuple[str, ...]
    weights: str | None = None
    bias: str | None = None
    stride: int = 1
    padding: int = 0
    kernel: int = 0


@dataclass
class TopPrediction:
    class_id: int
    label: str
    probability: float


@dataclass
class ClassScores:
    """Full class distribution plus the descending top-k table."""

    distribution: np.ndarray
    topk: list[TopPrediction]

    def to_json(self) -> dict:
        return {
            "topk": [
                {"class_id": p.class_id, "label": p.label, "probability": p.probability}
                for p in self.topk
            ]
        }


@dataclass
class ModelGraph:
    layers: list[Layer]
    weights: dict[str, np.ndarray]
    labels: list[str]
    input_spec: InputSpec
    cam_source: str = field(default="")
    num_classes: int = field(default=0)

    def forward(self, x: np.ndarray, keep: str | None = None):
        """Run the graph on (1, C, H, W) input; returns (probs, kept activation)."""
        acts: dict[str, np.ndarray] = {INPUT_NAME: x}
        kept = None
        out = x
        for layer in self.layers:
            ins = [acts[name] for name in layer.inputs]
            if layer.op == "conv2d":
                out = ops.conv2d(ins[0], self.weights[layer.weights],
                                 self.weights[layer.bias] if layer.bias else None,
                                 layer.stride, layer.padding)
            elif layer.op == "relu":
                out = ops.relu(ins[0])
            elif layer.op == "maxpool2d":
                out = ops.maxpool2d(ins[0], layer.kernel, layer.stride, layer.padding)
            elif layer.op == "global_avg_pool":
                out = ops.global_avg_pool(ins[0])
            elif layer.op == "concat_channels":
                out = ops.concat_channels(ins)
            elif layer.op == "softmax":
                out = ops.softmax(ins[0])
            else:  # unreachable after validation
                raise GraphError(f"layer {layer.name}: unknown op {layer.op}")
            acts[layer.name] = out
            if keep is not None and layer.name == keep:
                kept = out
        return out, kept

    def logits(self, x: np.ndarray) -> np.ndarray:
        """Pre-softmax class scores, read from the pooling layer's output."""
        gap_name = self.layers[-1].inputs[0]
        _, pooled = self.forward(x, keep=gap_name)
        return pooled.reshape(-1)


def _parse_layer(entry: dict, index: int) -> Layer:
    try:
        name = entry["name"]
        op = entry["op"]
    except KeyError as exc:
        raise GraphError(f"layer {index}: missing field {exc}") from None
    if op not in OP_KINDS:
        raise GraphError(f"layer {name}: unknown op {op!r}")
    if op == "concat_channels":
        inputs = tuple(entry.get("inputs", ()))
        if len(inputs) < 1:
            raise GraphError(f"layer {name}: concat_channels needs inputs")
    else:
        if "input" not in entry:
            raise GraphError(f"layer {name}: missing input")
        inputs = (entry["input"],)
    return Layer(
        name=name,
        op=op,
        inputs=inputs,
        weights=entry.get("weights"),
        bias=entry.get("bias"),
        stride=int(entry.get("stride", 1)),
        padding=int(entry.get("padding", 0)),
        kernel=int(entry.get("kernel", 0)),
    )


def _infer_shapes(layers: list[Layer], weights: dict[str, np.ndarray], spec: InputSpec) -> dict:
    shapes: dict[str, tuple] = {INPUT_NAME: (1, spec.channels, spec.height, spec.width)}
    for layer in layers:
        for src in layer.inputs:
            if src not in shapes:
                raise GraphError(f"layer {layer.name}: input {src!r} is not produced earlier")
        try:
            shapes[layer.name] = _layer_out_shape(layer, shapes, weights)
        except ShapeError as exc:
            raise GraphError(f"layer {layer.name}: {exc}") from None
    return shapes


def _layer_out_shape(layer: Layer, shapes: dict, weights: dict) -> tuple:
    n, c, h, w = shapes[layer.inputs[0]]
    if layer.op == "conv2d":
        if layer.weights is None:
            raise ShapeError("conv2d layer declares no weights")
        wt = weights[layer.weights]
        if wt.ndim != 4:
            raise ShapeError(f"conv weight must be 4-d, got {wt.shape}")
        c_out, c_in, kh, kw = wt.shape
        if c_in != c:
            raise ShapeError(f"input has {c} channels but weight expects {c_in}")
        if layer.bias is not None and weights[layer.bias].shape != (c_out,):
            raise ShapeError(f"bias shape {weights[layer.bias].shape} != ({c_out},)")
        oh = ops._out_size(h, kh, layer.stride, layer.padding)
        ow = ops._out_size(w, kw, layer.stride, layer.padding)
        return (n, c_out, oh, ow)
    if layer.op == "maxpool2d":
        if layer.kernel < 1:
            raise ShapeError("maxpool2d needs kernel >= 1")
        oh = ops._out_size(h, layer.kernel, layer.stride, layer.padding)
        ow = ops._out_size(w, layer.kernel, layer.stride, layer.padding)
        return (n, c, oh, ow)
    if layer.op == "global_avg_pool":
        return (n, c, 1, 1)
    if layer.op == "concat_channels":
        total = 0
        for src in layer.inputs:
            sn, sc, sh, sw = shapes[src]
            if (sn, sh, sw) != (n, h, w):
                raise ShapeError(f"concat input {src} shape {shapes[src]} disagrees")
            total += sc
        return (n, total, h, w)
    # relu / softmax keep their input shape
    return (n, c, h, w)


def _check_cam_tail(layers: list[Layer]) -> tuple[str, str]:
    """Enforce conv2d (optionally relu) -> global_avg_pool -> softmax."""
    by_name = {layer.name: layer for layer in layers}
    softmaxes = [l for l in layers if l.op == "softmax"]
    if len(softmaxes) != 1:
        raise CamIncompatibleError(f"graph must contain exactly one softmax, found {len(softmaxes)}")
    sm = softmaxes[0]
    if layers[-1] is not sm:
        raise CamIncompatibleError("softmax must be the final layer")
    gap = by_name.get(sm.inputs[0])
    if gap is None or gap.op != "global_avg_pool":
        raise CamIncompatibleError("softmax must consume a global_avg_pool layer")
    feat = by_name.get(gap.inputs[0])
    if feat is None:
        raise CamIncompatibleError("pooling layer input not found")
    if feat.op == "relu":
        feat_src = by_name.get(feat.inputs[0])
        if feat_src is None or feat_src.op != "conv2d":
            raise CamIncompatibleError("pooled features must come from a convolution")
    elif feat.op != "conv2d":
        raise CamIncompatibleError("pooled features must come from a convolution")
    return feat.name, gap.name


def load_model(manifest: bytes, blobs: Mapping[str, bytes]) -> ModelGraph:
    """Parse and eagerly validate a manifest plus its weight blobs."""
    try:
        doc = json.loads(manifest)
    except json.JSONDecodeError as exc:
        raise GraphError(f"manifest is not valid JSON: {exc}") from None

    inp = doc.get("input")
    if not inp:
        raise GraphError("manifest missing input spec")
    channels = int(inp.get("channels", 3))
    spec = InputSpec(
        height=int(inp["height"]),
        width=int(inp["width"]),
        channels=channels,
        mean=tuple(float(v) for v in inp.get("mean", [0.0] * channels)),
        std=tuple(float(v) for v in inp.get("std", [1.0] * channels)),
    )
    if len(spec.mean) != channels or len(spec.std) != channels:
        raise GraphError("input mean/std length must equal channel count")
    if any(s == 0 for s in spec.std):
        raise GraphError("input std must be non-zero")

    weights: dict[str, np.ndarray] = {}
    for tname, tinfo in doc.get("tensors", {}).items():
        shape = tuple(int(v) for v in tinfo["shape"])
        fname = tinfo["file"]
        if fname not in blobs:
            raise WeightError(f"tensor {tname}: blob {fname!r} not provided")
        raw = blobs[fname]
        count = int(np.prod(shape))
        if len(raw) != 4 * count:
            raise WeightError(
                f"tensor {tname}: blob {fname!r} holds {len(raw)} bytes, expected {4 * count}"
            )
        arr = np.frombuffer(raw, dtype="<f4").reshape(shape)
        if not np.isfinite(arr).all():
            raise WeightError(f"tensor {tname}: non-finite values")
        weights[tname] = np.ascontiguousarray(arr, dtype=np.float32)

    raw_layers = doc.get("layers", [])
    if not raw_layers:
        raise GraphError("manifest declares no layers (no softmax)")
    layers = [_parse_layer(entry, i) for i, entry in enumerate(raw_layers)]
    names = [l.name for l in layers]
    if len(set(names)) != len(names) or INPUT_NAME in names:
        raise GraphError("layer names must be unique and must not shadow the input")
    for layer in layers:
        for ref in (layer.weights, layer.bias):
            if ref is not None and ref not in weights:
                raise WeightError(f"layer {layer.name}: tensor {ref!r} not declared")

    shapes = _infer_shapes(layers, weights, spec)
    cam_source, _ = _check_cam_tail(layers)
    num_classes = shapes[layers[-1].name][1]

    if "labels" in doc:
        labels = [str(v) for v in doc["labels"]]
    elif "labels_file" in doc:
        fname = doc["labels_file"]
        if fname not in blobs:
            raise WeightError(f"labels file {fname!r} not provided")
        labels = blobs[fname].decode("utf-8").splitlines()
    else:
        labels = [f"class_{i}" for i in range(num_classes)]
    if len(labels) < num_classes:
        raise GraphError(f"{len(labels)} labels for {num_classes} classes")
    labels = labels[:num_classes]

    return ModelGraph(layers, weights, labels, spec, cam_source, num_classes)


def load_model_dir(path: str | Path) -> ModelGraph:
    """Load manifest.json plus sibling blob files from a directory."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise WeightError(f"no manifest.json under {root}")
    blobs = {
        p.name: p.read_bytes()
        for p in root.iterdir()
        if p.is_file() and p.name != "manifest.json"
    }
    return load_model(manifest_path.read_bytes(), blobs)


def preprocess(graph: ModelGraph, img: ImageBuffer) -> np.ndarray:
    """Resize to the model's input size and normalize per channel."""
    spec = graph.input_spec
    if (img.height, img.width) != (spec.height, spec.width):
        img = resize_bilinear(img, spec.width, spec.height)
    px = img.pixels
    if px.shape[2] != spec.channels:
        if px.shape[2] == 1 and spec.channels == 3:
            px = np.repeat(px, 3, axis=2)
        else:
            raise ShapeError(
                f"model expects {spec.channels} channels, image has {px.shape[2]}"
            )
    mean = np.asarray(spec.mean, np.float32).reshape(1, 1, -1)
    std = np.asarray(spec.std, np.float32).reshape(1, 1, -1)
    normalized = (px - mean) / std
    return normalized.transpose(2, 0, 1)[None].astype(np.float32)


def classify(graph: ModelGraph, img: ImageBuffer, k: int = 5) -> ClassScores:
    """Class distribution and descending top-k for an image."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    probs, _ = graph.forward(preprocess(graph, img))
    distribution = probs.reshape(-1)
    k = min(k, distribution.size)
    order = np.lexsort((np.arange(distribution.size), -distribution.astype(np.float64)))
    topk = [
        TopPrediction(int(i), graph.labels[int(i)], float(distribution[int(i)]))
        for i in order[:k]
    ]
    return ClassScores(distribution, topk)


def check_class_id(graph: ModelGraph, class_id: int) -> int:
    if not 0 <= class_id < graph.num_classes:
        raise ClassRangeError(f"class {class_id} outside [0, {graph.num_classes})")
    return class_id
