"""Tensor operators for the inference runtime.

All tensors are float32 ndarrays in (N, C, H, W) layout. Convolution and the
pooling reductions accumulate in float64, so results are independent of
summation order well below the float32 quantum.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError


def _out_size(size: int, kernel: int, stride: int, padding: int) -> int:
    out = (size + 2 * padding - kernel) // stride + 1
    if out < 1:
        raise ShapeError(f"kernel {kernel} (stride {stride}, pad {padding}) exceeds input size {size}")
    return out


def conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None,
           stride: int = 1, padding: int = 0) -> np.ndarray:
    """Direct cross-correlation with zero padding."""
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(f"conv2d expects 4-d input and weight, got {x.shape} and {weight.shape}")
    n, c, h, w = x.shape
    c_out, c_in, kh, kw = weight.shape
    if c != c_in:
        raise ShapeError(f"conv2d input has {c} channels but weight expects {c_in}")
    oh = _out_size(h, kh, stride, padding)
    ow = _out_size(w, kw, stride, padding)
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :oh, :ow]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c_in * kh * kw)
    wmat = weight.reshape(c_out, -1).astype(np.float64)
    out = cols.astype(np.float64) @ wmat.T
    if bias is not None:
        if bias.shape != (c_out,):
            raise ShapeError(f"conv2d bias shape {bias.shape} != ({c_out},)")
        out += bias.astype(np.float64)
    return out.transpose(0, 2, 1).reshape(n, c_out, oh, ow).astype(np.float32)


def maxpool2d(x: np.ndarray, kernel: int, stride: int, padding: int = 0) -> np.ndarray:
    if x.ndim != 4:
        raise ShapeError(f"maxpool2d expects 4-d input, got {x.shape}")
    n, c, h, w = x.shape
    oh = _out_size(h, kernel, stride, padding)
    ow = _out_size(w, kernel, stride, padding)
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)),
                   constant_values=-np.inf)
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :oh, :ow]
    return windows.max(axis=(4, 5)).astype(np.float32)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, np.float32(0.0))


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """(N, C, H, W) -> (N, C, 1, 1) by spatial mean."""
    if x.ndim != 4:
        raise ShapeError(f"global_avg_pool expects 4-d input, got {x.shape}")
    return x.astype(np.float64).mean(axis=(2, 3), keepdims=True).astype(np.float32)


def concat_channels(tensors: list[np.ndarray]) -> np.ndarray:
    if not tensors:
        raise ShapeError("concat_channels needs at least one input")
    base = tensors[0].shape
    for t in tensors[1:]:
        if t.ndim != 4 or t.shape[0] != base[0] or t.shape[2:] != base[2:]:
            raise ShapeError(f"concat_channels inputs disagree: {base} vs {t.shape}")
    return np.concatenate(tensors, axis=1)


def softmax(x: np.ndarray) -> np.ndarray:
    """Channel softmax with max subtraction, computed in float64."""
    if x.ndim != 4:
        raise ShapeError(f"softmax expects 4-d input, got {x.shape}")
    z = x.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return (e / e.sum(axis=1, keepdims=True)).astype(np.float32)
