"""Image and mask primitives shared by every algorithm in the package.

Pixels are kept as float32 in [0, 1], shape (height, width, channels) with
channels interleaved, 1 (gray) or 3 (RGB). Quantization to 8-bit happens only
at the codec boundary so averaging and normalization keep sub-quantum
precision. Masks are boolean rasters where True marks a pixel to synthesize.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ChannelCountError, DecodeError, DimsMismatchError, UnsupportedFormatError

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


@dataclass
class ImageBuffer:
    """Decoded raster image: (h, w, c) float32 in [0, 1], c in {1, 3}."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] not in (1, 3):
            raise ChannelCountError(f"expected (h, w, 1|3) pixels, got shape {p.shape}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise DimsMismatchError(f"image dimensions must be >= 1, got {p.shape[:2]}")
        if p.dtype != np.float32:
            self.pixels = p.astype(np.float32)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def validate(self) -> "ImageBuffer":
        if not np.isfinite(self.pixels).all():
            raise ValueError("image contains non-finite values")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValueError("image intensities outside [0, 1]")
        return self

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.pixels.copy())


@dataclass
class Mask:
    """Boolean selection raster; True = unknown / to inpaint."""

    bits: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2:
            raise DimsMismatchError(f"mask must be 2-d, got shape {self.bits.shape}")
        if self.bits.dtype != np.bool_:
            self.bits = self.bits.astype(np.bool_)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        return int(self.bits.sum())


def _corruption_offset(data: bytes) -> int:
    """Best-effort byte offset of the first structural break in a PNG/JPEG."""
    if data[:8] == _PNG_SIG:
        pos = 8
        while pos + 8 <= len(data):
            length = int.from_bytes(data[pos : pos + 4], "big")
            ctype = data[pos + 4 : pos + 8]
            if not all(65 <= b <= 122 for b in ctype):
                return pos + 4
            end = pos + 12 + length
            if end > len(data):
                return len(data)
            if ctype == b"IEND":
                return pos
            pos = end
        return min(pos, len(data))
    if data[:2] == b"\xff\xd8":
        pos = 2
        while pos + 4 <= len(data):
            if data[pos] != 0xFF:
                return pos
            marker = data[pos + 1]
            if marker == 0xD9 or 0xD0 <= marker <= 0xD7:
                pos += 2
                continue
            if marker == 0xDA:  # entropy-coded data follows; stop walking
                return len(data)
            seg = int.from_bytes(data[pos + 2 : pos + 4], "big")
            if seg < 2 or pos + 2 + seg > len(data):
                return len(data)
            pos += 2 + seg
        return min(pos, len(data))
    for sig in (_PNG_SIG, b"\xff\xd8"):
        common = 0
        for a, b in zip(data, sig):
            if a != b:
                break
            common += 1
        if common:
            return common
    return 0


def decode_image(data: bytes) -> ImageBuffer:
    """Decode a PNG or JPEG byte stream to an ImageBuffer.

    8-bit samples map to [0, 1] by v/255; grayscale keeps one channel, color
    becomes three; alpha is composited over white. 16-bit depths are refused.
    """
    try:
        im = Image.open(io.BytesIO(data))
        fmt = im.format
        im.load()
    except UnidentifiedImageError as exc:
        raise DecodeError("unrecognized or malformed image stream", _corruption_offset(data)) from exc
    except Exception as exc:
        raise DecodeError(str(exc), _corruption_offset(data)) from exc
    if fmt not in ("PNG", "JPEG"):
        raise UnsupportedFormatError(f"only PNG and JPEG are accepted, got {fmt}")
    if fmt == "PNG" and len(data) > 24 and data[24] > 8:
        raise UnsupportedFormatError(f"unsupported PNG bit depth {data[24]}")
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
        raise UnsupportedFormatError(f"unsupported sample depth (mode {im.mode})")

    if im.mode == "P":
        im = im.convert("RGBA" if "transparency" in im.info else "RGB")
    if im.mode == "1":
        im = im.convert("L")

    if im.mode == "LA":
        arr = np.asarray(im, dtype=np.float64)
        alpha = arr[..., 1:2] / 255.0
        gray = arr[..., 0:1] * alpha + 255.0 * (1.0 - alpha)
        arr8 = np.floor(gray + 0.5).clip(0, 255).astype(np.uint8)
    elif im.mode == "RGBA":
        white = Image.new("RGBA", im.size, (255, 255, 255, 255))
        arr8 = np.asarray(Image.alpha_composite(white, im).convert("RGB"))
    elif im.mode == "RGB":
        arr8 = np.asarray(im)
    elif im.mode == "L":
        arr8 = np.asarray(im)[..., None]
    elif im.mode in ("CMYK", "YCbCr"):
        arr8 = np.asarray(im.convert("RGB"))
    else:
        raise UnsupportedFormatError(f"unsupported image mode {im.mode}")

    if arr8.ndim == 2:
        arr8 = arr8[..., None]
    return ImageBuffer((arr8.astype(np.float32)) / np.float32(255.0))


def encode_image(img: ImageBuffer) -> bytes:
    """Encode to PNG. Intensities quantize by round-half-up of v*255."""
    arr = quantize_u8(img.pixels)
    if img.channels == 1:
        pil = Image.fromarray(arr[..., 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def quantize_u8(pixels: np.ndarray) -> np.ndarray:
    """Map unit-interval floats to uint8 with round-half-up."""
    return np.floor(pixels.astype(np.float64) * 255.0 + 0.5).clip(0, 255).astype(np.uint8)


def _resize_array(pixels: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resample of an (h, w, c) array with half-pixel-center alignment."""
    in_h, in_w = pixels.shape[:2]
    if (in_h, in_w) == (out_h, out_w):
        return pixels.copy()

    def axis_coords(n_in: int, n_out: int):
        # source coordinate of each output center, clamped to the border
        src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        lo = np.floor(src)
        frac = src - lo
        i0 = np.clip(lo, 0, n_in - 1).astype(np.int64)
        i1 = np.clip(lo + 1, 0, n_in - 1).astype(np.int64)
        return i0, i1, frac

    x0, x1, fx = axis_coords(in_w, out_w)
    y0, y1, fy = axis_coords(in_h, out_h)
    src = pixels.astype(np.float64)
    top = src[y0][:, x0] * (1.0 - fx)[None, :, None] + src[y0][:, x1] * fx[None, :, None]
    bot = src[y1][:, x0] * (1.0 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
    out = top * (1.0 - fy)[:, None, None] + bot * fy[:, None, None]
    return out.astype(np.float32)


def resize_bilinear(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    """Resize with bilinear interpolation, half-pixel-center convention."""
    if out_w < 1 or out_h < 1:
        raise DimsMismatchError(f"target size must be >= 1, got {out_w}x{out_h}")
    return ImageBuffer(_resize_array(img.pixels, out_w, out_h))


def mask_from_image(img: ImageBuffer, threshold: float = 0.5) -> Mask:
    """Threshold a single-channel image into a mask: bit = intensity > threshold."""
    if img.channels != 1:
        raise ChannelCountError(f"mask image must have 1 channel, got {img.channels}")
    return Mask(img.pixels[..., 0] > threshold)


def mask_to_image(mask: Mask) -> ImageBuffer:
    """Render a mask as a single-channel image (1.0 where set)."""
    return ImageBuffer(mask.bits.astype(np.float32)[..., None])
