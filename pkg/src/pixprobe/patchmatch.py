"""Texture-synthesizing inpainting by randomized nearest-neighbor search.

The hole is filled coarse-to-fine over an image pyramid. The coarsest level
starts from a fast-marching fill; every level then improves a nearest-
neighbor field (NNF) mapping each patch that overlaps the hole to the best
matching patch drawn entirely from known pixels, alternating raster-scan
propagation with a geometrically shrinking random search. After the search
rounds, overlapping matches vote: each hole pixel becomes the uniform
average of every contribution a matched source patch makes to it. The result
seeds the next finer level through bilinear upsampling.

Patch cost is the sum of squared differences over the full patch; hole cells
of the target patch compare against their current synthesized values, so the
field and the fill refine each other across levels. Offsets always point at
patches that are fully inside the image and contain no hole pixels.

Everything random flows from one xoshiro128++ stream seeded by the caller,
which makes runs bit-reproducible (see rng module).
"""

from dataclasses import dataclass, field

import numpy as np

from .accel import jit
from .errors import AllUnknownError, DimsMismatchError, NoSourceError
from .image import ImageBuffer, Mask, _resize_array
from .rng import Xoshiro128, rng_below
from .telea import inpaint_telea

_NO_TARGET_COST = 0.0


@dataclass
class PatchMatchParams:
    patch_size: int = 7
    iterations: int = 5
    pyramid_min: int = 32
    search_decay: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError(f"patch_size must be odd and >= 3, got {self.patch_size}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.search_decay < 1.0:
            raise ValueError(f"search_decay must be in (0, 1), got {self.search_decay}")
        if self.pyramid_min < self.patch_size:
            raise ValueError("pyramid_min must be at least patch_size")


@dataclass
class NearestNeighborField:
    """Per-target-patch offsets into the source region plus their SSD costs.

    Entries are defined where ``is_target`` is set: patch centers within the
    patch half-width of a hole pixel whose patch lies fully inside the image.
    """

    patch_size: int
    off_y: np.ndarray
    off_x: np.ndarray
    cost: np.ndarray
    is_target: np.ndarray
    valid_source: np.ndarray = field(repr=False)

    def total_cost(self) -> float:
        return float(self.cost[self.is_target].sum())

    def target_count(self) -> int:
        return int(self.is_target.sum())


@jit
def _patch_ssd(pixels, ty, tx, sy, sx, half, stop_at):
    """SSD between the patches centered at (ty,tx) and (sy,sx).

    Bails out early once the sum exceeds stop_at (candidate can't win).
    """
    c = pixels.shape[2]
    total = 0.0
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            for ch in range(c):
                d = np.float64(pixels[ty + dy, tx + dx, ch]) - np.float64(
                    pixels[sy + dy, sx + dx, ch]
                )
                total += d * d
        if total > stop_at:
            return total
    return total


@jit
def _nnf_init(pixels, is_target, src_ys, src_xs, off_y, off_x, cost, half, state):
    h, w = is_target.shape
    n_src = src_ys.shape[0]
    for y in range(h):
        for x in range(w):
            if not is_target[y, x]:
                continue
            pick = rng_below(state, n_src)
            sy = src_ys[pick]
            sx = src_xs[pick]
            off_y[y, x] = sy - y
            off_x[y, x] = sx - x
            cost[y, x] = _patch_ssd(pixels, y, x, sy, sx, half, 1.0e300)


@jit
def _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x, sy, sx, half):
    h, w = valid_source.shape
    if sy < half or sy >= h - half or sx < half or sx >= w - half:
        return
    if not valid_source[sy, sx]:
        return
    if sy - y == off_y[y, x] and sx - x == off_x[y, x]:
        return
    current = cost[y, x]
    cand = _patch_ssd(pixels, y, x, sy, sx, half, current)
    if cand < current:
        cost[y, x] = cand
        off_y[y, x] = sy - y
        off_x[y, x] = sx - x


@jit
def _nnf_sweep(pixels, is_target, valid_source, off_y, off_x, cost, half, iteration, state, decay):
    """One propagation + random-search pass; scan direction alternates."""
    h, w = is_target.shape
    reverse = iteration % 2 == 1
    w_start = np.float64(max(h, w))
    for row in range(h):
        y = h - 1 - row if reverse else row
        for col in range(w):
            x = w - 1 - col if reverse else col
            if not is_target[y, x]:
                continue
            # propagation: reuse the offsets of the two scan predecessors
            if reverse:
                if x + 1 < w and is_target[y, x + 1]:
                    _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x,
                                   y + off_y[y, x + 1], x + off_x[y, x + 1], half)
                if y + 1 < h and is_target[y + 1, x]:
                    _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x,
                                   y + off_y[y + 1, x], x + off_x[y + 1, x], half)
            else:
                if x - 1 >= 0 and is_target[y, x - 1]:
                    _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x,
                                   y + off_y[y, x - 1], x + off_x[y, x - 1], half)
                if y - 1 >= 0 and is_target[y - 1, x]:
                    _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x,
                                   y + off_y[y - 1, x], x + off_x[y - 1, x], half)
            # random search around the current best, radius shrinking by decay
            radius = w_start
            while radius >= 1.0:
                r = np.int64(radius)
                cy = y + off_y[y, x]
                cx = x + off_x[y, x]
                dy = rng_below(state, 2 * r + 1) - r
                dx = rng_below(state, 2 * r + 1) - r
                sy = cy + dy
                if sy < half:
                    sy = half
                elif sy > h - 1 - half:
                    sy = h - 1 - half
                sx = cx + dx
                if sx < half:
                    sx = half
                elif sx > w - 1 - half:
                    sx = w - 1 - half
                _try_candidate(pixels, valid_source, off_y, off_x, cost, y, x, sy, sx, half)
                radius *= decay


@jit
def _vote(pixels, out, hole, is_target, off_y, off_x, half):
    h, w, c = pixels.shape
    acc = np.zeros((h, w, c), np.float64)
    cnt = np.zeros((h, w), np.int64)
    for y in range(h):
        for x in range(w):
            if not is_target[y, x]:
                continue
            sy = y + off_y[y, x]
            sx = x + off_x[y, x]
            for dy in range(-half, half + 1):
                for dx in range(-half, half + 1):
                    qy = y + dy
                    qx = x + dx
                    if hole[qy, qx]:
                        for ch in range(c):
                            acc[qy, qx, ch] += np.float64(pixels[sy + dy, sx + dx, ch])
                        cnt[qy, qx] += 1
    for y in range(h):
        for x in range(w):
            if hole[y, x] and cnt[y, x] > 0:
                for ch in range(c):
                    out[y, x, ch] = np.float32(acc[y, x, ch] / cnt[y, x])


def _window_any(bits: np.ndarray, half: int) -> np.ndarray:
    """True where any set bit lies within Chebyshev distance ``half``."""
    out = bits.copy()
    for _ in range(half):
        grown = out.copy()
        grown[:-1, :] |= out[1:, :]
        grown[1:, :] |= out[:-1, :]
        out = grown
    tmp = out.copy()
    for _ in range(half):
        grown = tmp.copy()
        grown[:, :-1] |= tmp[:, 1:]
        grown[:, 1:] |= tmp[:, :-1]
        tmp = grown
    return tmp


def _source_map(bits: np.ndarray, half: int) -> np.ndarray:
    """Centers whose patch is fully in-bounds and free of hole pixels."""
    h, w = bits.shape
    ok = np.zeros((h, w), np.bool_)
    if h < 2 * half + 1 or w < 2 * half + 1:
        return ok
    clean = ~_window_any(bits, half)
    ok[half : h - half, half : w - half] = clean[half : h - half, half : w - half]
    return ok


def _target_map(bits: np.ndarray, half: int) -> np.ndarray:
    h, w = bits.shape
    near = _window_any(bits, half)
    ok = np.zeros((h, w), np.bool_)
    if h < 2 * half + 1 or w < 2 * half + 1:
        return ok
    ok[half : h - half, half : w - half] = near[half : h - half, half : w - half]
    return ok


def nnf_init(
    img: ImageBuffer, mask: Mask, patch_size: int, rng: Xoshiro128
) -> NearestNeighborField:
    """Random valid NNF over all patches that overlap the hole."""
    if patch_size < 3 or patch_size % 2 == 0:
        raise ValueError(f"patch_size must be odd and >= 3, got {patch_size}")
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimsMismatchError("image and mask dimensions differ")
    half = patch_size // 2
    bits = mask.bits
    valid_source = _source_map(bits, half)
    if not valid_source.any():
        raise NoSourceError("no fully-known source patch exists for this hole")
    is_target = _target_map(bits, half)
    h, w = bits.shape
    off_y = np.zeros((h, w), np.int64)
    off_x = np.zeros((h, w), np.int64)
    cost = np.full((h, w), _NO_TARGET_COST, np.float64)
    src = np.flatnonzero(valid_source.ravel()).astype(np.int64)
    src_ys = src // w
    src_xs = src - src_ys * w
    _nnf_init(img.pixels, is_target, src_ys, src_xs, off_y, off_x, cost, half, rng.state)
    return NearestNeighborField(patch_size, off_y, off_x, cost, is_target, valid_source)


def nnf_iterate(
    nnf: NearestNeighborField,
    img: ImageBuffer,
    mask: Mask,
    iteration: int,
    rng: Xoshiro128,
    search_decay: float = 0.5,
) -> NearestNeighborField:
    """One in-place improvement sweep. Total cost never increases."""
    half = nnf.patch_size // 2
    before = nnf.total_cost()
    _nnf_sweep(
        img.pixels,
        nnf.is_target,
        nnf.valid_source,
        nnf.off_y,
        nnf.off_x,
        nnf.cost,
        half,
        iteration,
        rng.state,
        float(search_decay),
    )
    after = nnf.total_cost()
    assert after <= before, f"NNF cost increased: {before} -> {after}"
    return nnf


def _vote_fill(img: ImageBuffer, hole: np.ndarray, nnf: NearestNeighborField) -> ImageBuffer:
    out = img.pixels.copy()
    _vote(img.pixels, out, hole, nnf.is_target, nnf.off_y, nnf.off_x, nnf.patch_size // 2)
    return ImageBuffer(out)


def _downsample_mask(bits: np.ndarray) -> np.ndarray:
    """Halve a mask; a coarse pixel is a hole if any of its children is."""
    h, w = bits.shape
    h2, w2 = (h + 1) // 2, (w + 1) // 2
    padded = np.zeros((h2 * 2, w2 * 2), np.bool_)
    padded[:h, :w] = bits
    return padded.reshape(h2, 2, w2, 2).any(axis=(1, 3))


def inpaint_patchmatch(
    img: ImageBuffer, mask: Mask, params: PatchMatchParams | None = None
) -> ImageBuffer:
    """Fill masked pixels by coarse-to-fine patch synthesis."""
    params = params or PatchMatchParams()
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimsMismatchError("image and mask dimensions differ")
    bits = mask.bits
    if bits.all():
        raise AllUnknownError("mask covers the whole image")
    if not bits.any():
        return img.copy()
    half = params.patch_size // 2
    if not _source_map(bits, half).any():
        raise NoSourceError("no fully-known source patch exists for this hole")

    rng = Xoshiro128(params.rng_seed)

    # pyramid, finest first
    images = [img]
    masks = [bits]
    while min(masks[-1].shape) // 2 >= params.pyramid_min and masks[-1].any():
        coarse_bits = _downsample_mask(masks[-1])
        h2, w2 = coarse_bits.shape
        images.append(resample_level(images[-1], w2, h2))
        masks.append(coarse_bits)

    current: ImageBuffer | None = None
    for level in range(len(images) - 1, -1, -1):
        level_img = images[level]
        level_bits = masks[level]
        if current is None:
            current = inpaint_telea(level_img, Mask(level_bits))
        else:
            seeded = level_img.pixels.copy()
            up = _resize_array(current.pixels, level_img.width, level_img.height)
            seeded[level_bits] = up[level_bits]
            current = ImageBuffer(seeded)
        if not level_bits.any():
            continue
        if not _source_map(level_bits, half).any():
            continue  # coarse level too crowded; keep the seeded fill
        nnf = nnf_init(current, Mask(level_bits), params.patch_size, rng)
        if nnf.target_count() == 0:
            continue
        for it in range(params.iterations):
            nnf_iterate(nnf, current, Mask(level_bits), it, rng, params.search_decay)
        current = _vote_fill(current, level_bits, nnf)

    out = img.pixels.copy()
    out[bits] = current.pixels[bits]
    return ImageBuffer(out)


def resample_level(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    return ImageBuffer(_resize_array(img.pixels, out_w, out_h))
