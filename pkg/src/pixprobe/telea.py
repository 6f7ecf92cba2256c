"""Fast-marching inpainting: the fast, deterministic fill.

Hole pixels are visited in order of arrival time T, the solution of
|grad T| = 1 grown from the hole boundary with the upwind pairwise update.
Each visited pixel becomes a weighted average of nearby pixels whose values
are already defined, where the weight is the product of three factors:
alignment of the neighbor direction with grad T (propagates isophotes),
inverse squared distance, and closeness in level-set value. To give the
level-set factor meaning just outside the hole, arrival times are first
marched a short way into the known region and stored negated.

Determinism: heap ties break on row-major pixel index, so identical inputs
give bit-identical outputs on both kernel paths.

Pixel states: KNOWN = finalized by the march (a distance source), BAND = in
the heap, INSIDE = still unknown, OUTSIDE = known image data that the march
never consumes as a distance source.
"""

import math

import numpy as np

from .accel import jit
from .errors import AllUnknownError, DimsMismatchError
from .image import ImageBuffer, Mask

KNOWN = 0
BAND = 1
INSIDE = 2
OUTSIDE = 3

_FAR = 1.0e6
DEFAULT_RADIUS = 5


@jit
def _heap_less(t_a, i_a, t_b, i_b):
    return t_a < t_b or (t_a == t_b and i_a < i_b)


@jit
def _heap_push(heap_t, heap_i, n, t, idx):
    if n == heap_t.shape[0]:
        grown_t = np.empty(2 * n, np.float64)
        grown_i = np.empty(2 * n, np.int64)
        for k in range(n):
            grown_t[k] = heap_t[k]
            grown_i[k] = heap_i[k]
        heap_t = grown_t
        heap_i = grown_i
    heap_t[n] = t
    heap_i[n] = idx
    j = n
    n += 1
    while j > 0:
        parent = (j - 1) // 2
        if _heap_less(heap_t[j], heap_i[j], heap_t[parent], heap_i[parent]):
            heap_t[j], heap_t[parent] = heap_t[parent], heap_t[j]
            heap_i[j], heap_i[parent] = heap_i[parent], heap_i[j]
            j = parent
        else:
            break
    return heap_t, heap_i, n


@jit
def _heap_pop(heap_t, heap_i, n):
    t = heap_t[0]
    idx = heap_i[0]
    n -= 1
    heap_t[0] = heap_t[n]
    heap_i[0] = heap_i[n]
    j = 0
    while True:
        left = 2 * j + 1
        right = left + 1
        smallest = j
        if left < n and _heap_less(heap_t[left], heap_i[left], heap_t[smallest], heap_i[smallest]):
            smallest = left
        if right < n and _heap_less(heap_t[right], heap_i[right], heap_t[smallest], heap_i[smallest]):
            smallest = right
        if smallest == j:
            break
        heap_t[j], heap_t[smallest] = heap_t[smallest], heap_t[j]
        heap_i[j], heap_i[smallest] = heap_i[smallest], heap_i[j]
        j = smallest
    return t, idx, n


@jit
def _solve(t_map, flags, x1, y1, x2, y2):
    # Upwind pairwise update from one horizontal and one vertical neighbor;
    # only finalized (KNOWN) pixels act as sources.
    h, w = flags.shape
    if x1 < 0 or x1 >= w or y1 < 0 or y1 >= h:
        if x2 < 0 or x2 >= w or y2 < 0 or y2 >= h:
            return _FAR
        if flags[y2, x2] == KNOWN:
            return 1.0 + t_map[y2, x2]
        return _FAR
    if x2 < 0 or x2 >= w or y2 < 0 or y2 >= h:
        if flags[y1, x1] == KNOWN:
            return 1.0 + t_map[y1, x1]
        return _FAR
    f1 = flags[y1, x1]
    f2 = flags[y2, x2]
    if f1 == KNOWN and f2 == KNOWN:
        t1 = t_map[y1, x1]
        t2 = t_map[y2, x2]
        d = 2.0 - (t1 - t2) * (t1 - t2)
        if d > 0.0:
            r = math.sqrt(d)
            s = (t1 + t2 - r) * 0.5
            if s >= t1 and s >= t2:
                return s
            s += r
            if s >= t1 and s >= t2:
                return s
        return _FAR
    if f1 == KNOWN:
        return 1.0 + t_map[y1, x1]
    if f2 == KNOWN:
        return 1.0 + t_map[y2, x2]
    return _FAR


@jit
def _relax(t_map, flags, x, y):
    s1 = _solve(t_map, flags, x - 1, y, x, y - 1)
    s2 = _solve(t_map, flags, x + 1, y, x, y - 1)
    s3 = _solve(t_map, flags, x - 1, y, x, y + 1)
    s4 = _solve(t_map, flags, x + 1, y, x, y + 1)
    best = s1
    if s2 < best:
        best = s2
    if s3 < best:
        best = s3
    if s4 < best:
        best = s4
    return best


@jit
def _march(t_map, flags, heap_t, heap_i, n, limit, order_t):
    """Grow T over INSIDE pixels until the heap drains or T exceeds limit.

    Returns the number of finalized pixels; their pop-order T values are
    written to order_t for order auditing.
    """
    h, w = flags.shape
    finalized = 0
    while n > 0:
        t, idx, n = _heap_pop(heap_t, heap_i, n)
        y = idx // w
        x = idx - y * w
        if flags[y, x] == KNOWN:
            continue  # stale heap entry
        if t > limit:
            break
        flags[y, x] = KNOWN
        order_t[finalized] = t
        finalized += 1
        for k in range(4):
            if k == 0:
                qx, qy = x - 1, y
            elif k == 1:
                qx, qy = x + 1, y
            elif k == 2:
                qx, qy = x, y - 1
            else:
                qx, qy = x, y + 1
            if qx < 0 or qx >= w or qy < 0 or qy >= h:
                continue
            fq = flags[qy, qx]
            if fq != INSIDE and fq != BAND:
                continue
            cand = _relax(t_map, flags, qx, qy)
            if cand < t_map[qy, qx]:
                t_map[qy, qx] = cand
                heap_t, heap_i, n = _heap_push(heap_t, heap_i, n, cand, qy * w + qx)
            if fq == INSIDE:
                flags[qy, qx] = BAND
    return finalized


@jit
def _grad_t(t_map, flags, x, y):
    # Central difference where both axis neighbors have defined T, one-sided
    # where one does, zero where neither: degrades gracefully to isotropic.
    h, w = flags.shape
    t0 = t_map[y, x]
    gx = 0.0
    left_ok = x - 1 >= 0 and flags[y, x - 1] != INSIDE
    right_ok = x + 1 < w and flags[y, x + 1] != INSIDE
    if left_ok and right_ok:
        gx = (t_map[y, x + 1] - t_map[y, x - 1]) * 0.5
    elif left_ok:
        gx = t0 - t_map[y, x - 1]
    elif right_ok:
        gx = t_map[y, x + 1] - t0
    gy = 0.0
    up_ok = y - 1 >= 0 and flags[y - 1, x] != INSIDE
    down_ok = y + 1 < h and flags[y + 1, x] != INSIDE
    if up_ok and down_ok:
        gy = (t_map[y + 1, x] - t_map[y - 1, x]) * 0.5
    elif up_ok:
        gy = t0 - t_map[y - 1, x]
    elif down_ok:
        gy = t_map[y + 1, x] - t0
    return gx, gy


@jit
def _paint(pixels, t_map, flags, x, y, radius):
    h, w, c = pixels.shape
    gx, gy = _grad_t(t_map, flags, x, y)
    t0 = t_map[y, x]
    acc = np.zeros(c, np.float64)
    wsum = 0.0
    for qy in range(y - radius, y + radius + 1):
        if qy < 0 or qy >= h:
            continue
        for qx in range(x - radius, x + radius + 1):
            if qx < 0 or qx >= w:
                continue
            if flags[qy, qx] == INSIDE:
                continue
            rx = float(x - qx)
            ry = float(y - qy)
            len2 = rx * rx + ry * ry
            length = math.sqrt(len2)
            direction = abs(rx * gx + ry * gy) / length
            if direction < 1e-6:
                direction = 1e-6  # weight floor; keeps the sum positive
            dst = 1.0 / len2
            lev = 1.0 / (1.0 + abs(t_map[qy, qx] - t0))
            wgt = direction * dst * lev
            for ch in range(c):
                acc[ch] += wgt * pixels[qy, qx, ch]
            wsum += wgt
    for ch in range(c):
        pixels[y, x, ch] = np.float32(acc[ch] / wsum)


@jit
def _fill(pixels, t_map, flags, heap_t, heap_i, n, radius):
    h, w = flags.shape
    while n > 0:
        t, idx, n = _heap_pop(heap_t, heap_i, n)
        y = idx // w
        x = idx - y * w
        if flags[y, x] == KNOWN:
            continue
        flags[y, x] = KNOWN
        for k in range(4):
            if k == 0:
                qx, qy = x - 1, y
            elif k == 1:
                qx, qy = x + 1, y
            elif k == 2:
                qx, qy = x, y - 1
            else:
                qx, qy = x, y + 1
            if qx < 0 or qx >= w or qy < 0 or qy >= h:
                continue
            fq = flags[qy, qx]
            if fq != INSIDE and fq != BAND:
                continue
            cand = _relax(t_map, flags, qx, qy)
            improved = cand < t_map[qy, qx]
            if improved:
                t_map[qy, qx] = cand
            if fq == INSIDE:
                _paint(pixels, t_map, flags, qx, qy, radius)
                flags[qy, qx] = BAND
            if improved:
                heap_t, heap_i, n = _heap_push(heap_t, heap_i, n, cand, qy * w + qx)


def _band_pixels(bits: np.ndarray) -> np.ndarray:
    """Known pixels 4-adjacent to an unknown pixel (the initial front)."""
    h, w = bits.shape
    near = np.zeros_like(bits)
    near[:-1, :] |= bits[1:, :]
    near[1:, :] |= bits[:-1, :]
    near[:, :-1] |= bits[:, 1:]
    near[:, 1:] |= bits[:, :-1]
    return near & ~bits


def _init_state(bits: np.ndarray, inside: np.ndarray, band: np.ndarray):
    """Flags, T, and heap arrays for a march over ``inside`` seeded at ``band``."""
    h, w = bits.shape
    flags = np.full((h, w), OUTSIDE, np.int8)
    flags[inside] = INSIDE
    flags[band] = BAND
    t_map = np.zeros((h, w), np.float64)
    t_map[inside] = _FAR
    seeds = np.flatnonzero(band.ravel()).astype(np.int64)
    cap = max(16, 2 * seeds.size + 64)
    heap_t = np.zeros(cap, np.float64)
    heap_i = np.zeros(cap, np.int64)
    n = seeds.size
    heap_i[:n] = seeds  # all T=0; row-major order keeps the heap layout fixed
    return flags, t_map, heap_t, heap_i, n


def _check_dims(img: ImageBuffer, mask: Mask):
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimsMismatchError(
            f"image is {img.width}x{img.height} but mask is {mask.width}x{mask.height}"
        )


def march_distance(mask: Mask, _order_out: list | None = None) -> np.ndarray:
    """Arrival-time map of the mask: 0 on known pixels, |grad T|=1 inside.

    ``_order_out``, when given, receives the pop-order T sequence (test hook).
    """
    bits = mask.bits
    if bits.all():
        raise AllUnknownError("mask covers the whole image")
    band = _band_pixels(bits)
    flags, t_map, heap_t, heap_i, n = _init_state(bits, bits, band)
    order_t = np.empty(bits.size, np.float64)
    finalized = _march(t_map, flags, heap_t, heap_i, n, _FAR, order_t)
    if _order_out is not None:
        _order_out.append(order_t[:finalized].copy())
    t_map[flags == OUTSIDE] = 0.0
    return t_map


def _outside_times(bits: np.ndarray, band: np.ndarray, radius: int) -> np.ndarray:
    """Negated distances into the known region, marched out to ~2*radius."""
    inside = ~bits & ~band
    flags, t_map, heap_t, heap_i, n = _init_state(bits, inside, band)
    limit = 2.0 * radius + 2.0
    order_t = np.empty(bits.size, np.float64)
    _march(t_map, flags, heap_t, heap_i, n, limit, order_t)
    out = np.where(flags == KNOWN, -t_map, -limit)
    out[band] = 0.0
    return out


def inpaint_telea(img: ImageBuffer, mask: Mask, radius: int = DEFAULT_RADIUS) -> ImageBuffer:
    """Fill masked pixels by fast-marching inpainting; others pass through."""
    _check_dims(img, mask)
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    bits = mask.bits
    if not bits.any():
        return img.copy()
    if bits.all():
        raise AllUnknownError("mask covers the whole image")

    band = _band_pixels(bits)
    t_map = _outside_times(bits, band, radius)
    t_map[bits] = _FAR

    h, w = bits.shape
    flags = np.full((h, w), OUTSIDE, np.int8)
    flags[bits] = INSIDE
    flags[band] = BAND
    seeds = np.flatnonzero(band.ravel()).astype(np.int64)
    cap = max(16, 2 * seeds.size + 64)
    heap_t = np.zeros(cap, np.float64)
    heap_i = np.zeros(cap, np.int64)
    heap_i[: seeds.size] = seeds
    t_map[band] = 0.0

    pixels = img.pixels.copy()
    _fill(pixels, t_map, flags, heap_t, heap_i, seeds.size, radius)
    return ImageBuffer(np.clip(pixels, 0.0, 1.0))
