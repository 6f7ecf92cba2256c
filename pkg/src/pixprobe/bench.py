"""Latency benchmarks for the hot operations.

Two suites:

* ``compare`` runs each kernel on small inputs through both the compiled
  and the interpreted path (the counterpart executes in a subprocess with
  PIXPROBE_NUMBA flipped, since the path is fixed at import).
* ``budget`` times the operations at their interactive working sizes against
  soft latency targets; misses are reported, never fatal.

Deterministic inputs throughout, so repeated runs measure the same work.
"""

import json
import math
import os
import statistics
import subprocess
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import accel
from .image import ImageBuffer, Mask, _resize_array
from .model import classify
from .patchmatch import PatchMatchParams, inpaint_patchmatch
from .squeezenet import random_model
from .telea import inpaint_telea, march_distance

BUDGETS_MS = {"classify": 150.0, "telea": 200.0, "patchmatch": 3000.0}


@dataclass
class BenchRow:
    name: str
    size: str
    path: str
    reps: int
    median_ms: float
    p95_ms: float
    budget_ms: float | None = None
    within_budget: bool | None = None


def _disk_mask(side: int, area_fraction: float) -> Mask:
    yy, xx = np.mgrid[0:side, 0:side]
    radius = math.sqrt(area_fraction * side * side / math.pi)
    c = side / 2.0
    return Mask((yy - c) ** 2 + (xx - c) ** 2 < radius**2)


def _test_image(side: int, seed: int = 0) -> ImageBuffer:
    rng = np.random.default_rng(seed)
    base = rng.random((max(side // 8, 8), max(side // 8, 8), 3), dtype=np.float32)
    return ImageBuffer(_resize_array(base, side, side))


def _time(fn, reps: int) -> tuple[float, float]:
    fn()  # warm caches / jit
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    samples.sort()
    median = statistics.median(samples)
    p95 = samples[min(len(samples) - 1, math.ceil(0.95 * len(samples)) - 1)]
    return median, p95


def _kernel_cases(scale: str) -> dict:
    if scale == "small":
        side, area = 128, 0.08
        pm_side = 64
    else:
        side, area = 512, 0.10
        pm_side = 512
    img = _test_image(side)
    mask = _disk_mask(side, area)
    pm_img = _test_image(pm_side, seed=1)
    pm_mask = _disk_mask(pm_side, 0.10)
    return {
        "telea": (f"{side}x{side}/10%area" if scale != "small" else f"{side}x{side}/8%area",
                  lambda: inpaint_telea(img, mask)),
        "march": (f"{side}x{side}", lambda: march_distance(mask)),
        "patchmatch": (f"{pm_side}x{pm_side}/10%area",
                       lambda: inpaint_patchmatch(pm_img, pm_mask, PatchMatchParams(rng_seed=7))),
    }


def run_kernels(scale: str = "small", reps: int = 3) -> list[BenchRow]:
    rows = []
    for name, (size, fn) in _kernel_cases(scale).items():
        median, p95 = _time(fn, reps)
        rows.append(BenchRow(name, size, accel.active_path(), reps, median, p95))
    return rows


def run_compare(reps: int = 3) -> list[BenchRow]:
    """Small-size kernel timings on this path plus the flipped path."""
    rows = run_kernels("small", reps)
    other = "0" if accel.NUMBA_ENABLED else "1"
    env = dict(os.environ, **{accel.ENV_FLAG: other})
    proc = subprocess.run(
        [sys.executable, "-m", "pixprobe.bench", "--worker", "small", "--reps", str(reps)],
        env=env,
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"benchmark subprocess failed:\n{proc.stderr}")
    rows += [BenchRow(**row) for row in json.loads(proc.stdout)]
    return rows


def run_budget(reps: int = 3, classes: int = 1000, input_size: int = 224) -> list[BenchRow]:
    """Interactive-size latencies against the soft budgets."""
    rows = []
    graph = random_model(num_classes=classes, input_size=input_size, seed=3)
    img_cls = _test_image(input_size, seed=2)
    median, p95 = _time(lambda: classify(graph, img_cls), reps)
    rows.append(BenchRow("classify", f"{input_size}x{input_size}", accel.active_path(),
                         reps, median, p95, BUDGETS_MS["classify"],
                         median <= BUDGETS_MS["classify"]))

    img = _test_image(512, seed=4)
    mask = _disk_mask(512, 0.10)
    median, p95 = _time(lambda: inpaint_telea(img, mask), reps)
    rows.append(BenchRow("telea", "512x512/10%area", accel.active_path(), reps, median, p95,
                         BUDGETS_MS["telea"], median <= BUDGETS_MS["telea"]))

    median, p95 = _time(
        lambda: inpaint_patchmatch(img, mask, PatchMatchParams(rng_seed=7)), max(1, reps - 1)
    )
    rows.append(BenchRow("patchmatch", "512x512/10%area", accel.active_path(),
                         max(1, reps - 1), median, p95, BUDGETS_MS["patchmatch"],
                         median <= BUDGETS_MS["patchmatch"]))
    return rows


def format_rows(rows: list[BenchRow]) -> str:
    header = f"{'op':<12} {'size':<18} {'path':<6} {'reps':>4} {'median_ms':>10} {'p95_ms':>10}  budget"
    lines = [header, "-" * len(header)]
    for r in rows:
        budget = ""
        if r.budget_ms is not None:
            budget = f"{r.budget_ms:.0f} ms -> {'ok' if r.within_budget else 'OVER'}"
        lines.append(
            f"{r.name:<12} {r.size:<18} {r.path:<6} {r.reps:>4} {r.median_ms:>10.1f} "
            f"{r.p95_ms:>10.1f}  {budget}"
        )
    return "\n".join(lines)


def main(argv=None):  # worker entry used by run_compare
    import argparse

    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", choices=["small", "budget"])
    parser.add_argument("--reps", type=int, default=3)
    args = parser.parse_args(argv)
    rows = run_kernels(args.worker or "small", args.reps)
    print(json.dumps([asdict(r) for r in rows]))


if __name__ == "__main__":  # pragma: no cover
    main()
