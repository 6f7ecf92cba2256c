"""Convert a torchvision SqueezeNet v1.1 checkpoint to the model directory
format (manifest.json + one .bin per tensor + labels.txt).

Usage:
    python tools/convert_squeezenet.py --weights squeezenet1_1.pth \
        --labels imagenet_labels.txt --out models/squeezenet

The weights file is a torchvision state dict (download once with
torchvision.models.squeezenet1_1(weights="DEFAULT") and torch.save its
state_dict). The labels file has one label per line, index = class id.
Requires torch; it is tooling, not a package dependency.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pixprobe.squeezenet import v1_1_manifest  # noqa: E402

# our tensor name -> torchvision state_dict key
_FIRE_IDX = {"fire2": 3, "fire3": 4, "fire4": 6, "fire5": 7,
             "fire6": 9, "fire7": 10, "fire8": 11, "fire9": 12}


def _state_key(name: str) -> str:
    if name.startswith("conv1."):
        return f"features.0.{name.split('.')[1]}"
    if name.startswith("conv10."):
        return f"classifier.1.{name.split('.')[1]}"
    fire, part, kind = name.split(".")
    return f"features.{_FIRE_IDX[fire]}.{part}.{kind}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--weights", required=True, help="torch state-dict .pth file")
    parser.add_argument("--labels", required=True, help="one label per line")
    parser.add_argument("--out", required=True, help="output model directory")
    parser.add_argument("--classes", type=int, default=1000)
    parser.add_argument("--input-size", type=int, default=224)
    args = parser.parse_args()

    import torch

    state = torch.load(args.weights, map_location="cpu", weights_only=True)
    manifest, tensors = v1_1_manifest(args.classes, args.input_size)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, shape in tensors.items():
        key = _state_key(name)
        if key not in state:
            raise SystemExit(f"state dict has no tensor {key!r} (for {name})")
        tensor = state[key].contiguous().numpy().astype("<f4")
        if tensor.shape != tuple(shape):
            raise SystemExit(f"{key}: shape {tensor.shape} != expected {tuple(shape)}")
        (out / f"{name}.bin").write_bytes(tensor.tobytes())

    labels = Path(args.labels).read_text().splitlines()
    if len(labels) < args.classes:
        raise SystemExit(f"labels file has {len(labels)} lines, need {args.classes}")
    manifest["labels_file"] = "labels.txt"
    (out / "labels.txt").write_text("\n".join(labels[: args.classes]) + "\n")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    print(f"wrote model to {out}")


if __name__ == "__main__":
    main()
