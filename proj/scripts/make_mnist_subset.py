#!/usr/bin/env python3
"""Build a desk-scale MNIST subset in IDX format under data/mnist/.

Source: the `mnist` npm package (cazala/mnist), which ships 10,000 genuine
MNIST digits (1,000 per class) as JSON with pixel values stored as
round(byte/255, 3). That rounding is injective, so the original bytes are
recovered exactly.

Usage: npm install mnist && python3 scripts/make_mnist_subset.py [node_modules/mnist]

Output: 7,000 images (700 per class, first 700 of each class file) as
train-images/train-labels IDX files; the evaluation harness does its own
stratified train/test split.
"""
import json
import pathlib
import struct
import sys

PER_CLASS = 700
SIDE = 28


def main() -> None:
    pkg = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "node_modules/mnist")
    digits_dir = pkg / "src" / "digits"
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "data" / "mnist"
    out_dir.mkdir(parents=True, exist_ok=True)

    images = bytearray()
    labels = bytearray()
    count = 0
    for digit in range(10):
        data = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
        n = len(data) // (SIDE * SIDE)
        if n < PER_CLASS:
            raise SystemExit(f"digit {digit}: only {n} examples, need {PER_CLASS}")
        for i in range(PER_CLASS):
            px = data[i * SIDE * SIDE : (i + 1) * SIDE * SIDE]
            images.extend(round(v * 255) for v in px)
            labels.append(digit)
            count += 1

    img_path = out_dir / "train-images-idx3-ubyte"
    lab_path = out_dir / "train-labels-idx1-ubyte"
    with img_path.open("wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, SIDE, SIDE))
        f.write(bytes(images))
    with lab_path.open("wb") as f:
        f.write(struct.pack(">II", 0x00000801, count))
        f.write(bytes(labels))
    print(f"wrote {img_path} and {lab_path}: {count} images")


if __name__ == "__main__":
    main()
