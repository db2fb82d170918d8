#!/usr/bin/env python3
"""Regenerate the five-image pipeline fixture in tests/fixtures/{images,masks}.

Each image is a darker elliptical lesion on lighter skin with mild noise,
at a different size so resizing back to the original shape is exercised.
Masks are the ellipse, stored as <id>_segmentation.png with values {0,255}.

Usage: python3 tools/make_image_fixture.py [--out tests/fixtures]
"""

import argparse
import pathlib

import numpy as np
from PIL import Image

SEED = 1711
SIZES = [(160, 120), (200, 150), (96, 128), (130, 130), (180, 100)]


def lesion(rng, w, h):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = rng.uniform(0.35, 0.65) * w, rng.uniform(0.35, 0.65) * h
    rx, ry = rng.uniform(0.18, 0.3) * w, rng.uniform(0.18, 0.3) * h
    d = np.sqrt(((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2)
    t = 1.0 / (1.0 + np.exp(6.0 * (d - 1.0)))
    skin = np.array([205.0, 160.0, 140.0])
    dark = np.array([95.0, 62.0, 50.0])
    rgb = skin[None, None, :] * (1 - t[..., None]) + dark[None, None, :] * t[..., None]
    rgb += rng.normal(0.0, 5.0, size=rgb.shape)
    img = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    mask = np.where(d <= 1.0, 255, 0).astype(np.uint8)
    return img, mask


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    for i, (w, h) in enumerate(SIZES):
        img, mask = lesion(rng, w, h)
        name = f"ISIC_{i:07d}"
        Image.fromarray(img, "RGB").save(out / "images" / f"{name}.png")
        Image.fromarray(mask, "L").save(out / "masks" / f"{name}_segmentation.png")


if __name__ == "__main__":
    main()
