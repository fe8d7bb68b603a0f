"""Builds the grayscale test corpus under data/ from sample photographs shipped with
scikit-image, matplotlib and scikit-learn.

Every crop is converted with the integer BT.601 luma rule used by the Rust loader and
written as an 8-bit PNG.
"""
import os
import sys

import matplotlib
import numpy as np
import skimage
import sklearn
from skimage import io

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
SK = os.path.join(os.path.dirname(skimage.__file__), "data")
MPL = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "sample_data")
SKL = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "images")

SOURCES = {
    "astronaut": os.path.join(SK, "astronaut.png"),
    "brick": os.path.join(SK, "brick.png"),
    "camera": os.path.join(SK, "camera.png"),
    "chelsea": os.path.join(SK, "chelsea.png"),
    "coffee": os.path.join(SK, "coffee.png"),
    "coins": os.path.join(SK, "coins.png"),
    "grass": os.path.join(SK, "grass.png"),
    "gravel": os.path.join(SK, "gravel.png"),
    "moon": os.path.join(SK, "moon.png"),
    "motorcycle": os.path.join(SK, "motorcycle_left.png"),
    "rocket": os.path.join(SK, "rocket.jpg"),
    "hopper": os.path.join(MPL, "grace_hopper.jpg"),
    "china": os.path.join(SKL, "china.jpg"),
    "flower": os.path.join(SKL, "flower.jpg"),
}

SIZE = 256

# (source, x, y) top-left corners of SIZE x SIZE crops
# Natural photographs only; microscopy, fundus and deep-sky sources are left out because
# NIQE's pristine model assumes natural-scene statistics.
TRAIN = [
    ("astronaut", 0, 0), ("astronaut", 256, 0), ("astronaut", 0, 256),
    ("brick", 0, 0), ("brick", 256, 0), ("brick", 0, 256), ("brick", 256, 256),
    ("camera", 0, 0), ("camera", 256, 0), ("camera", 0, 256),
    ("coffee", 0, 0), ("coffee", 0, 144),
    ("coins", 0, 0), ("coins", 128, 47),
    ("grass", 0, 0), ("grass", 256, 0), ("grass", 256, 256),
    ("gravel", 0, 0), ("gravel", 0, 256), ("gravel", 256, 256),
    ("moon", 0, 0), ("moon", 256, 256),
    ("motorcycle", 0, 0), ("motorcycle", 485, 0), ("motorcycle", 485, 244),
    ("rocket", 256, 0), ("rocket", 384, 171),
    ("hopper", 0, 0), ("hopper", 256, 0), ("hopper", 0, 344),
]

# No test crop shares pixels with a training crop.
TEST = [
    ("china", 0, 0), ("china", 384, 171),
    ("flower", 0, 0), ("flower", 384, 171),
    ("chelsea", 0, 22),
    ("coffee", 344, 0),
    ("astronaut", 256, 256),
    ("camera", 256, 256),
    ("rocket", 0, 171),
    ("hopper", 256, 344),
]

SAMPLE = ("camera", 100, 60, 300)


def gray(path):
    im = io.imread(path)
    if im.ndim == 3:
        rgb = im[..., :3].astype(np.int64)
        im = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return im.astype(np.uint8)


def crop(name, x, y, size, cache):
    if name not in cache:
        cache[name] = gray(SOURCES[name])
    im = cache[name]
    out = im[y:y + size, x:x + size]
    if out.shape != (size, size):
        sys.exit(f"crop {name}@{x},{y} falls outside a {im.shape} image")
    return out


def overlaps(a, b):
    return a[0] == b[0] and abs(a[1] - b[1]) < SIZE and abs(a[2] - b[2]) < SIZE


def main():
    for t in TEST:
        clash = [c for c in TRAIN if overlaps(t, c)]
        if clash:
            sys.exit(f"test crop {t} overlaps training crops {clash}")
    cache = {}
    for sub, crops in (("train", TRAIN), ("test", TEST)):
        d = os.path.join(ROOT, "corpus", sub)
        os.makedirs(d, exist_ok=True)
        for old in os.listdir(d):
            os.remove(os.path.join(d, old))
        for i, (name, x, y) in enumerate(crops):
            io.imsave(os.path.join(d, f"{name}_{i:02d}.png"), crop(name, x, y, SIZE, cache), check_contrast=False)
    name, x, y, size = SAMPLE
    io.imsave(os.path.join(ROOT, "sample_300.png"), crop(name, x, y, size, cache), check_contrast=False)


if __name__ == "__main__":
    main()
