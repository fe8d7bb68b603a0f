"""Fits the small reference BRISQUE regressor bundled with the crate.

The training targets are synthetic: clean crops of data/corpus/train score low, and copies
degraded by Gaussian noise or blur score higher in proportion to the degradation. This is a
regression fixture, not a calibrated quality model.

Usage: python3 tools/train_reference_svr.py path/to/coot-mvsihe [out_model]
"""
import csv
import glob
import io as stdio
import os
import subprocess
import sys
import tempfile

import numpy as np
from skimage import filters, io
from sklearn.svm import SVR

HERE = os.path.dirname(os.path.abspath(__file__))
TRAIN = os.path.join(HERE, "..", "data", "corpus", "train")
OUT = os.path.join(HERE, "..", "crates", "core", "models", "brisque_reference.txt")

NOISE = {0: 10.0, 10: 35.0, 20: 55.0, 30: 75.0}
BLUR = {1.0: 40.0, 2.0: 65.0}
SEED = 20240607


def distortions(img, rng):
    for sigma, score in NOISE.items():
        noisy = img + rng.normal(0.0, sigma, img.shape) if sigma else img
        yield f"n{sigma}", np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8), score
    for sigma, score in BLUR.items():
        blurred = filters.gaussian(img, sigma=sigma, preserve_range=True)
        yield f"b{sigma}", np.clip(np.floor(blurred + 0.5), 0, 255).astype(np.uint8), score


def features(cli, paths):
    out = subprocess.run([cli, "brisque-features", *paths], check=True, capture_output=True, text=True).stdout
    rows = list(csv.reader(stdio.StringIO(out)))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def main():
    cli = sys.argv[1]
    out_path = sys.argv[2] if len(sys.argv) > 2 else OUT
    rng = np.random.default_rng(SEED)
    paths, targets = [], []
    with tempfile.TemporaryDirectory() as tmp:
        for src in sorted(glob.glob(os.path.join(TRAIN, "*.png"))):
            img = io.imread(src).astype(np.float64)
            stem = os.path.splitext(os.path.basename(src))[0]
            for tag, variant, score in distortions(img, rng):
                p = os.path.join(tmp, f"{stem}_{tag}.png")
                io.imsave(p, variant, check_contrast=False)
                paths.append(p)
                targets.append(score)
        x = features(cli, paths)
    y = np.array(targets)

    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    xs = np.where(hi > lo, -1.0 + 2.0 * (x - lo) / span, 0.0)

    gamma = 1.0 / x.shape[1]
    model = SVR(kernel="rbf", gamma=gamma, C=100.0, epsilon=2.0).fit(xs, y)
    fitted = model.predict(xs)
    print(f"{len(y)} samples, {len(model.support_)} support vectors, "
          f"rmse {np.sqrt(np.mean((fitted - y) ** 2)):.3f}", file=sys.stderr)

    with open(out_path, "w") as f:
        f.write("svrmodel v1\n")
        f.write("# reference regressor for regression tests; scores are not calibrated\n")
        f.write(f"gamma {gamma!r}\n")
        f.write(f"bias {float(model.intercept_[0])!r}\n")
        f.write("range 0 100\n")
        f.write("scale " + " ".join(f"{a!r} {b!r}" for a, b in zip(lo.tolist(), hi.tolist())) + "\n")
        for sv, coef in zip(model.support_vectors_, model.dual_coef_[0]):
            f.write(" ".join(repr(float(v)) for v in sv) + f" {float(coef)!r}\n")


if __name__ == "__main__":
    main()
