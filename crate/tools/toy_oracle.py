"""Stage-by-stage values of the MVSIHE pipeline for the 8-level toy image.

Independent of the Rust code: exact rationals for the thresholds, mpmath at 50 digits for
the tanh/CDF stages. Prints the tables frozen into the Rust tests.
"""
from fractions import Fraction
import math
import mpmath as mp

mp.mp.dps = 50
pixels = [20, 40, 40, 40, 60, 60, 90, 130, 130, 130, 130, 170, 170, 200, 230, 230]
counts = [0] * 256
for v in pixels:
    counts[v] += 1


def split(lo, hi):
    """argmax_k of the between-class variance over [lo, hi], smallest k on ties."""
    n = sum(counts[lo:hi + 1])
    s = sum(i * counts[i] for i in range(lo, hi + 1))
    mu = Fraction(s, n)
    best, best_k = None, lo
    for k in range(lo, hi):
        n0 = sum(counts[lo:k + 1]); s0 = sum(i * counts[i] for i in range(lo, k + 1))
        n1, s1 = n - n0, s - s0
        var = Fraction(0)
        if n0:
            var += Fraction(n0, n) * (Fraction(s0, n0) - mu) ** 2
        if n1:
            var += Fraction(n1, n) * (Fraction(s1, n1) - mu) ** 2
        if best is None or var > best:
            best, best_k = var, k
    return best_k


def rhu(x):
    return int(mp.floor(x + mp.mpf('0.5')))


k2 = split(0, 255)
k1 = split(0, k2)
k3 = split(k2 + 1, 255)
print("partition", (k1, k2, k3))

mapping = list(range(256))
for lo, hi in [(0, k1), (k1 + 1, k2), (k2 + 1, k3), (k3 + 1, 255)]:
    n = sum(counts[lo:hi + 1])
    if n == 0:
        continue
    mod = [mp.tanh(mp.mpf(counts[i]) / n) for i in range(lo, hi + 1)]
    cdf = []
    acc = mp.mpf(0)
    for m in mod:
        acc += m
        cdf.append(acc)
    for off, c in enumerate(cdf):
        mapping[lo + off] = rhu(lo + (hi - lo) * c / cdf[-1])

levels = sorted(set(pixels))
print("map", [(v, mapping[v]) for v in levels])
eq = [mapping[v] for v in pixels]
lo, hi = min(eq), max(eq)
norm = [rhu(mp.mpf(x - lo) / (hi - lo) * 255) for x in eq]
print("normalized", norm)
d = mp.mpf('0.6')
fused = [max(0, min(255, rhu(d * a + (1 - d) * b))) for a, b in zip(norm, pixels)]
print("fused(0.6)", fused)
