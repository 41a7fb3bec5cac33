"""Slow, loop-based reference implementations used to cross-check the library."""

import math

import numpy as np


def psnr_direct(a, b):
    total = 0.0
    n = 0
    for x, y in zip(np.ravel(a), np.ravel(b)):
        total += (float(x) - float(y)) ** 2
        n += 1
    mse = total / n
    return 100.0 if mse < 1e-10 else min(100.0, 10 * math.log10(1.0 / mse))


def _window(size=11, sigma=1.5):
    c = (size - 1) / 2
    w = [[math.exp(-((i - c) ** 2 + (j - c) ** 2) / (2 * sigma**2)) for j in range(size)] for i in range(size)]
    s = sum(map(sum, w))
    return [[v / s for v in row] for row in w]


def ssim_direct(a, b, size=11):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    c1, c2 = 0.01**2, 0.03**2
    w = _window(size)
    h, wd, ch = a.shape
    per_channel = []
    for c in range(ch):
        acc, count = 0.0, 0
        for y0 in range(h - size + 1):
            for x0 in range(wd - size + 1):
                mx = my = sxx = syy = sxy = 0.0
                for i in range(size):
                    for j in range(size):
                        x = a[y0 + i, x0 + j, c]
                        y = b[y0 + i, x0 + j, c]
                        mx += w[i][j] * x
                        my += w[i][j] * y
                        sxx += w[i][j] * x * x
                        syy += w[i][j] * y * y
                        sxy += w[i][j] * x * y
                vx, vy, cov = sxx - mx * mx, syy - my * my, sxy - mx * my
                acc += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
                count += 1
        per_channel.append(acc / count)
    return sum(per_channel) / len(per_channel)
