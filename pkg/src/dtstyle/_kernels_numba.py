"""Numba-jitted hot kernels. Only imported when the numba backend is active.

Signatures mirror `_kernels_numpy` exactly. Per-element accumulation order
is fixed (channels, then taps in scan order) so results are bitwise
reproducible across runs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv3x3_forward(x, kernel, bias):
    c_in, h, w = x.shape
    c_out = kernel.shape[0]
    out = np.empty((c_out, h, w), dtype=np.float64)
    for o in range(c_out):
        for y in range(h):
            for xx in range(w):
                acc = bias[o]
                for c in range(c_in):
                    for dy in range(3):
                        iy = y + dy - 1
                        if iy < 0 or iy >= h:
                            continue
                        for dx in range(3):
                            ix = xx + dx - 1
                            if ix < 0 or ix >= w:
                                continue
                            acc += x[c, iy, ix] * kernel[o, c, dy, dx]
                out[o, y, xx] = acc
    return out


@njit(cache=True)
def pool2x2_max_forward(x):
    c, h, w = x.shape
    h2 = h // 2
    w2 = w // 2
    out = np.empty((c, h2, w2), dtype=np.float64)
    arg = np.empty((c, h2, w2), dtype=np.int8)
    for ch in range(c):
        for y in range(h2):
            for xx in range(w2):
                best = x[ch, 2 * y, 2 * xx]
                best_off = 0
                for a in range(2):
                    for b in range(2):
                        v = x[ch, 2 * y + a, 2 * xx + b]
                        if v > best:
                            best = v
                            best_off = 2 * a + b
                out[ch, y, xx] = best
                arg[ch, y, xx] = best_off
    return out, arg


@njit(cache=True)
def pool2x2_max_backward(grad, arg, h, w):
    c, h2, w2 = grad.shape
    out = np.zeros((c, h, w), dtype=np.float64)
    for ch in range(c):
        for y in range(h2):
            for xx in range(w2):
                off = arg[ch, y, xx]
                out[ch, 2 * y + off // 2, 2 * xx + off % 2] = grad[ch, y, xx]
    return out


@njit(cache=True)
def pool2x2_avg_forward(x):
    c, h, w = x.shape
    h2 = h // 2
    w2 = w // 2
    out = np.empty((c, h2, w2), dtype=np.float64)
    for ch in range(c):
        for y in range(h2):
            for xx in range(w2):
                out[ch, y, xx] = (x[ch, 2 * y, 2 * xx] + x[ch, 2 * y, 2 * xx + 1]
                                  + x[ch, 2 * y + 1, 2 * xx] + x[ch, 2 * y + 1, 2 * xx + 1]) * 0.25
    return out


@njit(cache=True)
def pool2x2_avg_backward(grad, h, w):
    c, h2, w2 = grad.shape
    out = np.empty((c, h, w), dtype=np.float64)
    for ch in range(c):
        for y in range(h2):
            for xx in range(w2):
                g = grad[ch, y, xx] * 0.25
                out[ch, 2 * y, 2 * xx] = g
                out[ch, 2 * y, 2 * xx + 1] = g
                out[ch, 2 * y + 1, 2 * xx] = g
                out[ch, 2 * y + 1, 2 * xx + 1] = g
    return out


@njit(cache=True)
def edt_sq(fg):
    h, w = fg.shape
    large = float(h + w)
    g = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            g[y, x] = 0.0 if fg[y, x] != 0 else large
    for y in range(1, h):
        for x in range(w):
            cand = g[y - 1, x] + 1.0
            if cand < g[y, x]:
                g[y, x] = cand
    for y in range(h - 2, -1, -1):
        for x in range(w):
            cand = g[y + 1, x] + 1.0
            if cand < g[y, x]:
                g[y, x] = cand

    out = np.empty((h, w), dtype=np.float64)
    v = np.empty(w, dtype=np.intp)
    z = np.empty(w + 1, dtype=np.float64)
    for y in range(h):
        k = 0
        v[0] = 0
        z[0] = -np.inf
        z[1] = np.inf
        for q in range(1, w):
            fq = g[y, q] * g[y, q]
            fv = g[y, v[k]] * g[y, v[k]]
            s = ((fq + q * q) - (fv + v[k] * v[k])) / (2.0 * (q - v[k]))
            while s <= z[k]:
                k -= 1
                fv = g[y, v[k]] * g[y, v[k]]
                s = ((fq + q * q) - (fv + v[k] * v[k])) / (2.0 * (q - v[k]))
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = np.inf
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            dv = float(q - v[k])
            out[y, q] = dv * dv + g[y, v[k]] * g[y, v[k]]
    return out
