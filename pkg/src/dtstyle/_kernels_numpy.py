"""Vectorized numpy implementations of the hot kernels.

This is the fallback backend; `_kernels_numba` mirrors every signature.
All arrays are float64 unless stated otherwise.
"""

import numpy as np


def conv3x3_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """3x3 correlation, stride 1, zero padding 1.

    x: (in_ch, h, w); kernel: (out_ch, in_ch, 3, 3); bias: (out_ch,).
    Accumulation order per output element is fixed: bias first, then the
    nine taps in (dy, dx) scan order, each tap summed over input channels.
    """
    c, h, w = x.shape
    out_ch = kernel.shape[0]
    padded = np.zeros((c, h + 2, w + 2), dtype=np.float64)
    padded[:, 1:-1, 1:-1] = x
    out = np.empty((out_ch, h, w), dtype=np.float64)
    out[:] = bias[:, None, None]
    for dy in range(3):
        for dx in range(3):
            out += np.tensordot(kernel[:, :, dy, dx], padded[:, dy:dy + h, dx:dx + w], axes=(1, 0))
    return out


def pool2x2_max_forward(x: np.ndarray):
    """Returns (pooled, argmax) where argmax holds the in-window offset
    0..3 in row-major window order; ties go to the first offset."""
    c, h, w = x.shape
    win = x.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, h // 2, w // 2, 4)
    arg = win.argmax(axis=3).astype(np.int8)
    out = np.take_along_axis(win, arg[..., None].astype(np.intp), axis=3)[..., 0]
    return np.ascontiguousarray(out), arg


def pool2x2_max_backward(grad: np.ndarray, arg: np.ndarray, h: int, w: int) -> np.ndarray:
    c, h2, w2 = grad.shape
    scat = np.zeros((c, h2, w2, 4), dtype=np.float64)
    np.put_along_axis(scat, arg[..., None].astype(np.intp), grad[..., None], axis=3)
    return np.ascontiguousarray(scat.reshape(c, h2, w2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, h, w))


def pool2x2_avg_forward(x: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    win = x.reshape(c, h // 2, 2, w // 2, 2)
    return (win[:, :, 0, :, 0] + win[:, :, 0, :, 1] + win[:, :, 1, :, 0] + win[:, :, 1, :, 1]) * 0.25


def pool2x2_avg_backward(grad: np.ndarray, h: int, w: int) -> np.ndarray:
    g = np.repeat(np.repeat(grad * 0.25, 2, axis=1), 2, axis=2)
    return np.ascontiguousarray(g)


def edt_sq(fg: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest foreground pixel.

    fg: (h, w) uint8, nonzero = foreground. Column scan gives per-column
    vertical distances, then a lower-envelope-of-parabolas pass along each
    row. All squared outputs are exact integers stored as float64.
    """
    h, w = fg.shape
    large = float(h + w)  # larger than any possible vertical pixel distance
    g = np.where(fg != 0, 0.0, large)
    for y in range(1, h):
        np.minimum(g[y], g[y - 1] + 1.0, out=g[y])
    for y in range(h - 2, -1, -1):
        np.minimum(g[y], g[y + 1] + 1.0, out=g[y])
    f = g * g
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        out[y] = _dt1d(f[y])
    return out


def _dt1d(f: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    d = np.empty(n, dtype=np.float64)
    v = np.empty(n, dtype=np.intp)
    z = np.empty(n + 1, dtype=np.float64)
    k = 0
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) ** 2 + f[v[k]]
    return d
