"""Numpy implementations of the cosine-basis kernels.

Used when the compiled extension is missing or ``BIASDENS_PURE_PYTHON=1``.
"""
import numpy as np

# bound on the temporary cos matrix (entries) built per chunk
_CHUNK_ENTRIES = 1 << 22


def cosine_moments(y, v, jmax):
    y = np.ascontiguousarray(y, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    out = np.empty(jmax + 1, dtype=np.float64)
    out[0] = v.sum()
    if jmax == 0:
        return out
    step = max(1, _CHUNK_ENTRIES // max(1, y.size))
    py = np.pi * y
    for start in range(1, jmax + 1, step):
        j = np.arange(start, min(jmax, start + step - 1) + 1, dtype=np.float64)
        out[start:start + j.size] = np.cos(np.outer(j, py)) @ v
    out[1:] *= np.sqrt(2.0)
    return out


def cosine_series(coeffs, x):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if coeffs.size == 0:
        return np.zeros_like(x)
    out = np.full(x.shape, coeffs[0])
    jmax = coeffs.size - 1
    if jmax == 0:
        return out
    acc = np.zeros_like(x)
    step = max(1, _CHUNK_ENTRIES // max(1, x.size))
    px = np.pi * x
    for start in range(1, jmax + 1, step):
        j = np.arange(start, min(jmax, start + step - 1) + 1, dtype=np.float64)
        acc += coeffs[start:start + j.size] @ np.cos(np.outer(j, px))
    return out + np.sqrt(2.0) * acc
