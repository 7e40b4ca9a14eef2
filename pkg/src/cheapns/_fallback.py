"""Pure numpy/scipy versions of the compiled kernels (same signatures)."""
import numpy as np
from scipy.signal import convolve2d


def _span(x):
    nz = np.flatnonzero(x)
    if nz.size == 0:
        return 0, -1
    return int(nz[0]), int(nz[-1])


def conv1d(f, g, nthreads=1):
    f = np.ascontiguousarray(f, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    n = f.shape[0]
    m = (n - 1) // 2
    out = np.zeros(n)
    flo, fhi = _span(f)
    glo, ghi = _span(g)
    if fhi < flo or ghi < glo:
        return out
    # full-convolution index of (flo, glo) is flo + glo; output bin j sits at j + m
    full = np.convolve(f[flo:fhi + 1], g[glo:ghi + 1])
    start = flo + glo - m
    j0 = max(start, 0)
    j1 = min(start + full.size, n)
    if j1 > j0:
        out[j0:j1] = full[j0 - start:j1 - start]
    return out


def autoconv1d(f, nthreads=1):
    return conv1d(f, f, nthreads)


def conv2d(f, g, nthreads=1):
    n = f.shape[0]
    m = (n - 1) // 2
    full = convolve2d(f, g, mode="full")
    return np.ascontiguousarray(full[m:m + n, m:m + n])
