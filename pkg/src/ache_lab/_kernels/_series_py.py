"""Pure-Python (NumPy) kernels for truncated power-series arithmetic.

Same contracts as the compiled `_series_cy` module; used as the import-time
fallback when the extension is unavailable, and as the reference side of the
kernel benchmark.
"""

import numpy as np


def conv(a, b, nout):
    """Truncated Cauchy product: out[k] = sum_{i+j=k} a[i]*b[j], k < nout."""
    full = np.convolve(a, b)
    out = np.zeros(nout, dtype=np.complex128)
    n = min(nout, full.shape[0])
    out[:n] = full[:n]
    return out


def inv_unit(f, nout):
    """Multiplicative inverse of a series with f[0] != 0, to nout terms."""
    out = np.zeros(nout, dtype=np.complex128)
    f0 = f[0]
    out[0] = 1.0 / f0
    nf = f.shape[0]
    for n in range(1, nout):
        jmax = min(n + 1, nf)
        acc = np.dot(f[1:jmax], out[n - jmax + 1 : n][::-1]) if jmax > 1 else 0.0
        out[n] = -acc / f0
    return out


def sqrt_unit(f, nout):
    """Square root of a series with f[0] != 0 (principal branch on f[0])."""
    out = np.zeros(nout, dtype=np.complex128)
    s0 = np.sqrt(complex(f[0]))
    out[0] = s0
    nf = f.shape[0]
    for n in range(1, nout):
        fn = f[n] if n < nf else 0.0
        acc = np.dot(out[1:n], out[n - 1 : 0 : -1]) if n > 1 else 0.0
        out[n] = (fn - acc) / (2 * s0)
    return out
