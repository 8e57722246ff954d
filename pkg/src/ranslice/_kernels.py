"""Optional compiled kernels for the Adam hot path.

The wide output layer makes Adam's full-tensor sweeps the training
bottleneck. When numba and threadpoolctl are both importable these loops run
as fused parallel kernels with BLAS pinned to one thread for the duration of
training (the OpenMP and OpenBLAS thread pools thrash badly when both are
active); otherwise equivalent in-place numpy sequences run. Both backends
evaluate the same per-element expression tree with constants pre-cast to the
array dtype, so results are identical bit for bit and runs reproduce exactly
regardless of which backend is active.
"""

from __future__ import annotations

import contextlib
import warnings

import numpy as np

try:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from numba import njit, prange

    HAVE_NUMBA = True
    # An old system TBB makes numba fall back to another threading layer;
    # harmless here, so keep the advisory quiet.
    warnings.filterwarnings("ignore", message=".*TBB threading layer.*")
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

try:
    from threadpoolctl import threadpool_limits

    HAVE_THREADPOOLCTL = True
except ImportError:  # pragma: no cover
    HAVE_THREADPOOLCTL = False

USE_COMPILED = HAVE_NUMBA and HAVE_THREADPOOLCTL
_MIN_KERNEL_SIZE = 4096


def training_thread_context():
    """Pin BLAS pools to one thread while compiled kernels are in play."""
    if USE_COMPILED:
        return threadpool_limits(limits=1, user_api="blas")
    return contextlib.nullcontext()


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _dense_kernel(p, g, m, v, b1, omb1, b2, omb2, eps, lr_c1, c2):
        for i in prange(p.size):
            gi = g[i]
            mi = b1 * m[i] + omb1 * gi
            vi = b2 * v[i] + omb2 * (gi * gi)
            m[i] = mi
            v[i] = vi
            p[i] -= (mi / (np.sqrt(vi / c2) + eps)) * lr_c1

    @njit(parallel=True, cache=True)
    def _out_kernel(p, m, v, slot, col_grad_pad, b1, omb1, b2, omb2, eps, lr_c1, c2):
        fan, nout = p.shape
        for f in prange(fan):
            for a in range(nout):
                g = col_grad_pad[slot[a], f]
                mi = b1 * m[f, a] + omb1 * g
                vi = b2 * v[f, a] + omb2 * (g * g)
                m[f, a] = mi
                v[f, a] = vi
                p[f, a] -= (mi / (np.sqrt(vi / c2) + eps)) * lr_c1


def adam_apply(p, m, v, scratch, eps, lr_over_c1, c2):
    """Parameter update given already-updated moments."""
    np.divide(v, c2, out=scratch)
    np.sqrt(scratch, out=scratch)
    scratch += eps
    np.divide(m, scratch, out=scratch)
    scratch *= lr_over_c1
    p -= scratch


def adam_dense(p: np.ndarray, g: np.ndarray, m: np.ndarray, v: np.ndarray,
               scratch: np.ndarray, beta1: float, beta2: float, eps: float,
               lr_over_c1: float, c2: float) -> None:
    """Standard Adam step for one tensor with a dense gradient."""
    if USE_COMPILED and p.size >= _MIN_KERNEL_SIZE:
        dt = p.dtype.type
        _dense_kernel(p.reshape(-1), np.ascontiguousarray(g).reshape(-1),
                      m.reshape(-1), v.reshape(-1),
                      dt(beta1), dt(1.0 - beta1), dt(beta2), dt(1.0 - beta2),
                      dt(eps), dt(lr_over_c1), dt(c2))
    else:
        np.multiply(g, 1.0 - beta1, out=scratch)
        m *= beta1
        m += scratch
        np.multiply(g, g, out=scratch)
        scratch *= 1.0 - beta2
        v *= beta2
        v += scratch
        adam_apply(p, m, v, scratch, eps, lr_over_c1, c2)


def adam_columns(p: np.ndarray, cols: np.ndarray, col_grad: np.ndarray,
                 m: np.ndarray, v: np.ndarray, scratch: np.ndarray,
                 beta1: float, beta2: float, eps: float,
                 lr_over_c1: float, c2: float) -> None:
    """Standard Adam step for a matrix whose gradient is nonzero only in the
    given columns (col_grad holds one accumulated row per column).

    Arithmetic matches adam_dense with the corresponding mostly-zero dense
    gradient: decayed moments gain exactly zero outside the columns.
    """
    if USE_COMPILED and p.size >= _MIN_KERNEL_SIZE:
        dt = p.dtype.type
        nout = p.shape[1]
        slot = np.full(nout, len(cols), dtype=np.int64)
        slot[cols] = np.arange(len(cols))
        padded = np.vstack([col_grad, np.zeros((1, p.shape[0]), dtype=p.dtype)])
        _out_kernel(p, m, v, slot, padded,
                    dt(beta1), dt(1.0 - beta1), dt(beta2), dt(1.0 - beta2),
                    dt(eps), dt(lr_over_c1), dt(c2))
    else:
        m *= beta1
        m[:, cols] += (1.0 - beta1) * col_grad.T
        v *= beta2
        v[:, cols] += (1.0 - beta2) * col_grad.T**2
        adam_apply(p, m, v, scratch, eps, lr_over_c1, c2)
