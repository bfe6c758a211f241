"""Compiled batch kernels; rows of ``X`` are heads of tail-0 vectors."""

import numpy as np
from numba import njit


@njit(cache=True)
def nonsym_batch(X):
    # Backward pass: tail_best = 0.5 * max_{t > i} (x+(t) + tail_best(t)).
    B, N = X.shape
    out = np.empty(B)
    for b in range(B):
        run = 0.0
        best = 0.0
        for i in range(N - 1, -1, -1):
            xi = X[b, i]
            v = 0.5 * run
            a = abs(xi) + v
            if a > best:
                best = a
            w = v
            if xi > 0.0:
                w += xi
            if w > run:
                run = w
        out[b] = best
    return out
