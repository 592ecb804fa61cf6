"""
Compiled inner loops for the CBC criteria.

Both criterion families reduce to the same shape: a cached product vector
theta over the points, a read-only weight table, and for every candidate a
cyclic walk through that table. Sums use Neumaier compensation.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def neumaier_sum(values):
    s = 0.0
    comp = 0.0
    for i in range(values.size):
        v = values[i]
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


@njit(cache=True, nogil=True)
def cyclic_candidate_sums(theta, table, g2, starts, steps, init):
    """
    out[c] = init + sum_n theta[n] * (1 + g2 * table[(starts[c] + n * steps[c]) mod L])

    with L = table.size and theta.size == L.
    """
    L = table.size
    out = np.empty(starts.size, dtype=np.float64)
    for c in range(starts.size):
        step = steps[c] % L
        idx = starts[c] % L
        s = init
        comp = 0.0
        for n in range(L):
            v = theta[n] * (1.0 + g2 * table[idx])
            t = s + v
            if abs(s) >= abs(v):
                comp += (s - t) + v
            else:
                comp += (v - t) + s
            s = t
            idx += step
            if idx >= L:
                idx -= L
        out[c] = s + comp
    return out


@njit(cache=True, nogil=True)
def cyclic_update(theta, table, g2, start, step):
    """theta[n] *= 1 + g2 * table[(start + n * step) mod L], in place."""
    L = table.size
    step = step % L
    idx = start % L
    for n in range(L):
        theta[n] = theta[n] * (1.0 + g2 * table[idx])
        idx += step
        if idx >= L:
            idx -= L
