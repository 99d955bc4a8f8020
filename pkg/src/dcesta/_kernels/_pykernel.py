"""Pure-numpy propagation kernel (fallback for the compiled one)."""

import numpy as np


def _banded_matmul(g, x, bw, out):
    d = x.shape[0]
    out[:] = 0
    for b in range(2 * bw + 1):
        off = b - bw
        lo, hi = max(0, -off), min(d, d - off)
        if lo < hi:
            out[lo:hi] += g[b, lo:hi, None] * x[lo + off:hi + off]
    return out


def propagate_banded(bands, weights, state, record, tol=1e-17, max_terms=80):
    """Apply ``exp(-i G_k)`` for each step ``k`` to a block of states.

    ``bands`` has shape ``(M, 2*bw+1, d)`` with ``bands[m, b, i] = B_m[i, i+b-bw]``;
    ``G_k = sum_m weights[k, m] B_m``.  The block ``state`` is ``(d, ncol)``.
    After every step with ``record[k]`` set, a copy of the block is stored.
    Returns ``(n_recorded, d, ncol)``.
    """
    bands = np.ascontiguousarray(bands, dtype=complex)
    weights = np.ascontiguousarray(weights, dtype=float)
    x = np.array(state, dtype=complex, order="C")
    record = np.asarray(record, dtype=bool)
    nb, d = bands.shape[1], bands.shape[2]
    bw = (nb - 1) // 2
    out = np.empty((int(record.sum()), d, x.shape[1]), complex)
    y = np.empty_like(x)
    r = 0
    for k in range(weights.shape[0]):
        g = np.tensordot(weights[k], bands, axes=1)
        if bw == 0:
            x *= np.exp(-1j * g[0].real)[:, None]
        else:
            nu = np.max(np.abs(g).sum(axis=0))
            s = max(1, int(np.ceil(nu / 2.0)))
            scale = -1j / s
            for _ in range(s):
                xmax = np.max(np.abs(x))
                term = x.copy()
                acc = x.copy()
                for j in range(1, max_terms + 1):
                    _banded_matmul(g, term, bw, y)
                    term, y = y * (scale / j), term
                    acc += term
                    if np.max(np.abs(term)) <= tol * xmax:
                        break
                x = acc
        if record[k]:
            out[r] = x
            r += 1
    return out
