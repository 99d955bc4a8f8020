"""Time-stepping kernels.

The compiled Cython kernel is used when the extension was built; otherwise
the numpy implementation is selected at import.  Both share one contract,
see :func:`propagate_banded`.
"""

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

AVAILABLE = ("cython", "python") if _ckernel is not None else ("python",)
_backend = AVAILABLE[0]


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in AVAILABLE:
        raise ValueError(f"backend {name!r} not available; have {AVAILABLE}")
    _backend = name


def propagate_banded(bands, weights, state, record, tol=1e-17, max_terms=80):
    """Step a block of states through ``exp(-i G_k)`` for each row of ``weights``.

    Parameters
    ----------
    bands : complex array ``(M, 2*bw+1, d)``
        Hermitian basis matrices in band storage, ``bands[m, b, i] = B_m[i, i+b-bw]``.
    weights : float array ``(N, M)``
        Step generators ``G_k = sum_m weights[k, m] B_m``.
    state : complex array ``(d, ncol)``
    record : bool array ``(N,)``
        Steps after which the block is stored.

    Returns
    -------
    complex array ``(record.sum(), d, ncol)``
    """
    mod = _ckernel if _backend == "cython" else _pykernel
    return mod.propagate_banded(bands, weights, state, record, tol, max_terms)


def to_bands(matrices):
    """Convert a stack of square matrices to the band layout used by the kernels."""
    import numpy as np

    mats = np.asarray(matrices, dtype=complex)
    d = mats.shape[-1]
    rows, cols = np.nonzero(np.any(mats != 0, axis=0))
    bw = int(np.max(np.abs(rows - cols))) if rows.size else 0
    bands = np.zeros((mats.shape[0], 2 * bw + 1, d), complex)
    idx = np.arange(d)
    for b in range(2 * bw + 1):
        j = idx + b - bw
        ok = (j >= 0) & (j < d)
        bands[:, b, ok] = mats[:, idx[ok], j[ok]]
    return bands
