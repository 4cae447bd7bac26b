"""Sampled dense-dense products: out[n] = <U[rows[n]], V[cols[n]]>."""

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _sampled_dot_numpy(rows, cols, U, V):
    return np.einsum("ij,ij->i", np.take(U, rows, axis=0), np.take(V, cols, axis=0))


if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _sampled_dot_numba(rows, cols, U, V):
        out = np.empty(rows.size)
        d = U.shape[1]
        for n in range(rows.size):
            r = rows[n]
            c = cols[n]
            s = 0.0
            for k in range(d):
                s += U[r, k] * V[c, k]
            out[n] = s
        return out

    def sampled_dot(rows, cols, U, V):
        return _sampled_dot_numba(rows, cols, np.ascontiguousarray(U), np.ascontiguousarray(V))

else:
    sampled_dot = _sampled_dot_numpy
