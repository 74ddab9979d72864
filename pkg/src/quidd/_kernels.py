"""Array kernels with a numba path and a pure-numpy fallback.

Set ``QUIDD_DISABLE_NUMBA=1`` to force the numpy implementations (also used
automatically when numba cannot be imported). Both paths must return
identical results; ``benchmarks/bench_kernels.py`` times them against each
other.
"""
import os
from typing import NamedTuple

import numpy as np

_DISABLED = os.environ.get("QUIDD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


# ---------------------------------------------------------------------------
# Decision-diagram path expansion
# ---------------------------------------------------------------------------

def expand_paths_numpy(pos, hi, lo, vals, root, nbits):
    """Evaluate a flattened DD on every assignment of ``nbits`` variables.

    ``pos[u]`` is the variable position of node ``u`` (``>= nbits`` marks a
    terminal). Bit ``p`` of the output index, counted from the most
    significant end, is the value of the variable at position ``p``.
    """
    size = 1 << nbits
    idx = np.arange(size, dtype=np.int64)
    cur = np.full(size, root, dtype=np.int64)
    for _ in range(nbits):
        p = pos[cur]
        active = p < nbits
        if not active.any():
            break
        c = cur[active]
        bit = (idx[active] >> (nbits - 1 - p[active])) & 1
        cur[active] = np.where(bit == 1, hi[c], lo[c])
    return vals[cur]


def apply_gate_numpy(psi, gate, qubits, n):
    """Apply a ``2^k x 2^k`` matrix on ``qubits`` to the rows of ``psi``.

    ``psi`` has shape ``(2^n, m)``; qubit 0 is the most significant index bit.
    """
    k = len(qubits)
    m = psi.shape[1]
    t = psi.reshape((2,) * n + (m,))
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the gate's output axes first
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return np.ascontiguousarray(out.reshape(1 << n, m))


class PreparedGate(NamedTuple):
    """A gate matrix together with its CSR form, built once and reused."""
    dense: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray


def prepare_gate(gate) -> PreparedGate:
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    nz_r, nz_c = np.nonzero(gate)
    counts = np.bincount(nz_r, minlength=gate.shape[0])
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return PreparedGate(gate, indptr, nz_c.astype(np.int64),
                        np.ascontiguousarray(gate[nz_r, nz_c]))


if HAVE_NUMBA:

    @njit(cache=True)
    def expand_paths_numba(pos, hi, lo, vals, root, nbits):
        size = 1 << nbits
        out = np.empty(size, dtype=np.complex128)
        for idx in range(size):
            u = root
            while pos[u] < nbits:
                if (idx >> (nbits - 1 - pos[u])) & 1:
                    u = hi[u]
                else:
                    u = lo[u]
            out[idx] = vals[u]
        return out

    @njit(cache=True)
    def _apply_gate_csr(psi, indptr, indices, data, qubits, n):
        k = qubits.shape[0]
        rows, m = psi.shape
        shifts = np.empty(k, dtype=np.int64)
        clear = (1 << n) - 1
        for j in range(k):
            shifts[j] = n - 1 - qubits[j]
            clear &= ~(1 << shifts[j])
        out = np.zeros((rows, m), dtype=np.complex128)
        for i in range(rows):
            sub = 0
            for j in range(k):
                sub = (sub << 1) | ((i >> shifts[j]) & 1)
            base = i & clear
            for p in range(indptr[sub], indptr[sub + 1]):
                s = indices[p]
                coef = data[p]
                src = base
                for j in range(k):
                    if (s >> (k - 1 - j)) & 1:
                        src |= 1 << shifts[j]
                for col in range(m):
                    out[i, col] += coef * psi[src, col]
        return out

    def apply_gate_numba(psi, gate, qubits, n):
        """Same contract as :func:`apply_gate_numpy`; walks only nonzero gate entries."""
        g = gate if isinstance(gate, PreparedGate) else prepare_gate(gate)
        return _apply_gate_csr(psi, g.indptr, g.indices, g.data,
                               np.asarray(qubits, dtype=np.int64), n)


def expand_paths(pos, hi, lo, vals, root, nbits):
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    hi = np.ascontiguousarray(hi, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    vals = np.ascontiguousarray(vals, dtype=np.complex128)
    if USE_NUMBA:
        return expand_paths_numba(pos, hi, lo, vals, int(root), int(nbits))
    return expand_paths_numpy(pos, hi, lo, vals, int(root), int(nbits))


def apply_gate_dense(psi, gate, qubits, n):
    """Apply ``gate`` (a matrix or a :class:`PreparedGate`) to rows of ``psi``."""
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if USE_NUMBA:
        return apply_gate_numba(psi, gate, qubits, int(n))
    dense = gate.dense if isinstance(gate, PreparedGate) else gate
    return apply_gate_numpy(psi, np.asarray(dense, dtype=np.complex128), list(qubits), int(n))
