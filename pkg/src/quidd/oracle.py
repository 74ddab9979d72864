"""Brute-force dense reference: textbook simulation and equivalence deciders.

Deliberately shares no arithmetic with the decision-diagram code; only the
circuit description is common. Qubit 0 is the most significant index bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import apply_gate_dense, prepare_gate

MAX_STATE_QUBITS = 12
MAX_OPERATOR_QUBITS = 8
TOL = 1e-9


class OracleLimitError(ValueError):
    pass


def _single(kind, theta):
    s = np.sqrt(0.5)
    if kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "y":
        return np.array([[0, -1j], [1j, 0]])
    if kind == "z":
        return np.diag([1.0, -1.0]).astype(complex)
    if kind == "h":
        return np.array([[s, s], [s, -s]], dtype=complex)
    if kind == "ry":
        c, sn = np.cos(theta / 2), np.sin(theta / 2)
        return np.array([[c, -sn], [sn, c]], dtype=complex)
    if kind == "rz":
        return np.diag([np.exp(-1j * theta), np.exp(1j * theta)])
    if kind == "phase":
        return np.diag([1.0, np.exp(1j * theta)])
    raise ValueError(kind)


def gate_matrix(g) -> np.ndarray:
    """Matrix of ``g`` on its own qubits, listed order, first qubit most significant."""
    k = len(g.qubits)
    if k == 1 and g.kind not in ("cps", "mcx"):
        return _single(g.kind, g.theta)
    dim = 1 << k
    if g.kind in ("cx", "ccx", "mcx"):
        m = np.eye(dim, dtype=complex)
        # controls all 1: rows ...10 and ...11 swap (target is the last bit)
        a, b = dim - 2, dim - 1
        m[[a, b]] = m[[b, a]]
        return m
    if g.kind == "cps":
        m = -np.eye(dim, dtype=complex)
        m[0, 0] = 1.0
        return m
    raise ValueError(g.kind)


def dense_build(c, operator: bool = False) -> np.ndarray:
    """State vector (default) or full unitary of a circuit."""
    n = c.n_qubits
    cap = MAX_OPERATOR_QUBITS if operator else MAX_STATE_QUBITS
    if n > cap:
        kind = "operator" if operator else "state"
        raise OracleLimitError(f"dense {kind} limited to {cap} qubits, got {n}")
    dim = 1 << n
    if operator:
        x = np.eye(dim, dtype=complex)
    else:
        x = np.zeros((dim, 1), dtype=complex)
        x[int(c.init_bits, 2), 0] = 1.0
    prepared = {}
    for g in c.gates:
        m = prepared.get(g)
        if m is None:
            m = prepared[g] = prepare_gate(gate_matrix(g))
        x = apply_gate_dense(x, m, list(g.qubits), n)
    return x if operator else x[:, 0]


@dataclass
class DenseVerdict:
    equivalent: bool
    level: str
    phase: complex | None = None
    phases: np.ndarray | None = None
    side: str | None = None  # "left", "right" or "state"
    also_right: bool = False


def _global(a, b):
    flat_b = b.ravel()
    i = int(np.argmax(np.abs(flat_b)))
    if abs(flat_b[i]) <= TOL:
        return None
    p = a.ravel()[i] / flat_b[i]
    if abs(abs(p) - 1) > TOL or np.max(np.abs(a - p * b)) > TOL:
        return None
    return p


def _relative_state(a, b):
    za, zb = np.abs(a) <= TOL, np.abs(b) <= TOL
    if np.any(za != zb):
        return None
    p = np.ones_like(a)
    nz = ~zb
    p[nz] = a[nz] / b[nz]
    if np.any(np.abs(np.abs(p) - 1) > TOL):
        return None
    if np.max(np.abs(a - p * b)) > TOL:
        return None
    return p


def _left_diagonal(u, v):
    # u = diag(d) v, d_j read off the largest entry of row j of v
    d = np.ones(u.shape[0], dtype=complex)
    for j in range(u.shape[0]):
        k = int(np.argmax(np.abs(v[j])))
        if abs(v[j, k]) > TOL:
            d[j] = u[j, k] / v[j, k]
    if np.any(np.abs(np.abs(d) - 1) > TOL):
        return None
    if np.max(np.abs(u - d[:, None] * v)) > TOL:
        return None
    return d


def dense_equiv(a, b, level: str) -> DenseVerdict:
    """Reference decision with the convention ``a = phase * b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if level == "exact":
        return DenseVerdict(bool(np.max(np.abs(a - b)) <= TOL), level)
    if level == "global":
        p = _global(a, b)
        return DenseVerdict(p is not None, level, phase=p)
    if level != "relative":
        raise ValueError(f"unknown level {level!r}")
    if a.ndim == 1:
        p = _relative_state(a, b)
        return DenseVerdict(p is not None, level, phases=p,
                            side="state" if p is not None else None)
    left = _left_diagonal(a, b)
    right = _left_diagonal(a.T, b.T)
    if left is not None:
        return DenseVerdict(True, level, phases=left, side="left",
                            also_right=right is not None)
    if right is not None:
        return DenseVerdict(True, level, phases=right, side="right")
    return DenseVerdict(False, level)


def expand(q) -> np.ndarray:
    """Dense contents of a QuIDD by walking its paths; skipped variables fan out."""
    mgr = q.mgr
    n = q.n_qubits
    op = q.kind == "operator"
    nvars = 2 * n if op else n
    step = 1 if op else 2
    memo = {}

    def pos(u):
        v = mgr.var(u)
        return nvars if v is None else v.level // step

    def rec(u):
        # values over the variables at positions pos(u)..nvars-1
        if u in memo:
            return memo[u]
        if mgr.is_terminal(u):
            r = np.array([mgr.value(u)], dtype=complex)
        else:
            p = pos(u)
            parts = []
            for child in (mgr.else_(u), mgr.then(u)):
                sub = rec(child)
                parts.append(np.tile(sub, 1 << (pos(child) - p - 1)))
            r = np.concatenate(parts)
        memo[u] = r
        return r

    flat = np.tile(rec(q.root), 1 << pos(q.root))
    if not op:
        return flat
    t = flat.reshape((2,) * (2 * n))
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    return t.reshape(1 << n, 1 << n)


def cross_check(q, d) -> float:
    """Largest entrywise difference between a QuIDD and a dense array."""
    e = expand(q)
    d = np.asarray(d, dtype=complex)
    if e.shape != d.shape:
        raise ValueError(f"shape mismatch {e.shape} vs {d.shape}")
    return float(np.max(np.abs(e - d)))
